#include "pboel/drift.hpp"
#include "pboel/rng.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

using namespace pboel;

TEST_CASE("hoeffding threshold formula") {
    // sqrt(300 ln(1000) / (2 * 100 * 400)), frozen from a high-precision evaluation
    CHECK(DriftMonitor::epsilon_for(100, 300, 1e-3) ==
          doctest::Approx(0.16094745197170104).epsilon(1e-12));
}

TEST_CASE("constant stream never drifts") {
    DriftMonitor m(200, 1e-3, 30);
    for (int i = 0; i < 1000; ++i) {
        CHECK_FALSE(m.observe(1.0).drift);
    }
}

TEST_CASE("a mean drop is detected, an improvement is not") {
    SUBCASE("drop fires") {
        DriftMonitor m(500, 1e-3, 30);
        auto rng = make_rng(5);
        bool fired = false;
        for (int i = 0; i < 1000 && !fired; ++i) fired = m.observe(uniform01(rng) < 0.9).drift;
        CHECK_FALSE(fired);  // stationary segment stays quiet
        int detect_at = -1;
        for (int i = 0; i < 400; ++i) {
            const auto st = m.observe(uniform01(rng) < 0.5);
            if (st.drift) {
                detect_at = i;
                CHECK(st.x_bar - st.z_bar >= st.epsilon);
                CHECK(st.cut_index >= m.min_segment());
                break;
            }
        }
        CHECK(detect_at >= 0);
        CHECK(detect_at <= 300);
    }
    SUBCASE("improvement never fires") {
        DriftMonitor m(500, 1e-3, 30);
        auto rng = make_rng(6);
        for (int i = 0; i < 1000; ++i) CHECK_FALSE(m.observe(uniform01(rng) < 0.5).drift);
        for (int i = 0; i < 1000; ++i) CHECK_FALSE(m.observe(uniform01(rng) < 0.9).drift);
    }
}

TEST_CASE("no drift before min_segment + 1 observations") {
    DriftMonitor m(100, 0.4, 10);
    // the most alarming possible prefix still may not fire early
    for (int i = 0; i < 10; ++i) CHECK_FALSE(m.observe(1.0).drift);
    m.reset();
    for (int i = 0; i < 10; ++i) CHECK_FALSE(m.observe(1.0).drift);
}

TEST_CASE("reset restores fresh-monitor behaviour and is idempotent") {
    const std::vector<double> seq = [] {
        std::vector<double> v;
        auto rng = make_rng(17);
        for (int i = 0; i < 600; ++i) v.push_back(uniform01(rng) < 0.8 ? 1.0 : 0.0);
        for (int i = 0; i < 300; ++i) v.push_back(uniform01(rng) < 0.2 ? 1.0 : 0.0);
        return v;
    }();

    DriftMonitor fresh(500, 1e-3, 30);
    DriftMonitor reused(500, 1e-3, 30);
    for (int i = 0; i < 200; ++i) reused.observe(0.5);
    reused.reset();
    reused.reset();
    CHECK(reused.size() == 0);

    for (double v : seq) {
        const auto a = fresh.observe(v);
        const auto b = reused.observe(v);
        CHECK(a.drift == b.drift);
        CHECK(a.cut_index == b.cut_index);
        CHECK(a.x_bar == b.x_bar);
        CHECK(a.epsilon == b.epsilon);
        if (a.drift) break;
    }
}

TEST_CASE("identical sequences give identical statuses") {
    auto run = [] {
        DriftMonitor m(300, 1e-2, 20);
        auto rng = make_rng(23);
        std::vector<DriftStatus> out;
        for (int i = 0; i < 800; ++i) {
            out.push_back(m.observe(uniform01(rng)));
            if (out.back().drift) m.reset();
        }
        return out;
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].drift == b[i].drift);
        CHECK(a[i].x_bar == b[i].x_bar);
        CHECK(a[i].z_bar == b[i].z_bar);
    }
}

TEST_CASE("input validation") {
    DriftMonitor m(100, 1e-3, 10);
    CHECK_THROWS_AS(m.observe(-0.1), std::out_of_range);
    CHECK_THROWS_AS(m.observe(1.1), std::out_of_range);
    CHECK_THROWS_AS(DriftMonitor(1, 1e-3, 10), std::invalid_argument);
    CHECK_THROWS_AS(DriftMonitor(100, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(DriftMonitor(100, 1e-3, 0), std::invalid_argument);
}
