#include "pboel/bounds.hpp"
#include "pboel/rng.hpp"

#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace pboel;

namespace {

std::vector<double> one_hot_column(std::size_t n, std::size_t hot) {
    std::vector<double> v(n, 0.0);
    v[hot] = 1.0;
    return v;
}

}  // namespace

TEST_CASE("regret term evaluates the displayed expression") {
    // frozen from a high-precision evaluation of 2 sqrt(e-1) sqrt(2 ln 10) * 2e-2
    CHECK(regret_term(10000, 1.0, 2, 10) ==
          doctest::Approx(0.11252007996829507).epsilon(1e-12));
    CHECK_THROWS_AS(regret_term(0, 0.5, 2, 10), std::invalid_argument);
    CHECK_THROWS_AS(regret_term(100, 1.5, 2, 10), std::invalid_argument);
    CHECK_THROWS_AS(regret_term(100, 0.5, 2, 1), std::invalid_argument);
}

TEST_CASE("regret term decreases in T and dominates the plain-EXP4 term") {
    for (double alpha : {0.3, 0.7, 1.0}) {
        double prev = regret_term(2, alpha, 2, 10);
        for (std::size_t t = 4; t <= 1 << 22; t *= 2) {
            const double cur = regret_term(t, alpha, 2, 10);
            CHECK(cur < prev);
            CHECK(cur >= exp4_regret_term(t, 2, 10));
            if (alpha < 1.0) CHECK(cur > exp4_regret_term(t, 2, 10));
            prev = cur;
        }
    }
}

TEST_CASE("constant-period regret equals the exponent form when they coincide") {
    // T = 10^4, alpha = 0.5 -> Delta_T = 100 exactly
    CHECK(regret_term_constant(10000, 100, 3, 8) ==
          doctest::Approx(regret_term(10000, 0.5, 3, 8)).epsilon(1e-12));
    CHECK(regret_term_constant(10000, 100, 3, 8) >= exp4_regret_term(10000, 3, 8));
}

TEST_CASE("ledger batch accounting") {
    SUBCASE("a voting round credits the correct expert") {
        BoundLedger ledger(4, 3);
        ledger.record_round(one_hot_column(4, 2), true,
                            std::vector<std::uint8_t>{0, 0, 1, 0});
        ledger.record_round(one_hot_column(4, 2), true,
                            std::vector<std::uint8_t>{0, 0, 1, 0});
        ledger.record_round(one_hot_column(4, 0), true,
                            std::vector<std::uint8_t>{1, 0, 0, 0});
        CHECK(ledger.closed_batch_maxima() == std::vector<double>{2.0});
    }
    SUBCASE("an unlabeled voting round contributes zero") {
        BoundLedger ledger(2, 2);
        ledger.record_round({0.0, 0.0}, false);
        ledger.record_round({0.0, 0.0}, false);
        CHECK(ledger.closed_batch_maxima() == std::vector<double>{0.0});
        CHECK(ledger.labeled_rounds() == 0);
    }
    SUBCASE("exactly one closure per batch_size rounds") {
        BoundLedger ledger(2, 5);
        for (int i = 0; i < 5; ++i) ledger.record_round({1.0, 0.0}, true);
        CHECK(ledger.closed_batch_maxima().size() == 1);
        for (int i = 0; i < 4; ++i) ledger.record_round({1.0, 0.0}, true);
        CHECK(ledger.closed_batch_maxima().size() == 1);
    }
    SUBCASE("input validation") {
        BoundLedger ledger(2, 5);
        CHECK_THROWS_AS(ledger.record_round({1.5, 0.0}, true), std::out_of_range);
        CHECK_THROWS_AS(ledger.record_round({1.0}, true), std::invalid_argument);
        CHECK_THROWS_AS(ledger.record_round({0.0, 0.0}, false,
                                            std::vector<std::uint8_t>{1, 0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(ledger.finalize(0.7, 2, 0), std::logic_error);
    }
}

TEST_CASE("finalize computes both ultimate bounds") {
    SUBCASE("one expert correct on every labeled round saturates the bound") {
        BoundLedger ledger(3, 4);
        for (int i = 0; i < 8; ++i) {
            ledger.record_round({1.0, 0.0, 0.0}, true, std::vector<std::uint8_t>{1, 0, 0});
        }
        const auto report = ledger.finalize(0.7, 2, 8);
        CHECK(report.ultimate_bound == 1.0);
        CHECK(report.exp4_ultimate_bound == 1.0);
        CHECK(report.per_expert_accuracy[0] == 1.0);
    }
    SUBCASE("with partial labels the bound scales with the labeled fraction") {
        BoundLedger ledger(2, 4);
        for (int i = 0; i < 4; ++i) {
            ledger.record_round({1.0, 0.0}, true, std::vector<std::uint8_t>{1, 0});
        }
        for (int i = 0; i < 4; ++i) ledger.record_round({0.0, 0.0}, false);
        const auto report = ledger.finalize(0.7, 2, 6);
        CHECK(report.ultimate_bound == doctest::Approx(0.5));
        CHECK_FALSE(report.fully_labeled);
    }
    SUBCASE("alternating experts separate the two bounds") {
        BoundLedger ledger(2, 4);
        for (int i = 0; i < 4; ++i) {
            ledger.record_round({1.0, 0.0}, true, std::vector<std::uint8_t>{1, 0});
        }
        for (int i = 0; i < 4; ++i) {
            ledger.record_round({0.0, 1.0}, true, std::vector<std::uint8_t>{0, 1});
        }
        const auto report = ledger.finalize(1.0, 2, 8);
        CHECK(report.ultimate_bound == 1.0);
        CHECK(report.exp4_ultimate_bound == 0.5);
        CHECK(report.regret_rexp4 >= report.regret_exp4);
    }
}

TEST_CASE("per-run inequalities hold on random voting ledgers") {
    auto rng = make_rng(1234);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 6;
        const std::size_t batch = 5 + rng() % 20;
        const std::size_t rounds = 40 + rng() % 200;
        BoundLedger ledger(n, batch);
        std::size_t correct = 0;
        for (std::size_t t = 0; t < rounds; ++t) {
            std::vector<double> xi(n, 0.0);
            std::vector<std::uint8_t> phi(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                const bool hit = uniform01(rng) < 0.6;
                xi[i] = hit ? 1.0 : 0.0;
                phi[i] = hit ? 1 : 0;
            }
            if (uniform01(rng) < 0.55) correct += 1;
            ledger.record_round(xi, true, phi);
        }
        const auto report = ledger.finalize(0.7, 2, correct);
        CHECK(report.ultimate_bound >= report.exp4_ultimate_bound);
        CHECK(report.regret_rexp4 >= report.regret_exp4);
        for (double acc : report.per_expert_accuracy) {
            CHECK(report.ultimate_bound >= acc);
        }
    }
}

TEST_CASE("permuting rounds within one batch leaves the report unchanged") {
    auto rng = make_rng(77);
    const std::size_t n = 4, batch = 16, rounds = 64;
    // dyadic values keep every partial sum exactly representable
    const double grid[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::vector<double>> columns;
    for (std::size_t t = 0; t < rounds; ++t) {
        std::vector<double> xi(n);
        for (auto& v : xi) v = grid[rng() % 5];
        columns.push_back(xi);
    }
    auto report_for = [&](const std::vector<std::vector<double>>& cols) {
        BoundLedger ledger(n, batch);
        for (const auto& c : cols) ledger.record_round(c, true);
        return ledger.finalize(0.7, 2, 30);
    };
    const auto base = report_for(columns);
    auto shuffled = columns;
    for (std::size_t b = 0; b < rounds / batch; ++b) {
        std::shuffle(shuffled.begin() + static_cast<long>(b * batch),
                     shuffled.begin() + static_cast<long>((b + 1) * batch),
                     make_rng(b));
    }
    const auto perm = report_for(shuffled);
    CHECK(base.ultimate_bound == perm.ultimate_bound);
    CHECK(base.exp4_ultimate_bound == perm.exp4_ultimate_bound);
}

TEST_CASE("partial-label surrogate never exceeds the revealed-label bound") {
    auto rng = make_rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3, batch = 10, rounds = 100;
        BoundLedger partial(n, batch);
        BoundLedger revealed(n, batch);
        for (std::size_t t = 0; t < rounds; ++t) {
            std::vector<double> conf(n);
            for (auto& v : conf) v = uniform01(rng);  // xi at the true label
            std::vector<double> floor(n);
            for (std::size_t i = 0; i < n; ++i) floor[i] = conf[i] * uniform01(rng);
            const bool labeled = uniform01(rng) < 0.3;
            partial.record_round(labeled ? conf : floor, labeled);
            revealed.record_round(conf, true);
        }
        const auto a = partial.finalize(0.7, 2, 50);
        const auto b = revealed.finalize(0.7, 2, 50);
        CHECK(a.ultimate_bound <= b.ultimate_bound);
    }
}
