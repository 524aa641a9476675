#include "pboel/harness.hpp"

#include "pboel/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pboel {

using nlohmann::json;

namespace {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(key + ": has the wrong JSON type");
    }
}

AdviceMode advice_mode_from_string(const std::string& s) {
    if (s == "voting") return AdviceMode::voting;
    if (s == "confidence") return AdviceMode::confidence;
    throw std::invalid_argument("advice_mode: expected 'voting' or 'confidence', got '" + s + "'");
}

SelectionPrinciple principle_from_string(const std::string& s) {
    if (s == "maximum_index") return SelectionPrinciple::maximum_index;
    if (s == "random_sampling") return SelectionPrinciple::random_sampling;
    throw std::invalid_argument(
        "principle: expected 'maximum_index' or 'random_sampling', got '" + s + "'");
}

// Runs fn(i) for i in [0, jobs) on up to `workers` threads.
void parallel_for(std::size_t jobs, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) return;
    if (workers == 0) {
        workers = std::max<std::size_t>(1, std::min<std::size_t>(
                                               std::thread::hardware_concurrency(), 8));
    }
    workers = std::min(workers, jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

void RunConfig::validate() const {
    stream.validate();
    if (warm_count < 1) throw std::invalid_argument("warm_count: must be >= 1");
    if (stream.kind != StreamKind::csv && warm_count >= stream.length) {
        throw std::invalid_argument("warm_count: must be smaller than stream.length");
    }
    if (num_experts < 1) throw std::invalid_argument("num_experts: must be >= 1");
    if (alpha && restart_period_const) {
        throw std::invalid_argument("alpha: set either alpha or restart_period, not both");
    }
    if (!alpha && !restart_period_const) {
        throw std::invalid_argument("alpha: one of alpha or restart_period is required");
    }
    if (alpha && !(*alpha > 0.0 && *alpha <= 1.0)) {
        throw std::invalid_argument("alpha: must be in (0,1]");
    }
    if (restart_period_const && *restart_period_const < 1) {
        throw std::invalid_argument("restart_period: must be >= 1");
    }
    if (gate.kind != GateKind::full && !(gate.rate >= 0.0 && gate.rate <= 1.0)) {
        throw std::invalid_argument("gate.rate: must be in [0,1]");
    }
    if (seeds.empty()) throw std::invalid_argument("seeds: must not be empty");
    if (rvfl.hidden < 1) throw std::invalid_argument("learner.hidden: must be >= 1");
    if (rvfl.ridge <= 0.0) throw std::invalid_argument("learner.ridge: must be > 0");
    if (drift.enabled) {
        if (!(drift.delta > 0.0 && drift.delta < 1.0)) {
            throw std::invalid_argument("drift.delta: must be in (0,1)");
        }
        if (drift.window < 2) throw std::invalid_argument("drift.window: must be >= 2");
        if (drift.min_segment < 1) throw std::invalid_argument("drift.min_segment: must be >= 1");
    }
    if (retrain_buffer < 1) throw std::invalid_argument("retrain_buffer: must be >= 1");
}

StreamSpec stream_spec_from_json(const json& s) {
    StreamSpec spec;
    spec.kind = stream_kind_from_string(get_or<std::string>(s, "kind", "sea"));
    spec.length = get_or<std::size_t>(s, "length", spec.length);
    spec.seed = get_or<std::uint64_t>(s, "seed", spec.seed);
    spec.noise_rate = get_or<double>(s, "noise_rate", spec.noise_rate);
    spec.sea_threshold = get_or<double>(s, "threshold", spec.sea_threshold);
    spec.drift_speed = get_or<double>(s, "drift_speed", spec.drift_speed);
    spec.centroids = get_or<std::size_t>(s, "centroids", spec.centroids);
    spec.flip_period = get_or<std::size_t>(s, "flip_period", spec.flip_period);
    spec.feature_noise = get_or<double>(s, "feature_noise", spec.feature_noise);
    spec.csv_path = get_or<std::string>(s, "path", spec.csv_path);
    spec.label_column = get_or<std::string>(s, "label_column", spec.label_column);
    if (s.contains("class_map")) {
        std::map<std::string, int> m;
        for (const auto& [k, v] : s.at("class_map").items()) m[k] = v.get<int>();
        spec.class_map = std::move(m);
    }
    spec.validate();
    return spec;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    if (j.contains("stream")) c.stream = stream_spec_from_json(j.at("stream"));
    c.warm_count = get_or<std::size_t>(j, "warm_count", c.warm_count);
    c.num_experts = get_or<std::size_t>(j, "num_experts", c.num_experts);
    if (j.contains("restart_period")) {
        c.restart_period_const = j.at("restart_period").get<std::size_t>();
        c.alpha.reset();
    }
    if (j.contains("alpha")) {
        c.alpha = j.at("alpha").get<double>();
        if (j.contains("restart_period")) {
            throw std::invalid_argument("alpha: set either alpha or restart_period, not both");
        }
    }
    c.advice_mode = advice_mode_from_string(get_or<std::string>(j, "advice_mode", "voting"));
    c.principle = principle_from_string(get_or<std::string>(j, "principle", "maximum_index"));
    if (j.contains("gate")) {
        if (j.at("gate").is_string()) {
            c.gate = gate_from_string(j.at("gate").get<std::string>());
        } else {
            const json& g = j.at("gate");
            const std::string kind = get_or<std::string>(g, "kind", "full");
            c.gate = gate_from_string(kind);
            c.gate.rate = get_or<double>(g, "rate", c.gate.rate);
            c.gate.margin = get_or<double>(g, "margin", c.gate.margin);
        }
    }
    if (j.contains("learner")) {
        const json& l = j.at("learner");
        c.learner_kind = learner_kind_from_string(get_or<std::string>(l, "kind", "rvfl"));
        c.rvfl.hidden = get_or<std::size_t>(l, "hidden", c.rvfl.hidden);
        c.rvfl.ridge = get_or<double>(l, "ridge", c.rvfl.ridge);
        c.nb_variance_floor = get_or<double>(l, "variance_floor", c.nb_variance_floor);
    }
    if (j.contains("drift")) {
        const json& d = j.at("drift");
        c.drift.enabled = get_or<bool>(d, "enabled", c.drift.enabled);
        c.drift.delta = get_or<double>(d, "delta", c.drift.delta);
        c.drift.window = get_or<std::size_t>(d, "window", c.drift.window);
        c.drift.min_segment = get_or<std::size_t>(d, "min_segment", c.drift.min_segment);
    }
    c.retrain_buffer = get_or<std::size_t>(j, "retrain_buffer", c.retrain_buffer);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.workers = get_or<std::size_t>(j, "workers", c.workers);
    c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir);
    c.log_steps = get_or<bool>(j, "log_steps", c.log_steps);
    c.log_probs = get_or<bool>(j, "log_probs", c.log_probs);
    c.validate();
    return c;
}

json RunConfig::to_json() const {
    json s{{"kind", pboel::to_string(stream.kind)}, {"length", stream.length},
           {"seed", stream.seed}};
    switch (stream.kind) {
        case StreamKind::sea:
        case StreamKind::sea_abrupt:
            s["noise_rate"] = stream.noise_rate;
            s["threshold"] = stream.sea_threshold;
            break;
        case StreamKind::hyperplane:
            s["drift_speed"] = stream.drift_speed;
            break;
        case StreamKind::rbf:
        case StreamKind::rbf_gradual:
            s["centroids"] = stream.centroids;
            s["drift_speed"] = stream.drift_speed;
            break;
        case StreamKind::label_flip:
            s["flip_period"] = stream.flip_period;
            s["feature_noise"] = stream.feature_noise;
            break;
        case StreamKind::csv:
            s["path"] = stream.csv_path;
            s["label_column"] = stream.label_column;
            break;
        default: break;
    }
    json j{{"schema_version", kSchemaVersion},
           {"stream", s},
           {"warm_count", warm_count},
           {"num_experts", num_experts},
           {"advice_mode", advice_mode == AdviceMode::voting ? "voting" : "confidence"},
           {"principle", principle == SelectionPrinciple::maximum_index ? "maximum_index"
                                                                        : "random_sampling"},
           {"gate", to_string(gate)},
           {"learner", json{{"kind", pboel::to_string(learner_kind)},
                            {"hidden", rvfl.hidden},
                            {"ridge", rvfl.ridge},
                            {"variance_floor", nb_variance_floor}}},
           {"drift", json{{"enabled", drift.enabled},
                          {"delta", drift.delta},
                          {"window", drift.window},
                          {"min_segment", drift.min_segment}}},
           {"retrain_buffer", retrain_buffer},
           {"seeds", seeds},
           {"log_steps", log_steps},
           {"log_probs", log_probs}};
    if (alpha) j["alpha"] = *alpha;
    if (restart_period_const) j["restart_period"] = *restart_period_const;
    return j;
}

void verify_bound_inequalities(const BoundReport& report, AdviceMode mode, std::uint64_t seed) {
    const std::string tag = " (seed=" + std::to_string(seed) + ")";
    if (!(report.ultimate_bound >= report.exp4_ultimate_bound)) {
        throw std::runtime_error(
            "violated: ultimate_bound >= exp4_ultimate_bound" + tag);
    }
    if (!(report.regret_rexp4 >= report.regret_exp4)) {
        throw std::runtime_error("violated: regret_rexp4 >= regret_exp4" + tag);
    }
    if (mode == AdviceMode::voting && report.fully_labeled) {
        for (std::size_t n = 0; n < report.per_expert_accuracy.size(); ++n) {
            if (!(report.ultimate_bound >= report.per_expert_accuracy[n])) {
                throw std::runtime_error("violated: ultimate_bound >= per_expert_accuracy[" +
                                         std::to_string(n) + "]" + tag);
            }
        }
    }
}

namespace {

json bound_to_json(const BoundReport& b) {
    return json{{"ultimate_bound", b.ultimate_bound},
                {"exp4_ultimate_bound", b.exp4_ultimate_bound},
                {"regret_rexp4", b.regret_rexp4},
                {"regret_exp4", b.regret_exp4},
                {"lower_bound", b.lower_bound},
                {"best_base_accuracy", b.best_base_accuracy},
                {"per_expert_accuracy", b.per_expert_accuracy},
                {"ensemble_accuracy", b.ensemble_accuracy},
                {"constant_period", b.constant_period},
                {"fully_labeled", b.fully_labeled},
                {"rounds", b.rounds},
                {"labeled_rounds", b.labeled_rounds}};
}

SeedRunSummary run_one_seed(const RunConfig& config, std::uint64_t seed) {
    StreamSpec spec = config.stream;
    spec.seed = mix_seed(seed, 900 + config.stream.seed);
    const auto samples = generate(spec);
    if (samples.size() <= config.warm_count) {
        throw std::invalid_argument("warm_count: stream too short for warm start");
    }

    std::size_t num_classes = spec.num_classes();
    std::size_t num_features = spec.num_features();
    if (spec.kind == StreamKind::csv) {
        num_features = samples.front().features.size();
        int max_label = 0;
        for (const auto& s : samples) max_label = std::max(max_label, s.label);
        num_classes = static_cast<std::size_t>(max_label);
    }
    if (num_classes < 2) throw std::invalid_argument("stream: needs at least 2 classes");

    const std::vector<StreamSample> warm(samples.begin(),
                                         samples.begin() + static_cast<long>(config.warm_count));
    const std::vector<StreamSample> online(samples.begin() + static_cast<long>(config.warm_count),
                                           samples.end());

    ModelConfig mc;
    mc.num_experts = config.num_experts;
    mc.num_classes = num_classes;
    mc.num_features = num_features;
    const std::size_t horizon = online.size();
    if (config.alpha) {
        mc.restart_period = static_cast<std::size_t>(std::max<long long>(
            1, std::llround(std::pow(static_cast<double>(horizon), *config.alpha))));
        mc.alpha = config.alpha;
    } else {
        mc.restart_period = *config.restart_period_const;
    }
    mc.advice_mode = config.advice_mode;
    mc.principle = config.principle;
    mc.gate = config.gate;
    mc.learner_kind = config.learner_kind;
    mc.rvfl = config.rvfl;
    mc.nb_variance_floor = config.nb_variance_floor;
    mc.drift = config.drift;
    mc.retrain_buffer_capacity = config.retrain_buffer;
    mc.seed = seed;

    PBOELModel model(mc);
    model.warm_start(warm);

    StepSink sink;
    if (config.log_steps) {
        const std::string dir = config.out_dir.empty() ? default_out_dir() : config.out_dir;
        std::filesystem::create_directories(dir);
        sink = make_jsonl_sink(dir + "/steps_seed" + std::to_string(seed) + ".jsonl",
                               config.log_probs);
    }
    SeedRunSummary summary = run_stream(model, online, sink);
    verify_bound_inequalities(summary.bound, config.advice_mode, seed);
    return summary;
}

}  // namespace

RunSummary run(const RunConfig& config) {
    config.validate();
    RunSummary out;
    out.config = config;
    out.config_digest = fnv1a_hex(config.to_json().dump());
    out.per_seed.resize(config.seeds.size());

    parallel_for(config.seeds.size(), config.workers,
                 [&](std::size_t i) { out.per_seed[i] = run_one_seed(config, config.seeds[i]); });

    std::vector<double> acc, f1, ub, exp4_ub, lb, best_base, drifts;
    for (const auto& s : out.per_seed) {
        acc.push_back(s.accuracy);
        f1.push_back(s.macro_f1);
        ub.push_back(s.bound.ultimate_bound);
        exp4_ub.push_back(s.bound.exp4_ultimate_bound);
        lb.push_back(s.bound.lower_bound);
        best_base.push_back(s.bound.best_base_accuracy);
        drifts.push_back(static_cast<double>(s.drift_events));
    }
    out.aggregate.accuracy_mean = mean_of(acc);
    out.aggregate.accuracy_std = sample_std(acc);
    out.aggregate.macro_f1_mean = mean_of(f1);
    out.aggregate.macro_f1_std = sample_std(f1);
    out.aggregate.ultimate_bound_mean = mean_of(ub);
    out.aggregate.ultimate_bound_std = sample_std(ub);
    out.aggregate.exp4_ultimate_bound_mean = mean_of(exp4_ub);
    out.aggregate.lower_bound_mean = mean_of(lb);
    out.aggregate.best_base_accuracy_mean = mean_of(best_base);
    out.aggregate.drift_events_mean = mean_of(drifts);
    if (!out.per_seed.empty()) {
        out.aggregate.regret_rexp4 = out.per_seed.front().bound.regret_rexp4;
        out.aggregate.regret_exp4 = out.per_seed.front().bound.regret_exp4;
    }
    return out;
}

json RunSummary::to_json() const {
    json per;
    for (const auto& s : per_seed) {
        per.push_back(json{{"seed", s.seed},
                           {"processed", s.processed},
                           {"labeled", s.labeled},
                           {"accuracy", s.accuracy},
                           {"macro_f1", s.macro_f1},
                           {"drift_events", s.drift_events},
                           {"restarts", s.restarts},
                           {"final_weights", s.final_weights},
                           {"bound", bound_to_json(s.bound)},
                           {"wall_time_s", s.wall_time_s},
                           {"samples_per_s", s.samples_per_s}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"config", config.to_json()},
                {"config_digest", config_digest},
                {"per_seed", per},
                {"aggregate",
                 json{{"accuracy_mean", aggregate.accuracy_mean},
                      {"accuracy_std", aggregate.accuracy_std},
                      {"macro_f1_mean", aggregate.macro_f1_mean},
                      {"macro_f1_std", aggregate.macro_f1_std},
                      {"ultimate_bound_mean", aggregate.ultimate_bound_mean},
                      {"ultimate_bound_std", aggregate.ultimate_bound_std},
                      {"exp4_ultimate_bound_mean", aggregate.exp4_ultimate_bound_mean},
                      {"regret_rexp4", aggregate.regret_rexp4},
                      {"regret_exp4", aggregate.regret_exp4},
                      {"lower_bound_mean", aggregate.lower_bound_mean},
                      {"best_base_accuracy_mean", aggregate.best_base_accuracy_mean},
                      {"drift_events_mean", aggregate.drift_events_mean}}}};
}

SweepResult sweep(const RunConfig& base, const std::vector<double>& alphas,
                  const std::vector<std::size_t>& ns) {
    if (alphas.empty() || ns.empty()) {
        throw std::invalid_argument("sweep grids must not be empty");
    }
    SweepResult result;
    for (double a : alphas) {
        for (std::size_t n : ns) {
            RunConfig c = base;
            c.alpha = a;
            c.restart_period_const.reset();
            c.num_experts = n;
            c.log_steps = false;
            RunSummary cell = run(c);
            for (const auto& s : cell.per_seed) {
                result.rows.push_back(SweepRow{a, n, s.seed, s.accuracy,
                                               s.bound.ultimate_bound, s.bound.regret_rexp4,
                                               s.bound.lower_bound});
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

void BanditSimSpec::validate() const {
    if (num_arms < 2) throw std::invalid_argument("arms: must be >= 2");
    if (num_experts < 1) throw std::invalid_argument("experts: must be >= 1");
    if (horizon < 1) throw std::invalid_argument("horizon: must be >= 1");
    if (restart_period < 1) throw std::invalid_argument("restart_period: must be >= 1");
    if (!expert_profile.empty()) {
        if (expert_profile.size() != num_experts) {
            throw std::invalid_argument("expert_profile: needs one row per expert");
        }
        for (const auto& row : expert_profile) {
            if (row.size() != num_arms) {
                throw std::invalid_argument("expert_profile: row length must equal arms");
            }
            double sum = 0.0;
            for (double v : row) {
                if (v < 0.0) throw std::invalid_argument("expert_profile: negative entry");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                throw std::invalid_argument("expert_profile: rows must sum to 1");
            }
        }
    }
    for (const auto& seg : reward_segments) {
        if (seg.means.size() != num_arms) {
            throw std::invalid_argument("reward_segments: means length must equal arms");
        }
        for (double m : seg.means) {
            if (!(m >= 0.0 && m <= 1.0)) {
                throw std::invalid_argument("reward_segments: means must be in [0,1]");
            }
        }
    }
    if (seeds.empty()) throw std::invalid_argument("seeds: must not be empty");
}

BanditSimSpec BanditSimSpec::from_json(const json& j) {
    BanditSimSpec s;
    s.num_arms = get_or<std::size_t>(j, "arms", s.num_arms);
    s.num_experts = get_or<std::size_t>(j, "experts", s.num_experts);
    s.horizon = get_or<std::size_t>(j, "horizon", s.horizon);
    s.restart_period = get_or<std::size_t>(j, "restart_period", s.restart_period);
    if (j.contains("expert_profile")) {
        s.expert_profile = j.at("expert_profile").get<std::vector<std::vector<double>>>();
    }
    if (j.contains("reward_segments")) {
        for (const auto& seg : j.at("reward_segments")) {
            s.reward_segments.push_back(Segment{seg.at("length").get<std::size_t>(),
                                                seg.at("means").get<std::vector<double>>()});
        }
    } else if (j.contains("reward_means")) {
        s.reward_segments.push_back(
            Segment{s.horizon, j.at("reward_means").get<std::vector<double>>()});
    }
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (s.seeds.empty()) {
        for (std::uint64_t i = 1; i <= 30; ++i) s.seeds.push_back(i);
    }
    s.validate();
    return s;
}

json BanditSimSpec::to_json() const {
    json segs;
    for (const auto& seg : reward_segments) {
        segs.push_back(json{{"length", seg.length}, {"means", seg.means}});
    }
    return json{{"schema_version", kSchemaVersion}, {"arms", num_arms},
                {"experts", num_experts},          {"horizon", horizon},
                {"restart_period", restart_period}, {"expert_profile", expert_profile},
                {"reward_segments", segs},          {"seeds", seeds}};
}

BanditSimReport bandit_sim(const BanditSimSpec& input) {
    BanditSimSpec spec = input;
    spec.validate();
    if (spec.reward_segments.empty()) {
        // Default: one clearly best arm, stationary.
        std::vector<double> means(spec.num_arms, 0.3);
        means[0] = 0.9;
        spec.reward_segments.push_back(BanditSimSpec::Segment{spec.horizon, means});
    }
    if (spec.expert_profile.empty()) {
        // One strong expert pointing at the best first-segment arm, rest uniform.
        const auto& means = spec.reward_segments.front().means;
        const std::size_t best = static_cast<std::size_t>(
            std::max_element(means.begin(), means.end()) - means.begin());
        spec.expert_profile.assign(spec.num_experts,
                                   std::vector<double>(spec.num_arms,
                                                       1.0 / static_cast<double>(spec.num_arms)));
        if (spec.num_arms > 1) {
            auto& strong = spec.expert_profile[0];
            std::fill(strong.begin(), strong.end(),
                      0.05 / static_cast<double>(spec.num_arms - 1));
            strong[best] = 0.95;
        }
    }

    BanditSimReport report;
    report.spec = spec;
    report.theoretical_batch_bound =
        spec.num_experts >= 2
            ? batch_regret_bound(spec.restart_period, spec.num_arms, spec.num_experts)
            : 0.0;
    report.per_seed.resize(spec.seeds.size());

    // Cumulative per-expert profile rows for one-hot advice draws.
    std::vector<std::vector<double>> cumprofile = spec.expert_profile;
    for (auto& row : cumprofile) {
        for (std::size_t k = 1; k < row.size(); ++k) row[k] += row[k - 1];
    }

    parallel_for(spec.seeds.size(), 0, [&](std::size_t si) {
        const std::uint64_t seed = spec.seeds[si];
        auto advice_rng = make_rng(seed, 11);
        auto reward_rng = make_rng(seed, 12);
        auto action_rng = make_rng(seed, 13);

        EnsembleState state = EnsembleState::make(spec.num_arms, spec.num_experts,
                                                  spec.restart_period);
        BanditSimSeedResult res;
        res.seed = seed;

        std::vector<double> expert_batch_totals(spec.num_experts, 0.0);
        double realized_total = 0.0;
        std::size_t in_batch = 0;
        std::size_t seg_idx = 0;
        std::size_t seg_left = spec.reward_segments[0].length;

        auto close_batch = [&]() {
            BanditSimBatch b;
            b.best_expert_total = *std::max_element(expert_batch_totals.begin(),
                                                    expert_batch_totals.end());
            b.realized_total = realized_total;
            b.regret = b.best_expert_total - b.realized_total;
            res.batches.push_back(b);
            std::fill(expert_batch_totals.begin(), expert_batch_totals.end(), 0.0);
            realized_total = 0.0;
            in_batch = 0;
        };

        AdviceMatrix advice(spec.num_experts, AdviceVector(spec.num_arms, 0.0));
        for (std::size_t t = 0; t < spec.horizon; ++t) {
            while (seg_left == 0 && seg_idx + 1 < spec.reward_segments.size()) {
                seg_idx += 1;
                seg_left = spec.reward_segments[seg_idx].length;
            }
            if (seg_left > 0) seg_left -= 1;
            const auto& means = spec.reward_segments[seg_idx].means;

            for (std::size_t n = 0; n < spec.num_experts; ++n) {
                std::fill(advice[n].begin(), advice[n].end(), 0.0);
                const double u = uniform01(advice_rng);
                std::size_t arm = spec.num_arms - 1;
                for (std::size_t k = 0; k < spec.num_arms; ++k) {
                    if (u < cumprofile[n][k]) {
                        arm = k;
                        break;
                    }
                }
                advice[n][arm] = 1.0;
            }

            std::vector<double> mu(spec.num_arms, 0.0);
            for (std::size_t k = 0; k < spec.num_arms; ++k) {
                mu[k] = uniform01(reward_rng) < means[k] ? 1.0 : 0.0;
            }

            const ActionDistribution dist = compute_action_distribution(state, advice);
            const int action = select_action(dist, SelectionPrinciple::random_sampling,
                                             action_rng);

            // Only the pulled arm's reward is revealed to the policy.
            std::vector<double> observed(spec.num_arms, 0.0);
            observed[static_cast<std::size_t>(action) - 1] =
                mu[static_cast<std::size_t>(action) - 1];
            const auto estimated = estimated_rewards(observed, dist);
            const auto expert_estimated = expert_rewards(advice, estimated);
            update_weights(state, expert_estimated);

            // Omniscient log: every expert scored against the full reward vector.
            const auto r = expert_rewards(advice, mu);
            for (std::size_t n = 0; n < spec.num_experts; ++n) expert_batch_totals[n] += r[n];
            realized_total += mu[static_cast<std::size_t>(action) - 1];
            in_batch += 1;
            if (in_batch == spec.restart_period) close_batch();
        }
        if (in_batch > 0) close_batch();

        double regret_sum = 0.0;
        for (const auto& b : res.batches) regret_sum += b.regret;
        res.mean_batch_regret = res.batches.empty()
                                    ? 0.0
                                    : regret_sum / static_cast<double>(res.batches.size());
        report.per_seed[si] = std::move(res);
    });

    double total = 0.0;
    std::size_t count = 0;
    for (const auto& s : report.per_seed) {
        for (const auto& b : s.batches) {
            total += b.regret;
            count += 1;
        }
    }
    report.mean_batch_regret = count > 0 ? total / static_cast<double>(count) : 0.0;
    report.within_bound = report.mean_batch_regret <= report.theoretical_batch_bound ||
                          report.spec.num_experts < 2;
    return report;
}

json BanditSimReport::to_json() const {
    json per;
    for (const auto& s : per_seed) {
        json batches;
        for (const auto& b : s.batches) {
            batches.push_back(json{{"best_expert_total", b.best_expert_total},
                                   {"realized_total", b.realized_total},
                                   {"regret", b.regret}});
        }
        per.push_back(json{{"seed", s.seed},
                           {"mean_batch_regret", s.mean_batch_regret},
                           {"batches", batches}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"spec", spec.to_json()},
                {"theoretical_batch_bound", theoretical_batch_bound},
                {"mean_batch_regret", mean_batch_regret},
                {"within_bound", within_bound},
                {"per_seed", per}};
}

StepSink make_jsonl_sink(const std::string& path, bool include_probs) {
    auto out = std::make_shared<std::ofstream>(path);
    if (!*out) throw std::runtime_error("cannot open step log for writing: " + path);
    return [out, include_probs, path](const PredictionRecord& r, bool correct,
                                      std::optional<double> batch_max) {
        json line{{"t", r.t},          {"predicted", r.predicted},
                  {"label", r.label},  {"labeled", r.labeled},
                  {"correct", correct}, {"restart_fired", r.restart_fired},
                  {"drift", r.drift_events}};
        if (include_probs) line["p"] = r.action_dist;
        if (batch_max) line["batch_max"] = *batch_max;
        if (!r.drift_stats.empty()) {
            json stats;
            for (std::size_t i = 0; i < r.drift_stats.size(); ++i) {
                const auto& d = r.drift_stats[i];
                stats.push_back(json{{"n", r.drift_events[i]},
                                     {"cut", d.cut_index},
                                     {"x_bar", d.x_bar},
                                     {"z_bar", d.z_bar},
                                     {"epsilon", d.epsilon}});
            }
            line["drift_stats"] = stats;
        }
        *out << line.dump() << '\n';
        if (!*out) throw std::runtime_error("write failure on step log at t=" +
                                            std::to_string(r.t) + ": " + path);
    };
}

void write_summary_json(const RunSummary& summary, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open summary for writing: " + path);
    out << summary.to_json().dump(2) << '\n';
    if (!out) throw std::runtime_error("write failure on summary: " + path);
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open sweep CSV for writing: " + path);
    out << "alpha,N,seed,accuracy,ultimate_bound,regret,lower_bound\n";
    char buf[256];
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof(buf), "%.6g,%zu,%llu,%.9g,%.9g,%.9g,%.9g\n", r.alpha,
                      r.num_experts, static_cast<unsigned long long>(r.seed), r.accuracy,
                      r.ultimate_bound, r.regret, r.lower_bound);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failure on sweep CSV: " + path);
}

std::string default_out_dir() {
    const char* env = std::getenv("PBOEL_OUT_DIR");
    return env && *env ? env : "out";
}

}  // namespace pboel
