#pragma once

#include "pboel/model.hpp"
#include "pboel/streams.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pboel {

inline constexpr int kSchemaVersion = 1;

StreamSpec stream_spec_from_json(const nlohmann::json& j);

// Full description of one experiment (one stream, one model family, many seeds).
struct RunConfig {
    StreamSpec stream;
    std::size_t warm_count = 200;
    std::size_t num_experts = 10;
    std::optional<double> alpha = 0.7;                 // Delta_T = round(T^alpha)
    std::optional<std::size_t> restart_period_const;   // constant Delta_T alternative
    AdviceMode advice_mode = AdviceMode::voting;
    SelectionPrinciple principle = SelectionPrinciple::maximum_index;
    LabelGate gate;
    LearnerKind learner_kind = LearnerKind::random_feature_linear;
    RandomFeatureLinearLearner::Options rvfl;
    double nb_variance_floor = 1e-6;
    DriftOptions drift;
    std::size_t retrain_buffer = 50;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::size_t workers = 0;  // 0 = auto
    std::string out_dir;
    bool log_steps = false;
    bool log_probs = false;

    void validate() const;  // throws std::invalid_argument with field paths
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct RunAggregate {
    double accuracy_mean = 0.0, accuracy_std = 0.0;
    double macro_f1_mean = 0.0, macro_f1_std = 0.0;
    double ultimate_bound_mean = 0.0, ultimate_bound_std = 0.0;
    double exp4_ultimate_bound_mean = 0.0;
    double regret_rexp4 = 0.0;
    double regret_exp4 = 0.0;
    double lower_bound_mean = 0.0;
    double best_base_accuracy_mean = 0.0;
    double drift_events_mean = 0.0;
};

struct RunSummary {
    RunConfig config;
    std::string config_digest;
    std::vector<SeedRunSummary> per_seed;
    RunAggregate aggregate;

    nlohmann::json to_json() const;
};

// Executes the experiment for every seed (in parallel up to config.workers),
// asserts the exact per-run bound inequalities, and aggregates.
RunSummary run(const RunConfig& config);

struct SweepRow {
    double alpha = 0.0;
    std::size_t num_experts = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double ultimate_bound = 0.0;
    double regret = 0.0;
    double lower_bound = 0.0;
};

struct SweepResult {
    std::vector<RunSummary> cells;  // alphas x ns, alpha-major order
    std::vector<SweepRow> rows;
};

SweepResult sweep(const RunConfig& base, const std::vector<double>& alphas,
                  const std::vector<std::size_t>& ns);

// Standalone bandit simulation: the policy plays against a synthetic reward
// process with declared expert advice; per-batch best-expert totals are
// recomputed exactly from the logged reward vectors.
struct BanditSimSpec {
    std::size_t num_arms = 3;
    std::size_t num_experts = 10;
    std::size_t horizon = 10000;
    std::size_t restart_period = 1000;
    // Row n: distribution over arms from which expert n's one-hot advice is
    // drawn each round. Empty = one strong expert on the best arm, rest uniform.
    std::vector<std::vector<double>> expert_profile;
    struct Segment {
        std::size_t length = 0;
        std::vector<double> means;  // per-arm Bernoulli means
    };
    std::vector<Segment> reward_segments;  // empty = {horizon, default means}
    std::vector<std::uint64_t> seeds;

    void validate() const;
    static BanditSimSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct BanditSimBatch {
    double best_expert_total = 0.0;  // G_max over the batch
    double realized_total = 0.0;
    double regret = 0.0;
};

struct BanditSimSeedResult {
    std::uint64_t seed = 0;
    std::vector<BanditSimBatch> batches;
    double mean_batch_regret = 0.0;
};

struct BanditSimReport {
    BanditSimSpec spec;
    double theoretical_batch_bound = 0.0;
    std::vector<BanditSimSeedResult> per_seed;
    double mean_batch_regret = 0.0;  // grand mean over all batches, all seeds
    bool within_bound = false;

    nlohmann::json to_json() const;
};

BanditSimReport bandit_sim(const BanditSimSpec& spec);

// Throws std::runtime_error naming the violated inequality and the seed.
void verify_bound_inequalities(const BoundReport& report, AdviceMode mode, std::uint64_t seed);

// Logging helpers. The sink serializes one JSONL line per processed sample.
StepSink make_jsonl_sink(const std::string& path, bool include_probs);
void write_summary_json(const RunSummary& summary, const std::string& path);
void write_sweep_csv(const SweepResult& result, const std::string& path);

// Default output directory: $PBOEL_OUT_DIR or "out".
std::string default_out_dir();

}  // namespace pboel
