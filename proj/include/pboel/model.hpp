#pragma once

#include "pboel/bandit.hpp"
#include "pboel/bounds.hpp"
#include "pboel/drift.hpp"
#include "pboel/learners.hpp"
#include "pboel/sample.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pboel {

enum class GateKind { full, random, uncertainty_margin };

// Decides whether a sample's label is revealed to the model. The evaluator
// always sees true labels regardless.
struct LabelGate {
    GateKind kind = GateKind::full;
    double rate = 1.0;    // target annotation fraction (random, uncertainty)
    double margin = 0.1;  // top-2 probability margin threshold (uncertainty)
};

LabelGate gate_from_string(const std::string& text);
std::string to_string(const LabelGate& gate);

struct DriftOptions {
    bool enabled = true;
    double delta = 1e-3;
    std::size_t window = 500;
    std::size_t min_segment = 30;
};

struct ModelConfig {
    std::size_t num_experts = 10;
    std::size_t num_classes = 2;   // K = M
    std::size_t num_features = 0;
    std::size_t restart_period = 1;  // Delta_T
    std::optional<double> alpha;     // set when restart_period = round(T^alpha)
    AdviceMode advice_mode = AdviceMode::voting;
    SelectionPrinciple principle = SelectionPrinciple::maximum_index;
    LabelGate gate;
    LearnerKind learner_kind = LearnerKind::random_feature_linear;
    RandomFeatureLinearLearner::Options rvfl;
    double nb_variance_floor = 1e-6;
    DriftOptions drift;
    std::size_t retrain_buffer_capacity = 50;
    std::uint64_t seed = 1;
};

// One row of the run log.
struct PredictionRecord {
    std::size_t t = 0;  // 1-based step index within the online phase
    int predicted = 0;
    int label = 0;
    bool labeled = false;
    std::vector<double> action_dist;
    std::vector<double> per_expert_xi_at_label;  // empty on unlabeled rounds
    std::vector<std::size_t> drift_events;       // 0-based learner indices
    std::vector<DriftStatus> drift_stats;        // cut statistics, parallel to drift_events
    bool restart_fired = false;
};

// The full online-ensemble loop: advice -> distribution -> action -> label
// gate -> rewards -> drift/update -> weight update, with restart accounting
// and the bound ledger fed on every round.
class PBOELModel {
public:
    explicit PBOELModel(ModelConfig config);

    // Rebuilds every learner on the warm samples, seeds the retrain buffer,
    // and resets weights, restart counter and monitors.
    void warm_start(const std::vector<StreamSample>& samples);

    // Test-then-update on one sample; the returned prediction is computed
    // before the sample's label touches any state.
    PredictionRecord process(const StreamSample& sample);

    const ModelConfig& config() const { return config_; }
    const EnsembleState& bandit() const { return state_; }
    BoundLedger& ledger() { return ledger_; }
    const BoundLedger& ledger() const { return ledger_; }
    const Learner& learner(std::size_t index) const { return *learners_.at(index); }
    std::size_t steps() const { return step_; }
    std::size_t labeled_steps() const { return labeled_steps_; }
    std::size_t drift_event_count() const { return drift_event_count_; }
    bool warm_started() const { return warm_started_; }

private:
    bool gate_allows(const ActionDistribution& dist);

    ModelConfig config_;
    std::vector<std::unique_ptr<Learner>> learners_;
    std::vector<DriftMonitor> monitors_;
    EnsembleState state_;
    BoundLedger ledger_;
    std::deque<StreamSample> retrain_buffer_;
    std::mt19937_64 action_rng_;
    std::mt19937_64 gate_rng_;
    std::size_t step_ = 0;
    std::size_t labeled_steps_ = 0;
    std::size_t gate_granted_ = 0;
    std::size_t drift_event_count_ = 0;
    bool warm_started_ = false;
};

// Per-seed outcome of a full stream pass.
struct SeedRunSummary {
    std::uint64_t seed = 0;
    std::size_t processed = 0;
    std::size_t labeled = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;  // against true labels, gate notwithstanding
    double macro_f1 = 0.0;
    std::size_t drift_events = 0;
    std::size_t restarts = 0;
    std::vector<double> final_weights;  // bandit weights snapshot at end of stream
    BoundReport bound;
    double wall_time_s = 0.0;
    double samples_per_s = 0.0;
};

// Receives one record per processed sample; batch_max is set on rounds where
// a ledger batch closed.
using StepSink = std::function<void(const PredictionRecord& record, bool correct,
                                    std::optional<double> batch_max)>;

// Processes every sample in order, emits records to the sink when given,
// closes the ledger, and returns the summary.
SeedRunSummary run_stream(PBOELModel& model, const std::vector<StreamSample>& stream,
                          const StepSink& sink = nullptr);

// Unweighted mean of per-class F1 over the classes present in the truth.
double macro_f1(const std::vector<int>& predicted, const std::vector<int>& labels,
                std::size_t num_classes);

}  // namespace pboel
