#include "pboel/model.hpp"

#include "pboel/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace pboel {

LabelGate gate_from_string(const std::string& text) {
    LabelGate gate;
    if (text == "full") {
        gate.kind = GateKind::full;
        return gate;
    }
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (head == "random") {
        gate.kind = GateKind::random;
        gate.rate = colon == std::string::npos ? 1.0 : std::stod(text.substr(colon + 1));
        return gate;
    }
    if (head == "uncertainty" || head == "uncertainty_margin") {
        gate.kind = GateKind::uncertainty_margin;
        if (colon != std::string::npos) {
            const std::string rest = text.substr(colon + 1);
            const auto colon2 = rest.find(':');
            gate.rate = std::stod(rest.substr(0, colon2));
            if (colon2 != std::string::npos) gate.margin = std::stod(rest.substr(colon2 + 1));
        }
        return gate;
    }
    throw std::invalid_argument("unknown gate spec: " + text);
}

std::string to_string(const LabelGate& gate) {
    switch (gate.kind) {
        case GateKind::full: return "full";
        case GateKind::random: return "random:" + std::to_string(gate.rate);
        case GateKind::uncertainty_margin:
            return "uncertainty:" + std::to_string(gate.rate) + ":" + std::to_string(gate.margin);
    }
    return "full";
}

PBOELModel::PBOELModel(ModelConfig config)
    : config_(std::move(config)),
      state_(EnsembleState::make(config_.num_classes, config_.num_experts,
                                 config_.restart_period)),
      ledger_(config_.num_experts, config_.restart_period),
      action_rng_(make_rng(config_.seed, 1)),
      gate_rng_(make_rng(config_.seed, 2)) {
    if (config_.num_experts < 1) throw std::invalid_argument("model needs at least 1 expert");
    if (config_.num_features < 1) throw std::invalid_argument("model needs feature dimension");
    if (config_.retrain_buffer_capacity < 1) {
        throw std::invalid_argument("retrain buffer capacity must be >= 1");
    }
    for (std::size_t n = 0; n < config_.num_experts; ++n) {
        learners_.push_back(make_learner(config_.learner_kind, config_.num_features,
                                         config_.num_classes, mix_seed(config_.seed, 10 + n),
                                         config_.rvfl, config_.nb_variance_floor));
        monitors_.emplace_back(config_.drift.window, config_.drift.delta,
                               config_.drift.min_segment);
    }
}

void PBOELModel::warm_start(const std::vector<StreamSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("warm start needs at least one sample");
    for (std::size_t n = 0; n < learners_.size(); ++n) {
        // Rebuild from scratch so a second warm start is equivalent to a first.
        learners_[n] = make_learner(config_.learner_kind, config_.num_features,
                                    config_.num_classes, mix_seed(config_.seed, 10 + n),
                                    config_.rvfl, config_.nb_variance_floor);
        if (auto* rvfl = dynamic_cast<RandomFeatureLinearLearner*>(learners_[n].get())) {
            rvfl->fit(samples);
        } else {
            for (const auto& s : samples) learners_[n]->update(s.features, s.label);
        }
        monitors_[n].reset();
    }
    retrain_buffer_.clear();
    const std::size_t take = std::min(config_.retrain_buffer_capacity, samples.size());
    for (std::size_t i = samples.size() - take; i < samples.size(); ++i) {
        retrain_buffer_.push_back(samples[i]);
    }
    std::fill(state_.weights.begin(), state_.weights.end(), 1.0);
    state_.restart_counter = 0;
    warm_started_ = true;
}

bool PBOELModel::gate_allows(const ActionDistribution& dist) {
    switch (config_.gate.kind) {
        case GateKind::full: return true;
        case GateKind::random: return uniform01(gate_rng_) < config_.gate.rate;
        case GateKind::uncertainty_margin: {
            // Budget: stay at or below the target fraction of rounds seen so far.
            const bool budget_ok = static_cast<double>(gate_granted_) <
                                   config_.gate.rate * static_cast<double>(step_);
            double top1 = 0.0, top2 = 0.0;
            for (double p : dist.probs) {
                if (p > top1) {
                    top2 = top1;
                    top1 = p;
                } else if (p > top2) {
                    top2 = p;
                }
            }
            return budget_ok && (top1 - top2) <= config_.gate.margin;
        }
    }
    return true;
}

PredictionRecord PBOELModel::process(const StreamSample& sample) {
    if (!warm_started_) throw std::logic_error("process called before warm_start");
    if (sample.features.size() != config_.num_features) {
        throw std::invalid_argument("sample feature dimension mismatch");
    }
    if (sample.label < 1 || static_cast<std::size_t>(sample.label) > config_.num_classes) {
        throw std::out_of_range("sample label out of range");
    }

    step_ += 1;
    PredictionRecord record;
    record.t = step_;
    record.label = sample.label;

    AdviceMatrix advice(config_.num_experts);
    for (std::size_t n = 0; n < config_.num_experts; ++n) {
        advice[n] = advice_of(*learners_[n], sample.features, config_.advice_mode);
    }
    const ActionDistribution dist = compute_action_distribution(state_, advice);
    record.action_dist = dist.probs;
    record.predicted = select_action(dist, config_.principle, action_rng_);

    record.labeled = gate_allows(dist);
    if (record.labeled) gate_granted_ += 1;

    std::vector<double> xi_column(config_.num_experts);
    if (record.labeled) {
        labeled_steps_ += 1;
        const auto realized = realized_rewards(record.predicted, sample.label,
                                               config_.num_classes);
        const auto estimated = estimated_rewards(realized, dist);

        std::optional<std::vector<std::uint8_t>> phi(std::in_place, config_.num_experts, 0);
        const std::size_t label_idx = static_cast<std::size_t>(sample.label) - 1;
        for (std::size_t n = 0; n < config_.num_experts; ++n) {
            xi_column[n] = advice[n][label_idx];
            (*phi)[n] = argmax_class(advice[n]) == sample.label ? 1 : 0;
            if (config_.drift.enabled) {
                const DriftStatus status = monitors_[n].observe(xi_column[n]);
                if (status.drift) {
                    learners_[n]->retrain(
                        std::vector<StreamSample>(retrain_buffer_.begin(), retrain_buffer_.end()));
                    monitors_[n].reset();
                    record.drift_events.push_back(n);
                    record.drift_stats.push_back(status);
                    drift_event_count_ += 1;
                    continue;
                }
            }
            learners_[n]->update(sample.features, sample.label);
        }

        const auto expert_estimated = expert_rewards(advice, estimated);
        record.restart_fired = update_weights(state_, expert_estimated);

        retrain_buffer_.push_back(sample);
        if (retrain_buffer_.size() > config_.retrain_buffer_capacity) {
            retrain_buffer_.pop_front();
        }
        record.per_expert_xi_at_label = xi_column;
        ledger_.record_round(xi_column, true, phi);
    } else {
        // No state is touched: weights, learners, monitors and the restart
        // counter stay frozen. The ledger records the label-free surrogate.
        for (std::size_t n = 0; n < config_.num_experts; ++n) {
            xi_column[n] = *std::min_element(advice[n].begin(), advice[n].end());
        }
        ledger_.record_round(xi_column, false);
    }
    return record;
}

namespace {

double macro_f1_from_counts(const std::vector<std::size_t>& tp,
                            const std::vector<std::size_t>& fp,
                            const std::vector<std::size_t>& fn) {
    double total = 0.0;
    std::size_t classes_with_support = 0;
    for (std::size_t c = 0; c < tp.size(); ++c) {
        if (tp[c] + fn[c] == 0) continue;  // class absent from the ground truth
        classes_with_support += 1;
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        total += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    return classes_with_support > 0 ? total / static_cast<double>(classes_with_support) : 0.0;
}

}  // namespace

double macro_f1(const std::vector<int>& predicted, const std::vector<int>& labels,
                std::size_t num_classes) {
    if (predicted.size() != labels.size()) {
        throw std::invalid_argument("predicted and label vectors differ in length");
    }
    std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const auto p = static_cast<std::size_t>(predicted[i]) - 1;
        const auto y = static_cast<std::size_t>(labels[i]) - 1;
        if (p >= num_classes || y >= num_classes) {
            throw std::out_of_range("class index out of range");
        }
        if (p == y) {
            tp[y] += 1;
        } else {
            fp[p] += 1;
            fn[y] += 1;
        }
    }
    return macro_f1_from_counts(tp, fp, fn);
}

SeedRunSummary run_stream(PBOELModel& model, const std::vector<StreamSample>& stream,
                          const StepSink& sink) {
    SeedRunSummary summary;
    summary.seed = model.config().seed;
    const std::size_t k = model.config().num_classes;
    std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0);

    const auto start = std::chrono::steady_clock::now();
    std::size_t batches_seen = model.ledger().closed_batch_maxima().size();
    for (const auto& sample : stream) {
        const PredictionRecord record = model.process(sample);
        const bool correct = record.predicted == sample.label;
        summary.processed += 1;
        if (correct) {
            summary.correct += 1;
            tp[static_cast<std::size_t>(sample.label) - 1] += 1;
        } else {
            fp[static_cast<std::size_t>(record.predicted) - 1] += 1;
            fn[static_cast<std::size_t>(sample.label) - 1] += 1;
        }
        if (record.labeled) summary.labeled += 1;
        if (record.restart_fired) summary.restarts += 1;
        summary.drift_events += record.drift_events.size();
        if (sink) {
            std::optional<double> batch_max;
            const auto& maxima = model.ledger().closed_batch_maxima();
            if (maxima.size() > batches_seen) {
                batch_max = maxima.back();
                batches_seen = maxima.size();
            }
            sink(record, correct, batch_max);
        }
    }
    const auto stop = std::chrono::steady_clock::now();
    summary.wall_time_s = std::chrono::duration<double>(stop - start).count();

    summary.final_weights = model.bandit().weights;
    if (summary.processed > 0) {
        summary.accuracy = static_cast<double>(summary.correct) /
                           static_cast<double>(summary.processed);
        summary.macro_f1 = macro_f1_from_counts(tp, fp, fn);
        summary.bound = model.ledger().finalize(model.config().alpha, k, summary.correct);
        summary.samples_per_s = summary.wall_time_s > 0.0
                                    ? static_cast<double>(summary.processed) / summary.wall_time_s
                                    : 0.0;
    }
    return summary;
}

}  // namespace pboel
