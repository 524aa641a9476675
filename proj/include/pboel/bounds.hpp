#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace pboel {

// Bound quantities of one finished run. ultimate_bound is the time-average of
// per-batch best-expert reward sums; exp4_ultimate_bound uses the single best
// expert over the whole horizon. Regrets are the vanishing deficit terms of
// the restart policy and of plain EXP4.
struct BoundReport {
    double ultimate_bound = 0.0;
    double exp4_ultimate_bound = 0.0;
    double regret_rexp4 = 0.0;
    double regret_exp4 = 0.0;
    double lower_bound = 0.0;  // ultimate_bound - regret_rexp4
    double best_base_accuracy = 0.0;
    std::vector<double> per_expert_accuracy;
    double ensemble_accuracy = 0.0;
    bool constant_period = false;  // regret computed from a constant Delta_T
    bool fully_labeled = true;
    std::size_t rounds = 0;
    std::size_t labeled_rounds = 0;
};

// Online accumulator for the bound quantities. Feed one xi column per round:
// on labeled rounds the advice component at the true label, on unlabeled
// rounds the per-expert minimum over classes (the partial-label surrogate).
// Batches close every batch_size rounds; the final partial batch contributes
// its maximum like a full one.
class BoundLedger {
public:
    BoundLedger(std::size_t num_experts, std::size_t batch_size);

    void record_round(const std::vector<double>& xi_column, bool labeled,
                      const std::optional<std::vector<std::uint8_t>>& phi = std::nullopt);

    BoundReport finalize(std::optional<double> alpha, std::size_t num_arms,
                         std::size_t ensemble_correct_count);

    std::size_t rounds() const { return rounds_; }
    std::size_t labeled_rounds() const { return labeled_rounds_; }
    std::size_t batch_size() const { return batch_size_; }
    std::size_t num_experts() const { return num_experts_; }
    const std::vector<double>& closed_batch_maxima() const { return closed_batch_maxima_; }

private:
    void close_batch();

    std::size_t num_experts_;
    std::size_t batch_size_;
    std::size_t rounds_ = 0;
    std::size_t labeled_rounds_ = 0;
    std::size_t rounds_in_batch_ = 0;
    std::vector<double> current_batch_sums_;
    std::vector<double> horizon_sums_;
    std::vector<double> closed_batch_maxima_;
    std::vector<std::size_t> per_expert_correct_;
};

// 2 sqrt(e-1) sqrt(K ln N) (T^{alpha/2-1} + T^{-alpha/2}).
double regret_term(std::size_t horizon, double alpha, std::size_t num_arms,
                   std::size_t num_experts);

// Constant-period variant: 2 sqrt(e-1) sqrt(K ln N) (sqrt(D)/T + 1/sqrt(D));
// equal to regret_term when D = T^alpha exactly.
double regret_term_constant(std::size_t horizon, std::size_t restart_period,
                            std::size_t num_arms, std::size_t num_experts);

// Plain-EXP4 deficit 2 sqrt(e-1) sqrt(K ln N) / sqrt(T).
double exp4_regret_term(std::size_t horizon, std::size_t num_arms, std::size_t num_experts);

// Per-batch deficit bound 2 sqrt(e-1) sqrt(Delta_T K ln N) used by the
// standalone bandit simulation.
double batch_regret_bound(std::size_t restart_period, std::size_t num_arms,
                          std::size_t num_experts);

}  // namespace pboel
