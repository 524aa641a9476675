#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace pboel {

// Advice vector of one expert: K confidences on the probability simplex.
// The voting mechanism produces a one-hot vector; confidence mode passes the
// base classifier's posterior through unchanged.
using AdviceVector = std::vector<double>;

// One row per expert, each row an AdviceVector of length K.
using AdviceMatrix = std::vector<AdviceVector>;

inline constexpr double kSimplexTolerance = 1e-9;

// Weight cap before a common rescale-by-maximum is applied; the action
// distribution is invariant to common positive rescaling of all weights.
inline constexpr double kWeightRescaleCap = 1e100;

void validate_advice_vector(const AdviceVector& xi, std::size_t num_arms);
void validate_advice_matrix(const AdviceMatrix& advice, std::size_t num_experts,
                            std::size_t num_arms);

// State of the exponential-weights ensemble policy (EXP4 with periodic restart).
struct EnsembleState {
    std::vector<double> weights;      // w_n, strictly positive
    double gamma = 0.0;               // exploration rate in [0, 1]
    std::size_t num_arms = 0;         // K
    std::size_t restart_period = 0;   // Delta_T
    std::size_t restart_counter = 0;  // tau

    std::size_t num_experts() const { return weights.size(); }

    // Weights all 1, tau = 0, gamma from the restart schedule.
    static EnsembleState make(std::size_t num_arms, std::size_t num_experts,
                              std::size_t restart_period);
};

struct ActionDistribution {
    std::vector<double> probs;  // p_k, sums to 1, every entry >= gamma/K
    double gamma = 0.0;         // exploration rate used to build it
};

enum class SelectionPrinciple { random_sampling, maximum_index };

// Everything observed and derived in one bandit round. Arm/class indices are
// 1-based throughout (matching stream labels).
struct RoundOutcome {
    int action = 0;                          // a_t in 1..K
    std::vector<double> realized;            // mu_t^k, 0/1 with at most one 1
    std::vector<double> estimated;           // mu_hat_t^k, importance-weighted
    std::vector<double> expert_rewards;      // r_n(t)
    std::vector<double> expert_estimated;    // r_hat_n(t)
    bool restart_fired = false;
};

// gamma = min{1, sqrt(K ln N / [(e-1) Delta_T])}; 0 when N = 1.
double gamma_for(std::size_t num_arms, std::size_t num_experts,
                 std::size_t restart_period);

// p_k = (1-gamma) sum_n xi_n^k w_n / sum_m w_m + gamma/K.
ActionDistribution compute_action_distribution(const EnsembleState& state,
                                               const AdviceMatrix& advice);

// random_sampling: inverse-CDF draw from probs. maximum_index: smallest arm
// attaining the maximum probability. Returns 1-based arm index.
int select_action(const ActionDistribution& dist, SelectionPrinciple principle,
                  std::mt19937_64& rng);

// Entry k is 1 iff action == k == label.
std::vector<double> realized_rewards(int action, int label, std::size_t num_arms);

// mu_hat_k = mu_k / p_k where mu_k > 0, else 0; capped at K/gamma.
std::vector<double> estimated_rewards(const std::vector<double>& realized,
                                      const ActionDistribution& dist);

// Entry n is sum_k xi_n^k * rewards[k]; works for realized and estimated rewards.
std::vector<double> expert_rewards(const AdviceMatrix& advice,
                                   const std::vector<double>& rewards);

// w_n <- w_n exp(gamma r_hat_n / K), then restart accounting: tau advances and
// on reaching the period all weights reset to 1 and tau returns to 0, so a
// restart fires exactly every restart_period calls. Returns whether it fired.
bool update_weights(EnsembleState& state, const std::vector<double>& expert_estimated);

}  // namespace pboel
