#include "pboel/bandit.hpp"

#include "pboel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pboel {

void validate_advice_vector(const AdviceVector& xi, std::size_t num_arms) {
    if (xi.size() != num_arms) {
        throw std::invalid_argument("advice vector has wrong number of arms");
    }
    double sum = 0.0;
    for (double v : xi) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw std::invalid_argument("advice entry outside [0,1]");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw std::invalid_argument("advice vector does not sum to 1");
    }
}

void validate_advice_matrix(const AdviceMatrix& advice, std::size_t num_experts,
                            std::size_t num_arms) {
    if (advice.size() != num_experts) {
        throw std::invalid_argument("advice matrix has wrong number of experts");
    }
    for (const auto& row : advice) validate_advice_vector(row, num_arms);
}

EnsembleState EnsembleState::make(std::size_t num_arms, std::size_t num_experts,
                                  std::size_t restart_period) {
    EnsembleState s;
    s.gamma = gamma_for(num_arms, num_experts, restart_period);
    s.weights.assign(num_experts, 1.0);
    s.num_arms = num_arms;
    s.restart_period = restart_period;
    s.restart_counter = 0;
    return s;
}

double gamma_for(std::size_t num_arms, std::size_t num_experts,
                 std::size_t restart_period) {
    if (num_arms < 2) throw std::invalid_argument("gamma_for: need at least 2 arms");
    if (restart_period < 1) throw std::invalid_argument("gamma_for: restart period must be >= 1");
    if (num_experts < 1) throw std::invalid_argument("gamma_for: need at least 1 expert");
    const double k = static_cast<double>(num_arms);
    const double log_n = std::log(static_cast<double>(num_experts));
    const double raw = std::sqrt(k * log_n /
                                 ((std::numbers::e - 1.0) * static_cast<double>(restart_period)));
    return std::min(1.0, raw);
}

ActionDistribution compute_action_distribution(const EnsembleState& state,
                                               const AdviceMatrix& advice) {
    const std::size_t n = state.num_experts();
    const std::size_t k = state.num_arms;
    validate_advice_matrix(advice, n, k);

    double weight_sum = 0.0;
    for (double w : state.weights) {
        if (!std::isfinite(w) || w <= 0.0) {
            throw std::invalid_argument("ensemble weight must be positive and finite");
        }
        weight_sum += w;
    }

    ActionDistribution dist;
    dist.gamma = state.gamma;
    dist.probs.assign(k, state.gamma / static_cast<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
        const double share = state.weights[i] / weight_sum;
        for (std::size_t j = 0; j < k; ++j) {
            dist.probs[j] += (1.0 - state.gamma) * advice[i][j] * share;
        }
    }
    return dist;
}

int select_action(const ActionDistribution& dist, SelectionPrinciple principle,
                  std::mt19937_64& rng) {
    if (dist.probs.empty()) throw std::invalid_argument("empty action distribution");
    if (principle == SelectionPrinciple::maximum_index) {
        const auto it = std::max_element(dist.probs.begin(), dist.probs.end());
        return static_cast<int>(std::distance(dist.probs.begin(), it)) + 1;
    }
    const double u = uniform01(rng);
    double cum = 0.0;
    for (std::size_t k = 0; k < dist.probs.size(); ++k) {
        cum += dist.probs[k];
        if (u < cum) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(dist.probs.size());
}

std::vector<double> realized_rewards(int action, int label, std::size_t num_arms) {
    if (action < 1 || static_cast<std::size_t>(action) > num_arms) {
        throw std::out_of_range("action index out of range");
    }
    if (label < 1 || static_cast<std::size_t>(label) > num_arms) {
        throw std::out_of_range("label index out of range");
    }
    std::vector<double> mu(num_arms, 0.0);
    if (action == label) mu[static_cast<std::size_t>(action) - 1] = 1.0;
    return mu;
}

std::vector<double> estimated_rewards(const std::vector<double>& realized,
                                      const ActionDistribution& dist) {
    if (realized.size() != dist.probs.size()) {
        throw std::invalid_argument("realized rewards and distribution size mismatch");
    }
    std::vector<double> out(realized.size(), 0.0);
    for (std::size_t k = 0; k < realized.size(); ++k) {
        if (realized[k] == 0.0) continue;
        const double p = dist.probs[k];
        if (p <= 0.0) {
            // Unreachable when gamma > 0 (exploration floor); with gamma = 0 a
            // zero-probability arm cannot have been sampled.
            throw std::logic_error("inconsistent round: realized reward on zero-probability arm");
        }
        double v = realized[k] / p;
        if (dist.gamma > 0.0) {
            v = std::min(v, static_cast<double>(realized.size()) / dist.gamma);
        }
        out[k] = v;
    }
    return out;
}

std::vector<double> expert_rewards(const AdviceMatrix& advice,
                                   const std::vector<double>& rewards) {
    std::vector<double> out(advice.size(), 0.0);
    for (std::size_t n = 0; n < advice.size(); ++n) {
        if (advice[n].size() != rewards.size()) {
            throw std::invalid_argument("advice row and reward vector size mismatch");
        }
        out[n] = std::inner_product(advice[n].begin(), advice[n].end(), rewards.begin(), 0.0);
    }
    return out;
}

bool update_weights(EnsembleState& state, const std::vector<double>& expert_estimated) {
    if (expert_estimated.size() != state.num_experts()) {
        throw std::invalid_argument("expert reward vector has wrong length");
    }
    const double scale = state.gamma / static_cast<double>(state.num_arms);
    double max_w = 0.0;
    for (std::size_t n = 0; n < state.weights.size(); ++n) {
        const double r = expert_estimated[n];
        if (!std::isfinite(r) || r < 0.0) {
            throw std::invalid_argument("estimated expert reward must be finite and non-negative");
        }
        state.weights[n] *= std::exp(scale * r);
        max_w = std::max(max_w, state.weights[n]);
    }
    if (max_w > kWeightRescaleCap) {
        for (double& w : state.weights) w /= max_w;
    }
    for (double w : state.weights) {
        if (!std::isfinite(w) || w <= 0.0) {
            throw std::overflow_error("ensemble weights left the representable range");
        }
    }

    state.restart_counter += 1;
    if (state.restart_counter >= state.restart_period) {
        std::fill(state.weights.begin(), state.weights.end(), 1.0);
        state.restart_counter = 0;
        return true;
    }
    return false;
}

}  // namespace pboel
