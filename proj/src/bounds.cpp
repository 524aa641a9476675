#include "pboel/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pboel {

namespace {

double regret_prefactor(std::size_t num_arms, std::size_t num_experts) {
    if (num_experts < 2) throw std::invalid_argument("regret term needs at least 2 experts");
    if (num_arms < 2) throw std::invalid_argument("regret term needs at least 2 arms");
    return 2.0 * std::sqrt(std::numbers::e - 1.0) *
           std::sqrt(static_cast<double>(num_arms) * std::log(static_cast<double>(num_experts)));
}

}  // namespace

BoundLedger::BoundLedger(std::size_t num_experts, std::size_t batch_size)
    : num_experts_(num_experts), batch_size_(batch_size) {
    if (num_experts_ < 1) throw std::invalid_argument("ledger needs at least 1 expert");
    if (batch_size_ < 1) throw std::invalid_argument("ledger batch size must be >= 1");
    current_batch_sums_.assign(num_experts_, 0.0);
    horizon_sums_.assign(num_experts_, 0.0);
    per_expert_correct_.assign(num_experts_, 0);
}

void BoundLedger::record_round(const std::vector<double>& xi_column, bool labeled,
                               const std::optional<std::vector<std::uint8_t>>& phi) {
    if (xi_column.size() != num_experts_) {
        throw std::invalid_argument("xi column has wrong number of experts");
    }
    if (phi && !labeled) {
        throw std::invalid_argument("per-expert correctness is only defined on labeled rounds");
    }
    if (phi && phi->size() != num_experts_) {
        throw std::invalid_argument("phi has wrong number of experts");
    }
    for (std::size_t n = 0; n < num_experts_; ++n) {
        const double v = xi_column[n];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::out_of_range("xi column entry outside [0,1]");
        }
        current_batch_sums_[n] += v;
        horizon_sums_[n] += v;
        if (phi && (*phi)[n]) per_expert_correct_[n] += 1;
    }
    rounds_ += 1;
    if (labeled) labeled_rounds_ += 1;
    rounds_in_batch_ += 1;
    if (rounds_in_batch_ == batch_size_) close_batch();
}

void BoundLedger::close_batch() {
    closed_batch_maxima_.push_back(
        *std::max_element(current_batch_sums_.begin(), current_batch_sums_.end()));
    std::fill(current_batch_sums_.begin(), current_batch_sums_.end(), 0.0);
    rounds_in_batch_ = 0;
}

BoundReport BoundLedger::finalize(std::optional<double> alpha, std::size_t num_arms,
                                  std::size_t ensemble_correct_count) {
    if (rounds_ == 0) throw std::logic_error("cannot finalize an empty ledger");
    if (rounds_in_batch_ > 0) close_batch();

    BoundReport report;
    report.rounds = rounds_;
    report.labeled_rounds = labeled_rounds_;
    report.fully_labeled = labeled_rounds_ == rounds_;

    const double t = static_cast<double>(rounds_);
    double batch_total = 0.0;
    for (double m : closed_batch_maxima_) batch_total += m;
    report.ultimate_bound = batch_total / t;
    report.exp4_ultimate_bound =
        *std::max_element(horizon_sums_.begin(), horizon_sums_.end()) / t;

    if (alpha) {
        report.regret_rexp4 = regret_term(rounds_, *alpha, num_arms, num_experts_);
        report.constant_period = false;
    } else {
        report.regret_rexp4 = regret_term_constant(rounds_, batch_size_, num_arms, num_experts_);
        report.constant_period = true;
    }
    report.regret_exp4 = exp4_regret_term(rounds_, num_arms, num_experts_);
    report.lower_bound = report.ultimate_bound - report.regret_rexp4;

    report.per_expert_accuracy.assign(num_experts_, 0.0);
    if (labeled_rounds_ > 0) {
        for (std::size_t n = 0; n < num_experts_; ++n) {
            report.per_expert_accuracy[n] = static_cast<double>(per_expert_correct_[n]) /
                                            static_cast<double>(labeled_rounds_);
        }
    }
    report.best_base_accuracy = report.per_expert_accuracy.empty()
                                    ? 0.0
                                    : *std::max_element(report.per_expert_accuracy.begin(),
                                                        report.per_expert_accuracy.end());
    report.ensemble_accuracy = static_cast<double>(ensemble_correct_count) / t;
    return report;
}

double regret_term(std::size_t horizon, double alpha, std::size_t num_arms,
                   std::size_t num_experts) {
    if (horizon < 1) throw std::invalid_argument("regret term needs horizon >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    const double t = static_cast<double>(horizon);
    return regret_prefactor(num_arms, num_experts) *
           (std::pow(t, alpha / 2.0 - 1.0) + std::pow(t, -alpha / 2.0));
}

double regret_term_constant(std::size_t horizon, std::size_t restart_period,
                            std::size_t num_arms, std::size_t num_experts) {
    if (horizon < 1) throw std::invalid_argument("regret term needs horizon >= 1");
    if (restart_period < 1) throw std::invalid_argument("restart period must be >= 1");
    const double t = static_cast<double>(horizon);
    const double d = static_cast<double>(restart_period);
    return regret_prefactor(num_arms, num_experts) * (std::sqrt(d) / t + 1.0 / std::sqrt(d));
}

double exp4_regret_term(std::size_t horizon, std::size_t num_arms, std::size_t num_experts) {
    if (horizon < 1) throw std::invalid_argument("regret term needs horizon >= 1");
    return regret_prefactor(num_arms, num_experts) / std::sqrt(static_cast<double>(horizon));
}

double batch_regret_bound(std::size_t restart_period, std::size_t num_arms,
                          std::size_t num_experts) {
    if (restart_period < 1) throw std::invalid_argument("restart period must be >= 1");
    if (num_experts < 2) throw std::invalid_argument("bound needs at least 2 experts");
    return 2.0 * std::sqrt(std::numbers::e - 1.0) *
           std::sqrt(static_cast<double>(restart_period) * static_cast<double>(num_arms) *
                     std::log(static_cast<double>(num_experts)));
}

}  // namespace pboel
