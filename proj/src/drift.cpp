#include "pboel/drift.hpp"

#include <cmath>
#include <stdexcept>

namespace pboel {

DriftMonitor::DriftMonitor(std::size_t capacity, double delta, std::size_t min_segment)
    : capacity_(capacity), delta_(delta), min_segment_(min_segment) {
    if (capacity_ < 2) throw std::invalid_argument("drift window capacity must be >= 2");
    if (!(delta_ > 0.0 && delta_ < 1.0)) {
        throw std::invalid_argument("drift delta must be in (0,1)");
    }
    if (min_segment_ < 1) throw std::invalid_argument("drift min_segment must be >= 1");
    log_inv_delta_ = std::log(1.0 / delta_);
}

double DriftMonitor::epsilon_for(std::size_t n1, std::size_t n2, double delta) {
    const double fn1 = static_cast<double>(n1);
    const double fn2 = static_cast<double>(n2);
    return std::sqrt(fn2 * std::log(1.0 / delta) / (2.0 * fn1 * (fn1 + fn2)));
}

DriftStatus DriftMonitor::observe(double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::out_of_range("drift monitor value outside [0,1]");
    }
    if (window_.size() == capacity_) window_.pop_front();
    window_.push_back(value);

    DriftStatus status;
    const std::size_t n2 = window_.size();
    if (n2 < min_segment_ + 1) return status;

    double total = 0.0;
    for (double v : window_) total += v;
    const double z_bar = total / static_cast<double>(n2);

    double prefix = 0.0;
    double best_margin = 0.0;
    bool found = false;
    for (std::size_t n1 = 1; n1 < n2; ++n1) {
        prefix += window_[n1 - 1];
        if (n1 < min_segment_) continue;
        const double x_bar = prefix / static_cast<double>(n1);
        const double fn1 = static_cast<double>(n1);
        const double fn2 = static_cast<double>(n2);
        const double eps = std::sqrt(fn2 * log_inv_delta_ / (2.0 * fn1 * (fn1 + fn2)));
        const double margin = x_bar - z_bar - eps;
        if (!found || margin > best_margin) {
            found = true;
            best_margin = margin;
            status.cut_index = n1;
            status.x_bar = x_bar;
            status.z_bar = z_bar;
            status.epsilon = eps;
        }
    }
    // Best-cut statistics are reported even when stable, for diagnostics.
    status.drift = found && best_margin >= 0.0;
    return status;
}

void DriftMonitor::reset() { window_.clear(); }

}  // namespace pboel
