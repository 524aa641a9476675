#pragma once

#include <cstddef>
#include <deque>

namespace pboel {

struct DriftStatus {
    bool drift = false;
    std::size_t cut_index = 0;  // n1 of the winning cut
    double x_bar = 0.0;         // mean of the first n1 values
    double z_bar = 0.0;         // mean of the whole window
    double epsilon = 0.0;       // Hoeffding threshold at that cut
};

// Sliding-window two-mean Hoeffding test over per-round confidence values in
// [0,1]. Each observation runs an exhaustive cut search: for every admissible
// n1 it compares the early-segment mean X against the whole-window mean Z and
// reports drift when X - Z >= eps(n1, n2) at the best cut, with
//   eps = sqrt(n2 ln(1/delta) / (2 n1 (n1 + n2))),  n2 = window length.
// One-sided: only a performance drop (X > Z) can fire.
class DriftMonitor {
public:
    DriftMonitor(std::size_t capacity = 500, double delta = 1e-3,
                 std::size_t min_segment = 30);

    DriftStatus observe(double value);

    // Clears the window; capacity, delta and min_segment are retained.
    void reset();

    std::size_t size() const { return window_.size(); }
    std::size_t capacity() const { return capacity_; }
    double delta() const { return delta_; }
    std::size_t min_segment() const { return min_segment_; }

    static double epsilon_for(std::size_t n1, std::size_t n2, double delta);

private:
    std::size_t capacity_;
    double delta_;
    double log_inv_delta_;
    std::size_t min_segment_;
    std::deque<double> window_;
};

}  // namespace pboel
