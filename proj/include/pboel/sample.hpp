#pragma once

#include <vector>

namespace pboel {

// One stream element. Labels are 1-based class indices; generators always
// attach the true label, annotation gating happens downstream.
struct StreamSample {
    std::vector<double> features;
    int label = 0;
};

}  // namespace pboel
