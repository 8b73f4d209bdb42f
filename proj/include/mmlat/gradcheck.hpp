#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mmlat/graph.hpp"

namespace mmlat {

struct GradCheckReport {
    double h = 0.0;
    double tol = 0.0;
    // One entry per parameter tensor: the largest relative error over its
    // coordinates (relative error denominator floored at 1e-8).
    std::vector<double> max_rel_error;
    double worst = 0.0;
    bool pass = false;
};

// Builds the scalar inside a fresh graph; the supplied tensors are already
// registered as graph variables.
using ScalarFn = std::function<Tensor(Graph&, const std::vector<Tensor>&)>;

// Compares reverse-mode gradients against central differences
// (f(x+h) - f(x-h)) / 2h per coordinate.
GradCheckReport grad_check(const ScalarFn& fn, const std::vector<Tensor>& params, double h,
                           double tol);

}  // namespace mmlat
