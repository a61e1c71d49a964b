#pragma once

#include <functional>
#include <vector>

namespace semjpeg::attacks {

// Objective callback: returns f(x) and fills grad (same length as x).
using Objective = std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 100;
    double gradient_tolerance = 1e-9;   // inf-norm of the projected gradient
    double sufficient_decrease = 1e-4;  // Armijo constant
    int max_line_search = 40;
};

struct LbfgsResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Box-constrained quasi-Newton minimizer: two-loop L-BFGS directions with
// projected backtracking line search. Every iterate satisfies
// lower[i] <= x[i] <= upper[i]. Empty bound vectors mean unconstrained.
LbfgsResult minimize_box(const Objective& objective, std::vector<double> x0,
                         const std::vector<double>& lower, const std::vector<double>& upper,
                         const LbfgsOptions& options = {});

} // namespace semjpeg::attacks
