#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ftfusion {

struct NelderMeadOptions {
    double initial_step = 0.1;   // simplex edge length around the start point
    double x_tolerance = 1e-10;  // stop when the simplex diameter falls below this
    double f_tolerance = 1e-14;  // ... and the spread of values below this (relative)
    int max_evaluations = 20000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex minimizer. Non-finite objective values are treated as
/// +infinity, so infeasible regions can be signalled by returning inf.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace ftfusion
