#pragma once

// Optimal fusion under the accuracy/consensus objective.
//
//  * amplitude_solution: for fixed zero-mean unit-variance directions, the
//    optimal amplitudes c* = A^-1 Theta^t and biases b* = E[X].
//  * solve_prop4: the closed-form conditions for the best symmetric linear
//    fuser with two agents, evaluated as written.
//  * fit_linear_empirical: direct minimization of the Monte Carlo objective
//    over the same linear class. Independent of solve_prop4.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftfusion/fusion.hpp"
#include "ftfusion/linalg.hpp"
#include "ftfusion/scenario.hpp"

namespace ftfusion {

/// Sample moments of (X, L_i, U_i) at a single agent, pooled over sensors
/// (same-sensor moments) and over ordered pairs of distinct sensors
/// (cross-sensor moments).
struct MomentSet {
    double mean_x = 0.0;
    double var_x = 0.0;
    double mean_l = 0.0;
    double mean_u = 0.0;
    double var_l = 0.0;         // Var(L1)
    double cov_ll = 0.0;        // Cov(L1, L2)
    double var_u = 0.0;         // Var(U1)
    double cov_uu = 0.0;        // Cov(U1, U2)
    double cov_lu_same = 0.0;   // Cov(L1, U1)
    double cov_lu_cross = 0.0;  // Cov(L1, U2)
    double cov_lx = 0.0;        // Cov(L1, X)
    double cov_ux = 0.0;        // Cov(U1, X)
    std::uint64_t sample_count = 0;
};

/// Throws std::invalid_argument if samples < 1000.
MomentSet estimate_moments(const ScenarioParams& params, std::uint64_t samples);

struct DirectionMoments {
    Matrix cross;                // E[f_j f_j'], unit diagonal
    std::vector<double> target;  // E[X f_j]

    std::size_t agents() const noexcept { return target.size(); }
};

/// Standardizes each direction sample column (zero mean, unit variance)
/// and returns its cross moments and its moments with x.
/// `directions[j][t]` is direction j evaluated on sample t.
DirectionMoments direction_moments(std::span<const double> x,
                                   const std::vector<std::vector<double>>& directions);

struct AmplitudeSolution {
    std::vector<double> c;
    std::vector<double> b;
    Matrix a_matrix;
    std::vector<double> theta;
    double objective_value = 0.0;  // Theta (A A^t)^-1 Theta^t
};

inline constexpr double kMaxConditionNumber = 1e10;

/// Throws SingularMatrixError when cond_1(A) exceeds kMaxConditionNumber.
/// When Theta is identically zero (lambda = 0) c = 0 is returned without
/// inverting A, which may be singular there.
AmplitudeSolution amplitude_solution(const DirectionMoments& dm, double mean_x, double lambda);

/// The objective whose stationarity conditions are the amplitude gradient
/// below: lambda * sum_j mse_j + (1-lambda)/(m-1) * sum_{j<j'} cns_jj',
/// reconstructed from moments for f_j = c_j * dir_j + b_j.
double amplitude_objective(const DirectionMoments& dm, double mean_x, double var_x, double lambda,
                           std::span<const double> c, std::span<const double> b);

/// d/dc_j of amplitude_objective:
/// 2 lambda (c_j - E[X f_j]) + 2(1-lambda)/(m-1) sum_{j'!=j} (c_j - c_j' E[f_j f_j']).
std::vector<double> amplitude_gradient(const DirectionMoments& dm, double lambda, std::span<const double> c);

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Prop4Solution {
    std::array<double, 2> eps{};
    std::array<double, 2> del{};
    std::array<double, 2> gamma{};
    std::array<std::array<double, 3>, 2> xi{};  // quadratic coefficients per agent
    std::array<double, 2> theta{};
    double z = 0.0;
    double objective_value = 0.0;

    /// Per-agent coefficients for fuse_linear with n sensors.
    std::vector<LinearCoefficients> coefficients(int n) const;
};

/// Quadratic coefficients (xi1, xi2, xi3) for the upper-endpoint weight.
std::array<double, 3> prop4_quadratic(const MomentSet& mom, int n, double eps);

/// Evaluates the two-agent objective at (eps, del); sets z and theta.
double prop4_objective(const MomentSet& mom, double lambda, int n, std::array<double, 2> eps,
                       std::array<double, 2> del, double* z_out = nullptr,
                       std::array<double, 2>* theta_out = nullptr);

struct Prop4Options {
    int restarts = 20;
    double box_scale = 1.0;      // half-width multiplier of 1/sqrt(n Var(L1) + 1e-12)
    std::uint64_t seed = 7;
};

/// Throws std::invalid_argument for lambda outside (0,1) and InfeasibleError
/// when no candidate in the search box yields real roots.
Prop4Solution solve_prop4(const MomentSet& mom, double lambda, int n, const Prop4Options& options = {});

/// Largest violation of the quadratic and bias conditions at `sol`,
/// relative to the scale of the terms involved.
double prop4_residual(const Prop4Solution& sol, const MomentSet& mom, int n);

/// Centered per-trial sums at each agent: X, sum_i L_ij, sum_i U_ij.
/// Sufficient for evaluating any symmetric linear fuser.
struct LinearSample {
    int n = 0;
    int m = 0;
    double mean_l = 0.0;          // pooled E[L]
    double mean_u = 0.0;          // pooled E[U]
    std::vector<double> second;   // (2m+1)^2 raw second moments of w = (X, SL_1 - n mean_l, SU_1 - n mean_u, ...)
    std::uint64_t count = 0;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(2 * m + 1); }
    double moment(std::size_t a, std::size_t b) const { return second[a * dim() + b]; }
};

LinearSample collect_linear_sample(const ScenarioParams& params, std::uint64_t samples, StreamDomain domain);

/// Sample objective lambda * sum_j mse_j + (1-lambda)/(m-1) * sum_{j != j'} cns_jj'
/// of the symmetric linear fuser with per-agent (eps_j, del_j) stored as
/// coeffs = (eps_1, del_1, ..., eps_m, del_m) and gamma tied to zero mean.
double linear_sample_objective(const LinearSample& sample, double lambda, std::span<const double> coeffs);

struct LinearFit {
    std::vector<double> coeffs;               // (eps_1, del_1, ..., eps_m, del_m)
    std::vector<LinearCoefficients> agents;   // ready for fuse_linear
    double objective = 0.0;                   // sample objective at coeffs
    double mean_l = 0.0;
    double mean_u = 0.0;
};

/// gamma_j = -n (eps_j E[L] + del_j E[U]).
LinearCoefficients tied_linear_coefficients(int n, double eps, double del, double mean_l, double mean_u);

struct LinearFitOptions {
    int restarts = 20;
};

/// Throws std::invalid_argument if samples < 10^4 or lambda outside [0,1].
LinearFit fit_linear_empirical(const ScenarioParams& params, double lambda, std::uint64_t samples,
                               const LinearFitOptions& options = {});

LinearFit fit_linear_empirical(const LinearSample& sample, double lambda, std::uint64_t restart_seed,
                               const LinearFitOptions& options = {});

}  // namespace ftfusion
