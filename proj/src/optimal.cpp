#include "ftfusion/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ftfusion/nelder_mead.hpp"
#include "ftfusion/random.hpp"

namespace ftfusion {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_lambda(double lambda, bool open) {
    const bool ok = open ? (lambda > 0.0 && lambda < 1.0) : (lambda >= 0.0 && lambda <= 1.0);
    if (!ok) {
        std::ostringstream msg;
        msg << "lambda must lie in " << (open ? "(0, 1)" : "[0, 1]") << " (got " << lambda << ")";
        throw std::invalid_argument(msg.str());
    }
}

std::string describe(const Matrix& m) {
    std::ostringstream out;
    out << '[';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << (r ? "; " : "");
        for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? ", " : "") << m(r, c);
    }
    out << ']';
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Moments

MomentSet estimate_moments(const ScenarioParams& params, std::uint64_t samples) {
    params.validate();
    if (samples < 1000) throw std::invalid_argument("estimate_moments requires at least 1000 samples");

    const auto n = static_cast<std::size_t>(params.n);
    std::vector<double> xs(samples), ls(samples * n), us(samples * n);
    for (std::uint64_t t = 0; t < samples; ++t) {
        const auto trial = generate_trial(params, StreamDomain::moments, t);
        xs[t] = trial.x;
        const auto agent = trial.readings.agent(0);
        for (std::size_t i = 0; i < n; ++i) {
            ls[t * n + i] = agent[i].lo;
            us[t * n + i] = agent[i].hi;
        }
    }

    MomentSet mom;
    mom.sample_count = samples;
    const double count = static_cast<double>(samples);
    for (double x : xs) mom.mean_x += x;
    mom.mean_x /= count;
    for (double v : ls) mom.mean_l += v;
    mom.mean_l /= count * static_cast<double>(n);
    for (double v : us) mom.mean_u += v;
    mom.mean_u /= count * static_cast<double>(n);

    double sxx = 0, sll = 0, suu = 0, slu = 0, slx = 0, sux = 0;
    double cll = 0, cuu = 0, clu = 0;
    for (std::uint64_t t = 0; t < samples; ++t) {
        const double dx = xs[t] - mom.mean_x;
        sxx += dx * dx;
        double sum_l = 0, sum_u = 0, same_ll = 0, same_uu = 0, same_lu = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dl = ls[t * n + i] - mom.mean_l;
            const double du = us[t * n + i] - mom.mean_u;
            sum_l += dl;
            sum_u += du;
            same_ll += dl * dl;
            same_uu += du * du;
            same_lu += dl * du;
            slx += dl * dx;
            sux += du * dx;
        }
        sll += same_ll;
        suu += same_uu;
        slu += same_lu;
        // Ordered pairs i != i': (sum a)(sum b) - sum a_i b_i.
        cll += sum_l * sum_l - same_ll;
        cuu += sum_u * sum_u - same_uu;
        clu += sum_l * sum_u - same_lu;
    }

    const double dof = count - 1.0;
    const double nd = static_cast<double>(n);
    mom.var_x = sxx / dof;
    mom.var_l = sll / (nd * dof);
    mom.var_u = suu / (nd * dof);
    mom.cov_lu_same = slu / (nd * dof);
    mom.cov_lx = slx / (nd * dof);
    mom.cov_ux = sux / (nd * dof);
    if (n > 1) {
        const double pairs = nd * (nd - 1.0);
        mom.cov_ll = cll / (pairs * dof);
        mom.cov_uu = cuu / (pairs * dof);
        mom.cov_lu_cross = clu / (pairs * dof);
    }
    return mom;
}

DirectionMoments direction_moments(std::span<const double> x,
                                   const std::vector<std::vector<double>>& directions) {
    const std::size_t m = directions.size();
    const std::size_t count = x.size();
    if (m == 0 || count < 2) throw std::invalid_argument("direction_moments: need samples and directions");

    std::vector<std::vector<double>> standardized(m, std::vector<double>(count));
    for (std::size_t j = 0; j < m; ++j) {
        if (directions[j].size() != count) throw std::invalid_argument("direction_moments: ragged samples");
        double mean = 0.0;
        for (double v : directions[j]) mean += v;
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (double v : directions[j]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(count);
        if (!(var > 0.0)) throw std::invalid_argument("direction_moments: direction has zero variance");
        const double sd = std::sqrt(var);
        for (std::size_t t = 0; t < count; ++t) standardized[j][t] = (directions[j][t] - mean) / sd;
    }

    DirectionMoments dm{Matrix(m, m), std::vector<double>(m, 0.0)};
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t t = 0; t < count; ++t) dm.target[j] += x[t] * standardized[j][t];
        dm.target[j] /= static_cast<double>(count);
        dm.cross(j, j) = 1.0;
        for (std::size_t k = j + 1; k < m; ++k) {
            double acc = 0.0;
            for (std::size_t t = 0; t < count; ++t) acc += standardized[j][t] * standardized[k][t];
            dm.cross(j, k) = dm.cross(k, j) = acc / static_cast<double>(count);
        }
    }
    return dm;
}

// ---------------------------------------------------------------------------
// Amplitudes

AmplitudeSolution amplitude_solution(const DirectionMoments& dm, double mean_x, double lambda) {
    require_lambda(lambda, false);
    const std::size_t m = dm.agents();
    if (m == 0 || dm.cross.rows() != m || dm.cross.cols() != m)
        throw std::invalid_argument("amplitude_solution: cross matrix must be m x m");

    AmplitudeSolution sol;
    sol.a_matrix = Matrix::identity(m);
    const double off = m > 1 ? (1.0 - lambda) / static_cast<double>(m - 1) : 0.0;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
            if (j != k) sol.a_matrix(j, k) = -off * dm.cross(j, k);

    sol.theta.resize(m);
    for (std::size_t j = 0; j < m; ++j) sol.theta[j] = lambda * dm.target[j];
    sol.b.assign(m, mean_x);

    const bool zero_theta = std::all_of(sol.theta.begin(), sol.theta.end(), [](double t) { return t == 0.0; });
    if (zero_theta) {
        sol.c.assign(m, 0.0);
        sol.objective_value = 0.0;
        return sol;
    }

    auto fail = [&](const std::string& why) {
        std::ostringstream msg;
        msg << "amplitude_solution: A is singular or ill-conditioned (" << why << ") at lambda=" << lambda
            << ", cross=" << describe(dm.cross);
        return SingularMatrixError(msg.str());
    };
    try {
        const LuDecomposition lu(sol.a_matrix);
        const double cond = lu.condition_number();
        if (!(cond <= kMaxConditionNumber)) throw fail("cond=" + std::to_string(cond));
        sol.c = lu.solve(sol.theta);
    } catch (const SingularMatrixError& e) {
        if (std::string(e.what()).rfind("amplitude_solution", 0) == 0) throw;
        throw fail("zero pivot");
    }
    for (double c : sol.c) sol.objective_value += c * c;
    return sol;
}

double amplitude_objective(const DirectionMoments& dm, double mean_x, double var_x, double lambda,
                           std::span<const double> c, std::span<const double> b) {
    const std::size_t m = dm.agents();
    if (c.size() != m || b.size() != m) throw std::invalid_argument("amplitude_objective: size mismatch");
    double accuracy = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double bias = mean_x - b[j];
        accuracy += var_x + bias * bias - 2.0 * c[j] * dm.target[j] + c[j] * c[j];
    }
    double consensus = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k) {
            const double gap = b[j] - b[k];
            consensus += c[j] * c[j] + c[k] * c[k] - 2.0 * c[j] * c[k] * dm.cross(j, k) + gap * gap;
        }
    const double weight = m > 1 ? (1.0 - lambda) / static_cast<double>(m - 1) : 0.0;
    return lambda * accuracy + weight * consensus;
}

std::vector<double> amplitude_gradient(const DirectionMoments& dm, double lambda, std::span<const double> c) {
    const std::size_t m = dm.agents();
    std::vector<double> grad(m, 0.0);
    const double weight = m > 1 ? 2.0 * (1.0 - lambda) / static_cast<double>(m - 1) : 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        grad[j] = 2.0 * lambda * (c[j] - dm.target[j]);
        for (std::size_t k = 0; k < m; ++k)
            if (k != j) grad[j] += weight * (c[j] - c[k] * dm.cross(j, k));
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Two-agent linear conditions, taken as written.

std::vector<LinearCoefficients> Prop4Solution::coefficients(int n) const {
    std::vector<LinearCoefficients> out;
    for (std::size_t j = 0; j < 2; ++j)
        out.push_back(LinearCoefficients::uniform(static_cast<std::size_t>(n), eps[j], del[j], gamma[j]));
    return out;
}

std::array<double, 3> prop4_quadratic(const MomentSet& mom, int n, double eps) {
    const double nd = n, pairs = nd * (nd - 1.0);
    return {nd * mom.var_u + pairs * mom.cov_uu,
            2.0 * eps * (nd * mom.cov_lu_same + pairs * mom.cov_lu_cross),
            nd * mom.var_l + pairs * mom.cov_ll};
}

double prop4_objective(const MomentSet& mom, double lambda, int n, std::array<double, 2> eps,
                       std::array<double, 2> del, double* z_out, std::array<double, 2>* theta_out) {
    const double nd = n, pairs = nd * (nd - 1.0);
    std::array<double, 2> theta{};
    for (std::size_t j = 0; j < 2; ++j) theta[j] = nd * eps[j] * mom.cov_lx + nd * del[j] * mom.cov_ux;
    const double z = -(1.0 - lambda) *
                     (eps[0] * eps[1] * (mom.var_l + pairs * mom.cov_ll) +
                      del[0] * del[1] * (mom.var_u + pairs * mom.cov_uu) +
                      (eps[0] * del[1] + eps[1] * del[0]) * (nd * mom.cov_lu_same + pairs * mom.cov_lu_cross));
    if (z_out) *z_out = z;
    if (theta_out) *theta_out = theta;
    const double denom = 1.0 - z * z;
    if (std::abs(denom) < 1e-9) return kInf;
    const double sum = theta[0] + theta[1];
    return (theta[0] * theta[0] + theta[1] * theta[1]) / denom + 2.0 * z * sum * sum / (denom * denom);
}

namespace {

// Real roots of a*x^2 + b*x + c; an identically zero polynomial yields {0}.
std::vector<double> real_roots(double a, double b, double c) {
    if (a == 0.0) {
        if (b != 0.0) return {-c / b};
        if (c == 0.0) return {0.0};
        return {};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {};
    const double s = std::sqrt(disc);
    // Numerically stable pair.
    const double q = -0.5 * (b + (b >= 0.0 ? s : -s));
    if (q == 0.0) return {0.0};
    return {q / a, c / q};
}

struct Prop4Candidate {
    double value = kInf;
    std::array<double, 2> del{};
};

Prop4Candidate best_roots(const MomentSet& mom, double lambda, int n, std::array<double, 2> eps) {
    const auto q0 = prop4_quadratic(mom, n, eps[0]);
    const auto q1 = prop4_quadratic(mom, n, eps[1]);
    const auto r0 = real_roots(q0[0], q0[1], q0[2]);
    const auto r1 = real_roots(q1[0], q1[1], q1[2]);
    Prop4Candidate best;
    for (double d0 : r0)
        for (double d1 : r1) {
            const double v = prop4_objective(mom, lambda, n, eps, {d0, d1});
            if (v < best.value) best = {v, {d0, d1}};
        }
    return best;
}

}  // namespace

Prop4Solution solve_prop4(const MomentSet& mom, double lambda, int n, const Prop4Options& options) {
    require_lambda(lambda, true);
    if (n < 1) throw std::invalid_argument("solve_prop4: n must be positive");

    const double half_width = options.box_scale / std::sqrt(n * mom.var_l + 1e-12);
    auto objective = [&](std::span<const double> e) {
        if (std::abs(e[0]) > half_width || std::abs(e[1]) > half_width) return kInf;
        return best_roots(mom, lambda, n, {e[0], e[1]}).value;
    };

    // Feasible starting points: random draws in the box, then a grid sweep.
    RandomStream rng(options.seed);
    std::vector<std::vector<double>> starts;
    const int draws = std::max(1, options.restarts) * 50;
    for (int k = 0; k < draws && static_cast<int>(starts.size()) < options.restarts; ++k) {
        std::vector<double> e{rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width)};
        if (std::isfinite(objective(e))) starts.push_back(std::move(e));
    }
    if (starts.empty()) {
        constexpr int kGrid = 101;
        for (int a = 0; a < kGrid && starts.empty(); ++a)
            for (int b = 0; b < kGrid && starts.empty(); ++b) {
                std::vector<double> e{-half_width + 2.0 * half_width * a / (kGrid - 1),
                                      -half_width + 2.0 * half_width * b / (kGrid - 1)};
                if (std::isfinite(objective(e))) starts.push_back(std::move(e));
            }
    }
    if (starts.empty()) {
        const auto q = prop4_quadratic(mom, n, 1.0);
        const double needed = q[1] != 0.0 ? std::sqrt(std::max(0.0, 4.0 * q[0] * q[2])) / std::abs(q[1]) : kInf;
        std::ostringstream msg;
        msg << "solve_prop4: no (eps1, eps2) in the search box |eps| <= " << half_width
            << " gives real roots for the upper-endpoint quadratic; real roots need |eps| >= " << needed
            << " (xi1=" << q[0] << ", xi2/eps=" << q[1] << ", xi3=" << q[2] << ", lambda=" << lambda << ")";
        throw InfeasibleError(msg.str());
    }

    NelderMeadOptions nm;
    nm.initial_step = 0.05 * half_width;
    nm.x_tolerance = 1e-12 * half_width;
    nm.max_evaluations = 4000;
    NelderMeadResult best;
    best.value = kInf;
    for (const auto& start : starts) {
        auto run = nelder_mead(objective, start, nm);
        if (run.value < best.value) best = std::move(run);
    }

    Prop4Solution sol;
    sol.eps = {best.x[0], best.x[1]};
    sol.del = best_roots(mom, lambda, n, sol.eps).del;
    sol.objective_value = prop4_objective(mom, lambda, n, sol.eps, sol.del, &sol.z, &sol.theta);
    for (std::size_t j = 0; j < 2; ++j) {
        sol.xi[j] = prop4_quadratic(mom, n, sol.eps[j]);
        sol.gamma[j] = -n * (sol.eps[j] * mom.mean_l + sol.del[j] * mom.mean_u);
    }
    return sol;
}

double prop4_residual(const Prop4Solution& sol, const MomentSet& mom, int n) {
    double worst = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
        const auto& q = sol.xi[j];
        const double d = sol.del[j];
        const double scale = std::abs(q[0]) * d * d + std::abs(q[1] * d) + std::abs(q[2]);
        const double quad = q[0] * d * d + q[1] * d + q[2];
        worst = std::max(worst, scale > 0.0 ? std::abs(quad) / scale : std::abs(quad));

        const double expected = -n * (sol.eps[j] * mom.mean_l + sol.del[j] * mom.mean_u);
        const double gscale = n * (std::abs(sol.eps[j] * mom.mean_l) + std::abs(sol.del[j] * mom.mean_u));
        const double gerr = std::abs(sol.gamma[j] - expected);
        worst = std::max(worst, gscale > 0.0 ? gerr / gscale : gerr);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Empirical linear fit

LinearSample collect_linear_sample(const ScenarioParams& params, std::uint64_t samples, StreamDomain domain) {
    params.validate();
    LinearSample out;
    out.n = params.n;
    out.m = params.m;
    out.count = samples;
    const std::size_t dim = out.dim();
    const auto m = static_cast<std::size_t>(params.m);

    std::vector<double> raw(samples * dim);
    double total_l = 0.0, total_u = 0.0;
    for (std::uint64_t t = 0; t < samples; ++t) {
        const auto trial = generate_trial(params, domain, t);
        double* row = raw.data() + t * dim;
        row[0] = trial.x;
        for (std::size_t j = 0; j < m; ++j) {
            double sl = 0.0, su = 0.0;
            for (const auto& iv : trial.readings.agent(j)) {
                sl += iv.lo;
                su += iv.hi;
            }
            row[1 + 2 * j] = sl;
            row[2 + 2 * j] = su;
            total_l += sl;
            total_u += su;
        }
    }
    const double readings = static_cast<double>(samples) * params.n * params.m;
    out.mean_l = total_l / readings;
    out.mean_u = total_u / readings;

    out.second.assign(dim * dim, 0.0);
    std::vector<double> w(dim);
    for (std::uint64_t t = 0; t < samples; ++t) {
        const double* row = raw.data() + t * dim;
        w[0] = row[0];
        for (std::size_t j = 0; j < m; ++j) {
            w[1 + 2 * j] = row[1 + 2 * j] - params.n * out.mean_l;
            w[2 + 2 * j] = row[2 + 2 * j] - params.n * out.mean_u;
        }
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = a; b < dim; ++b) out.second[a * dim + b] += w[a] * w[b];
    }
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = a; b < dim; ++b) {
            out.second[a * dim + b] /= static_cast<double>(samples);
            out.second[b * dim + a] = out.second[a * dim + b];
        }
    return out;
}

double linear_sample_objective(const LinearSample& sample, double lambda, std::span<const double> coeffs) {
    const std::size_t dim = sample.dim();
    const auto m = static_cast<std::size_t>(sample.m);
    if (coeffs.size() != 2 * m) throw std::invalid_argument("linear_sample_objective: need 2m coefficients");

    std::vector<double> v(dim);
    auto quad = [&] {
        double acc = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            if (v[a] == 0.0) continue;
            for (std::size_t b = 0; b < dim; ++b) acc += v[a] * sample.moment(a, b) * v[b];
        }
        return acc;
    };

    double accuracy = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = 1.0;
        v[1 + 2 * j] = -coeffs[2 * j];
        v[2 + 2 * j] = -coeffs[2 * j + 1];
        accuracy += quad();
    }
    double consensus = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k) {
            std::fill(v.begin(), v.end(), 0.0);
            v[1 + 2 * j] = coeffs[2 * j];
            v[2 + 2 * j] = coeffs[2 * j + 1];
            v[1 + 2 * k] = -coeffs[2 * k];
            v[2 + 2 * k] = -coeffs[2 * k + 1];
            consensus += 2.0 * quad();  // both orders (j, k) and (k, j)
        }
    const double weight = m > 1 ? (1.0 - lambda) / static_cast<double>(m - 1) : 0.0;
    return lambda * accuracy + weight * consensus;
}

LinearCoefficients tied_linear_coefficients(int n, double eps, double del, double mean_l, double mean_u) {
    return LinearCoefficients::uniform(static_cast<std::size_t>(n), eps, del, -n * (eps * mean_l + del * mean_u));
}

LinearFit fit_linear_empirical(const LinearSample& sample, double lambda, std::uint64_t restart_seed,
                               const LinearFitOptions& options) {
    require_lambda(lambda, false);
    const std::size_t dim = 2 * static_cast<std::size_t>(sample.m);
    auto objective = [&](std::span<const double> c) { return linear_sample_objective(sample, lambda, c); };

    // Unit-variance scale for a coefficient on sum_i L_i.
    const double scale = 1.0 / std::sqrt(sample.moment(1, 1) + 1e-12);
    NelderMeadOptions nm;
    nm.initial_step = 0.1 * scale;
    nm.x_tolerance = 1e-12 * scale;
    nm.f_tolerance = 1e-15;
    nm.max_evaluations = 20000;

    auto rng = RandomStream::derived(restart_seed, StreamDomain::restarts, 0);
    NelderMeadResult best;
    best.value = kInf;
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        std::vector<double> start(dim, 0.0);
        if (r > 0)
            for (auto& s : start) s = scale * rng.normal();
        auto run = nelder_mead(objective, start, nm);
        if (run.value < best.value) best = std::move(run);
    }
    // Restarting from the best point rebuilds a fresh simplex there.
    for (int polish = 0; polish < 3; ++polish) {
        nm.initial_step = 0.01 * scale;
        auto run = nelder_mead(objective, best.x, nm);
        if (run.value <= best.value) best = std::move(run);
    }
    // Agents are exchangeable and the objective is convex, so the agent
    // average of the best point is never worse in expectation. Keeping it
    // when it ties to rounding also makes fits on agent-identical data exactly equal.
    {
        std::vector<double> avg(dim, 0.0);
        for (std::size_t j = 0; j < static_cast<std::size_t>(sample.m); ++j) {
            avg[0] += best.x[2 * j] / sample.m;
            avg[1] += best.x[2 * j + 1] / sample.m;
        }
        for (std::size_t j = 1; j < static_cast<std::size_t>(sample.m); ++j) {
            avg[2 * j] = avg[0];
            avg[2 * j + 1] = avg[1];
        }
        const double value = objective(avg);
        if (value <= best.value + 1e-12 * std::abs(best.value)) {
            best.x = std::move(avg);
            best.value = value;
        }
    }

    LinearFit fit;
    fit.coeffs = best.x;
    fit.objective = best.value;
    fit.mean_l = sample.mean_l;
    fit.mean_u = sample.mean_u;
    for (int j = 0; j < sample.m; ++j)
        fit.agents.push_back(tied_linear_coefficients(sample.n, fit.coeffs[2 * j], fit.coeffs[2 * j + 1],
                                                      sample.mean_l, sample.mean_u));
    return fit;
}

LinearFit fit_linear_empirical(const ScenarioParams& params, double lambda, std::uint64_t samples,
                               const LinearFitOptions& options) {
    require_lambda(lambda, false);
    if (samples < 10000) throw std::invalid_argument("fit_linear_empirical requires at least 10^4 samples");
    const auto sample = collect_linear_sample(params, samples, StreamDomain::fitting);
    return fit_linear_empirical(sample, lambda, params.seed, options);
}

}  // namespace ftfusion
