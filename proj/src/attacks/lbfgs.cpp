#include "semjpeg/attacks/lbfgs.hpp"

#include <cmath>
#include <deque>

#include "semjpeg/util/errors.hpp"

namespace semjpeg::attacks {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

} // namespace

LbfgsResult minimize_box(const Objective& objective, std::vector<double> x0,
                         const std::vector<double>& lower, const std::vector<double>& upper,
                         const LbfgsOptions& options) {
    const size_t n = x0.size();
    if (n == 0) throw ParameterError("minimize_box: empty variable vector");
    const bool bounded = !lower.empty() || !upper.empty();
    if (bounded && (lower.size() != n || upper.size() != n))
        throw ParameterError("minimize_box: bound sizes do not match x");

    auto project = [&](std::vector<double>& x) {
        if (!bounded) return;
        for (size_t i = 0; i < n; ++i) {
            if (x[i] < lower[i]) x[i] = lower[i];
            if (x[i] > upper[i]) x[i] = upper[i];
        }
    };

    project(x0);
    std::vector<double> x = std::move(x0);
    std::vector<double> grad(n), grad_new(n);
    double value = objective(x, grad);

    std::deque<Pair> history;
    std::vector<double> direction(n), x_new(n), step(n), alpha_buf;

    LbfgsResult result;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        // projected gradient: components that push against an active bound
        // carry no usable descent
        double pg_norm = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double g = grad[i];
            if (bounded) {
                if (x[i] <= lower[i] && g > 0.0) g = 0.0;
                if (x[i] >= upper[i] && g < 0.0) g = 0.0;
            }
            pg_norm = std::max(pg_norm, std::fabs(g));
        }
        if (pg_norm < options.gradient_tolerance) {
            result.converged = true;
            break;
        }

        // two-loop recursion
        direction = grad;
        alpha_buf.assign(history.size(), 0.0);
        for (size_t k = history.size(); k-- > 0;) {
            const Pair& p = history[k];
            alpha_buf[k] = p.rho * dot(p.s, direction);
            for (size_t i = 0; i < n; ++i) direction[i] -= alpha_buf[k] * p.y[i];
        }
        if (!history.empty()) {
            const Pair& last = history.back();
            const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (double& d : direction) d *= gamma;
        }
        for (size_t k = 0; k < history.size(); ++k) {
            const Pair& p = history[k];
            const double beta = p.rho * dot(p.y, direction);
            for (size_t i = 0; i < n; ++i) direction[i] += (alpha_buf[k] - beta) * p.s[i];
        }
        for (double& d : direction) d = -d;

        // projected backtracking line search with Armijo decrease; falls back
        // to steepest descent when the quasi-Newton direction stalls
        bool accepted = false;
        double value_new = value;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            const double dphi0 = dot(grad, direction);
            double t = 1.0;
            for (int ls = 0; ls < options.max_line_search; ++ls) {
                for (size_t i = 0; i < n; ++i) x_new[i] = x[i] + t * direction[i];
                project(x_new);
                for (size_t i = 0; i < n; ++i) step[i] = x_new[i] - x[i];
                const double gs = dot(grad, step);
                value_new = objective(x_new, grad_new);
                if (value_new <= value + options.sufficient_decrease * gs && gs < 0.0) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (accepted && dphi0 < 0.0) {
                // secant refinement along the ray: exact for quadratics, so
                // curvature pairs stay accurate and convergence stays fast.
                // Skipped as soon as the box projection becomes active.
                for (int refine = 0; refine < 6; ++refine) {
                    bool interior = true;
                    if (bounded) {
                        for (size_t i = 0; i < n && interior; ++i)
                            interior = x_new[i] == x[i] + t * direction[i];
                    }
                    if (!interior) break;
                    const double dphit = dot(grad_new, direction);
                    if (std::fabs(dphit) <= 1e-3 * std::fabs(dphi0)) break;  // near-exact
                    const double denom = dphi0 - dphit;  // <= 0 along convex sections
                    if (denom >= 0.0) break;
                    const double t_next = t * dphi0 / denom;
                    if (!(t_next > 0.0) || t_next > 1e4 * t ||
                        std::fabs(t_next - t) <= 1e-3 * t)
                        break;

                    std::vector<double> x_try(n);
                    for (size_t i = 0; i < n; ++i) x_try[i] = x[i] + t_next * direction[i];
                    project(x_try);
                    std::vector<double> grad_try(n);
                    const double value_try = objective(x_try, grad_try);
                    double gs_try = 0.0;
                    for (size_t i = 0; i < n; ++i) gs_try += grad[i] * (x_try[i] - x[i]);
                    if (value_try <= value + options.sufficient_decrease * gs_try &&
                        value_try < value_new) {
                        t = t_next;
                        x_new.swap(x_try);
                        grad_new.swap(grad_try);
                        value_new = value_try;
                        for (size_t i = 0; i < n; ++i) step[i] = x_new[i] - x[i];
                    } else {
                        break;
                    }
                }
            }
            if (!accepted && attempt == 0) {
                direction = grad;
                for (double& d : direction) d = -d;
                history.clear();
            }
        }
        if (!accepted) break;  // no further progress representable

        std::vector<double> y(n);
        for (size_t i = 0; i < n; ++i) y[i] = grad_new[i] - grad[i];
        const double sy = dot(step, y);
        if (sy > 1e-12) {
            history.push_back({step, std::move(y), 1.0 / sy});
            if (static_cast<int>(history.size()) > options.memory) history.pop_front();
        }

        x = x_new;
        grad = grad_new;
        value = value_new;
    }

    result.x = std::move(x);
    result.value = value;
    result.iterations = iter;
    return result;
}

} // namespace semjpeg::attacks
