#pragma once

// Independent referees used by the validation suites and the test benches:
// exhaustive searches and finite differences, deliberately avoiding the
// production solve paths.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "urllc/fbl.hpp"
#include "urllc/frame.hpp"
#include "urllc/gp.hpp"
#include "urllc/sinr.hpp"

namespace urllc::oracles {

// Max-min pair SINR over a log grid of all power variables, honoring the CUE
// constraints and box bounds. Exponential in the variable count; callers
// keep it to drops with at most 6 power variables.
struct GridResult {
    double best_min_gamma = -1.0;
    double best_min_info = -std::numeric_limits<double>::infinity();
    std::size_t evaluated = 0;
    std::size_t feasible = 0;
};

inline GridResult gp_grid_search(const sinr::BetaTable& bt, const sinr::PilotScheme& scheme,
                                 double theta_c_lin, double p_v_max, double psi, double lambda,
                                 double eps, int points_per_var = 20, double span_decades = 2.0) {
    const int nv = 2 * bt.n + 2 * bt.k;
    const double cap_v = scheme.is_rp() ? p_v_max : 0.5 * p_v_max;
    const double cap_c = psi * cap_v;
    std::vector<double> caps(nv);
    for (int i = 0; i < bt.n; ++i) caps[i] = caps[bt.n + i] = cap_v;
    for (int c = 0; c < bt.k; ++c) caps[2 * bt.n + c] = caps[2 * bt.n + bt.k + c] = cap_c;

    std::vector<std::vector<double>> grid(nv);
    for (int v = 0; v < nv; ++v) {
        grid[v].resize(points_per_var);
        for (int g = 0; g < points_per_var; ++g)
            grid[v][g] = caps[v] * std::pow(10.0, -span_decades * (points_per_var - 1 - g) /
                                                       (points_per_var - 1));
    }

    sinr::PowerAllocation alloc;
    alloc.p_v.assign(bt.n, 0.0);
    alloc.q_v.assign(bt.n, 0.0);
    alloc.p_c.assign(bt.k, 0.0);
    alloc.q_c.assign(bt.k, 0.0);
    auto set_var = [&](int v, double val) {
        if (v < bt.n) alloc.p_v[v] = val;
        else if (v < 2 * bt.n) alloc.q_v[v - bt.n] = val;
        else if (v < 2 * bt.n + bt.k) alloc.p_c[v - 2 * bt.n] = val;
        else alloc.q_c[v - 2 * bt.n - bt.k] = val;
    };

    GridResult res;
    std::vector<int> idx(nv, 0);
    while (true) {
        for (int v = 0; v < nv; ++v) set_var(v, grid[v][idx[v]]);
        res.evaluated++;
        auto gc = sinr::gamma_c_instance(bt, alloc, scheme);
        bool ok = true;
        for (double g : gc) ok = ok && g >= theta_c_lin;
        if (ok) {
            res.feasible++;
            auto gv = sinr::gamma_v_instance(bt, alloc, scheme);
            double mn = std::numeric_limits<double>::infinity();
            for (double g : gv) mn = std::min(mn, g);
            if (mn > res.best_min_gamma) res.best_min_gamma = mn;
        }
        int v = 0;
        for (; v < nv; ++v) {
            if (++idx[v] < points_per_var) break;
            idx[v] = 0;
        }
        if (v == nv) break;
    }
    if (res.best_min_gamma > 0.0)
        res.best_min_info = lambda * std::log2(1.0 + res.best_min_gamma) -
                            fbl::b_coefficient(eps) * std::sqrt(lambda);
    return res;
}

// Bisection on phi' with a phase-I feasibility solve at every level.
struct BisectionResult {
    double phi_prime = 0.0;
    double phi_bits = 0.0;
    int levels = 0;
    bool feasible = false;
};

inline BisectionResult gp_bisection(const gp::GPInstance& g, double rel_tol = 1e-4) {
    // feasibility of the instance with phi' pinned to a constant
    auto feasible_at = [&](double phi) {
        std::vector<gp::detail::LseConstraint> cons;
        for (std::size_t i = 0; i < g.constraints.size(); ++i) {
            if (g.kinds[i] == gp::ConstraintKind::Floor) continue;  // handled by the level itself
            gp::detail::LseConstraint c = gp::detail::to_lse(g.constraints[i], g.n_vars);
            // substitute the pinned phi' into the offsets, then drop the column
            c.b += c.a.col(g.phi_index) * std::log(phi);
            gp::detail::LseConstraint red;
            red.a = Eigen::MatrixXd::Zero(c.a.rows(), g.n_vars - 1);
            red.a.leftCols(g.phi_index) = c.a.leftCols(g.phi_index);
            if (g.phi_index < g.n_vars - 1)
                red.a.rightCols(g.n_vars - 1 - g.phi_index) = c.a.rightCols(g.n_vars - 1 - g.phi_index);
            red.b = c.b;
            cons.push_back(std::move(red));
        }
        Eigen::VectorXd x(g.n_vars - 1);
        for (int v = 0, w = 0; v < g.n_vars; ++v)
            if (v != g.phi_index) x[w++] = std::log(0.5 * g.upper[v]);
        return gp::detail::phase_one(cons, x);
    };

    BisectionResult out;
    double lo = g.phi_floor;
    if (!feasible_at(lo * 1.0000001)) return out;
    out.feasible = true;
    double hi = lo * 2.0 + 1.0;
    int guard = 0;
    while (feasible_at(hi) && guard++ < 60) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > rel_tol * lo) {
        double mid = 0.5 * (lo + hi);
        if (feasible_at(mid)) lo = mid; else hi = mid;
        out.levels++;
        if (out.levels > 200) break;
    }
    out.phi_prime = lo;
    out.phi_bits = g.lambda * std::log2(1.0 + lo) - fbl::b_coefficient(g.eps) * std::sqrt(g.lambda);
    return out;
}

// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct FdReport {
    double max_rel_err = 0.0;
    int points = 0;
};

// Relative agreement between analytic derivatives and central differences at
// the given points.
inline FdReport check_derivative(const std::function<double(double)>& f,
                                 const std::function<double(double)>& df,
                                 const std::vector<double>& points, double h_rel = 1e-6) {
    FdReport rep;
    for (double x : points) {
        double h = h_rel * std::max(std::abs(x), 1.0);
        double fd = central_diff(f, x, h);
        double an = df(x);
        double rel = std::abs(fd - an) / std::max(std::abs(an), 1e-12);
        rep.max_rel_err = std::max(rep.max_rel_err, rel);
        rep.points++;
    }
    return rep;
}

// Dense scan confirming the frame-size root: f crosses the threshold inside
// one grid step of the reported zeta and nowhere below it.
inline bool confirm_sp_root(double a, double b, double theta, double zeta_star, double step = 0.1) {
    double lo_end = std::max(step, zeta_star * 0.2);
    for (double z = lo_end; z < zeta_star - step; z += step)
        if (frame::f_sp(z, a, b, theta).surplus >= 0.0) return false;
    return frame::f_sp(zeta_star + step, a, b, theta).surplus >= 0.0 &&
           frame::f_sp(std::max(zeta_star - step, 1e-6), a, b, theta).surplus <= 1e-6 * theta;
}

// 2-D grid confirming that no (eta, zeta) with smaller zeta satisfies both
// the information threshold and the CUE pilot product.
inline bool confirm_rp_optimum(double a, double b, double theta, double cue_product,
                               double eta_star, double zeta_star, double eta_step = 1e-3,
                               double zeta_step = 0.5) {
    (void)eta_star;
    for (double z = std::max(zeta_step, zeta_star * 0.3); z < zeta_star - zeta_step; z += zeta_step)
        for (double e = eta_step; e < 1.0; e += eta_step) {
            if (e * z < cue_product) continue;
            if (frame::f_rp(e, z, a, b, theta).surplus >= 0.0) return false;
        }
    return true;
}

}  // namespace urllc::oracles
