#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "urllc/config.hpp"
#include "urllc/fbl.hpp"
#include "urllc/frame.hpp"
#include "urllc/sinr.hpp"

namespace urllc::gp {

// One term of a posynomial: coef * prod_v x_v^{e_v}, kept in log form.
struct Monomial {
    double log_coef = 0.0;
    std::vector<std::pair<int, double>> exponents;  // (variable, power)
};

struct Posynomial {
    std::vector<Monomial> terms;
};

enum class ConstraintKind { Pair, Cue, Floor, BoxUpper, BoxLower };

// Standard-form instance: maximize the phi' variable subject to
// posynomial(x) <= 1 constraints over positive variables.
struct GPInstance {
    int n_vars = 0;
    int phi_index = 0;
    int n_pairs = 0;
    int n_cues = 0;
    std::vector<Posynomial> constraints;
    std::vector<ConstraintKind> kinds;
    std::vector<std::string> var_names;
    std::vector<double> upper;  // box upper bound per variable (phi' unbounded)
    sinr::PilotScheme scheme;
    double lambda = 0.0;  // data blocklength of the frame design
    double eps = 0.0;     // reliability target, for phi recovery
    double phi_floor = 0.0;

    int count(ConstraintKind k) const {
        int c = 0;
        for (auto kk : kinds) c += (kk == k);
        return c;
    }
};

// Evaluate a posynomial at positive variable values.
inline double eval_posynomial(const Posynomial& p, const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& m : p.terms) {
        double v = m.log_coef;
        for (auto [idx, e] : m.exponents) v += e * std::log(x[idx]);
        s += std::exp(v);
    }
    return s;
}

// Problem 2 in geometric form for one drop: an epigraph constraint per pair,
// a SINR constraint per CUE, the zero-information floor on phi', and box
// monomials per power variable. Power lower bounds use a positive floor of
// 1e-9 times the cap so every variable stays in the log domain.
inline GPInstance build_gp(const sinr::BetaTable& bt, const frame::FrameDesign& fd,
                           double theta_c_lin, double p_v_max, double psi, double eps) {
    if (bt.n == 0) throw std::invalid_argument("build_gp: drop has no V2V pairs");
    const bool sp = fd.scheme == sinr::PilotScheme::Kind::SP;
    const double tau = sp ? fd.zeta : fd.eta * fd.zeta;
    const double cap_v = sp ? 0.5 * p_v_max : p_v_max;
    const double cap_c = psi * cap_v;

    GPInstance g;
    g.n_pairs = bt.n;
    g.n_cues = bt.k;
    g.scheme = sp ? sinr::PilotScheme::sp(fd.zeta)
                  : sinr::PilotScheme::rp(fd.eta * fd.zeta, fd.zeta);
    g.lambda = fd.lambda();
    g.eps = eps;
    g.n_vars = 2 * bt.n + 2 * bt.k + 1;
    g.phi_index = g.n_vars - 1;
    auto pv = [&](int i) { return i; };
    auto qv = [&](int i) { return bt.n + i; };
    auto pc = [&](int c) { return 2 * bt.n + c; };
    auto qc = [&](int c) { return 2 * bt.n + bt.k + c; };
    g.var_names.resize(g.n_vars);
    g.upper.assign(g.n_vars, std::numeric_limits<double>::infinity());
    for (int i = 0; i < bt.n; ++i) {
        g.var_names[pv(i)] = "p_v[" + std::to_string(i) + "]";
        g.var_names[qv(i)] = "q_v[" + std::to_string(i) + "]";
        g.upper[pv(i)] = g.upper[qv(i)] = cap_v;
    }
    for (int c = 0; c < bt.k; ++c) {
        g.var_names[pc(c)] = "p_c[" + std::to_string(c) + "]";
        g.var_names[qc(c)] = "q_c[" + std::to_string(c) + "]";
        g.upper[pc(c)] = g.upper[qc(c)] = cap_c;
    }
    g.var_names[g.phi_index] = "phi_prime";

    // pair epigraph constraints phi' * Phi_i / (tau p_i q_i beta_ii^2) <= 1
    for (int i = 0; i < bt.n; ++i) {
        Posynomial po;
        double denom = tau * bt.v2v_sq(i, i);
        auto base = [&](double num) {
            Monomial m;
            m.log_coef = std::log(num / denom);
            m.exponents = {{g.phi_index, 1.0}, {pv(i), -1.0}, {qv(i), -1.0}};
            return m;
        };
        for (int j = 0; j < bt.n; ++j) {
            if (j != i) {
                Monomial m = base(bt.v2v_sq(i, j));
                m.exponents.push_back({pv(j), 1.0});
                m.exponents.push_back({qv(j), 1.0});
                po.terms.push_back(std::move(m));
            }
            if (sp) {
                Monomial m = base(bt.v2v_sq(i, j));
                m.exponents.push_back({pv(j), 2.0});
                po.terms.push_back(std::move(m));
            }
        }
        for (int c = 0; c < bt.k; ++c) {
            Monomial m = base(bt.c2v_sq(i, c));
            m.exponents.push_back({pc(c), 1.0});
            m.exponents.push_back({qc(c), 1.0});
            po.terms.push_back(std::move(m));
            if (sp) {
                Monomial m2 = base(bt.c2v_sq(i, c));
                m2.exponents.push_back({pc(c), 2.0});
                po.terms.push_back(std::move(m2));
            }
        }
        g.constraints.push_back(std::move(po));
        g.kinds.push_back(ConstraintKind::Pair);
    }

    // CUE constraints Theta_C * Phi_c / (tau p_c q_c beta_c^2) <= 1
    for (int c = 0; c < bt.k; ++c) {
        Posynomial po;
        double denom = tau * bt.c2b_sq(c);
        auto base = [&](double num) {
            Monomial m;
            m.log_coef = std::log(theta_c_lin * num / denom);
            m.exponents = {{pc(c), -1.0}, {qc(c), -1.0}};
            return m;
        };
        for (int j = 0; j < bt.n; ++j) {
            Monomial m = base(bt.v2b_sq(j));
            m.exponents.push_back({pv(j), 1.0});
            m.exponents.push_back({qv(j), 1.0});
            po.terms.push_back(std::move(m));
            if (sp) {
                Monomial m2 = base(bt.v2b_sq(j));
                m2.exponents.push_back({pv(j), 2.0});
                po.terms.push_back(std::move(m2));
            }
        }
        if (sp)
            for (int k2 = 0; k2 < bt.k; ++k2) {
                Monomial m = base(bt.c2b_sq(k2));
                m.exponents.push_back({pc(k2), 2.0});
                po.terms.push_back(std::move(m));
            }
        g.constraints.push_back(std::move(po));
        g.kinds.push_back(ConstraintKind::Cue);
    }

    // phi' floor: information must be non-negative at the optimum
    g.phi_floor = std::pow(2.0, fbl::b_coefficient(eps) / std::sqrt(g.lambda)) - 1.0;
    {
        Posynomial po;
        Monomial m;
        m.log_coef = std::log(g.phi_floor);
        m.exponents = {{g.phi_index, -1.0}};
        po.terms.push_back(std::move(m));
        g.constraints.push_back(std::move(po));
        g.kinds.push_back(ConstraintKind::Floor);
    }

    // box monomials for every power variable
    for (int v = 0; v < g.n_vars - 1; ++v) {
        Posynomial up;
        Monomial mu;
        mu.log_coef = -std::log(g.upper[v]);
        mu.exponents = {{v, 1.0}};
        up.terms.push_back(std::move(mu));
        g.constraints.push_back(std::move(up));
        g.kinds.push_back(ConstraintKind::BoxUpper);

        Posynomial lo;
        Monomial ml;
        ml.log_coef = std::log(1e-9 * g.upper[v]);
        ml.exponents = {{v, -1.0}};
        lo.terms.push_back(std::move(ml));
        g.constraints.push_back(std::move(lo));
        g.kinds.push_back(ConstraintKind::BoxLower);
    }
    return g;
}

enum class SolveStatus { Optimal, Infeasible, MaxIter };

struct AllocationResult {
    sinr::PowerAllocation alloc;
    double phi_prime = 0.0;
    double phi_bits = 0.0;
    SolveStatus status = SolveStatus::MaxIter;
    double kkt_residual = std::numeric_limits<double>::infinity();
    int newton_iters = 0;
};

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        default: return "MaxIter";
    }
}

inline void to_json(nlohmann::json& j, const AllocationResult& r) {
    j = {{"status", to_string(r.status)},     {"phi_prime", r.phi_prime},
         {"phi_bits", r.phi_bits},            {"kkt_residual", r.kkt_residual},
         {"newton_iters", r.newton_iters},    {"p_v", r.alloc.p_v},
         {"q_v", r.alloc.q_v},                {"p_c", r.alloc.p_c},
         {"q_c", r.alloc.q_c}};
}

namespace detail {

// log-sum-exp constraint data in log-variable space: rows of A and offsets b,
// g(y) = log sum exp(A y + b).
struct LseConstraint {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
};

inline LseConstraint to_lse(const Posynomial& p, int n_vars) {
    LseConstraint c;
    c.a = Eigen::MatrixXd::Zero(static_cast<int>(p.terms.size()), n_vars);
    c.b = Eigen::VectorXd::Zero(static_cast<int>(p.terms.size()));
    for (int t = 0; t < static_cast<int>(p.terms.size()); ++t) {
        c.b[t] = p.terms[t].log_coef;
        for (auto [idx, e] : p.terms[t].exponents) c.a(t, idx) += e;
    }
    return c;
}

struct LseEval {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

inline LseEval eval_lse(const LseConstraint& c, const Eigen::VectorXd& y, bool want_hess) {
    Eigen::VectorXd z = c.a * y + c.b;
    double zmax = z.maxCoeff();
    Eigen::VectorXd w = (z.array() - zmax).exp();
    double s = w.sum();
    LseEval e;
    e.value = zmax + std::log(s);
    w /= s;
    e.grad = c.a.transpose() * w;
    if (want_hess) {
        e.hess = c.a.transpose() * w.asDiagonal() * c.a - e.grad * e.grad.transpose();
    }
    return e;
}

struct BarrierProblem {
    std::vector<LseConstraint> cons;
    Eigen::VectorXd objective;  // minimize objective . y
};

struct BarrierOutcome {
    Eigen::VectorXd y;
    bool feasible_path = true;
    bool converged = true;
    int newton_iters = 0;
    double kkt_residual = 0.0;
};

// Primal log-barrier method with damped Newton steps and a backtracking line
// search that keeps every iterate strictly feasible. mu is divided by 10 each
// round starting from 1 until the m*mu gap estimate drops below gap_tol.
inline BarrierOutcome solve_barrier(const BarrierProblem& pb, Eigen::VectorXd y, double gap_tol,
                                    int max_newton = 4000) {
    const int m = static_cast<int>(pb.cons.size());
    const int n = static_cast<int>(y.size());
    BarrierOutcome out;
    for (const auto& c : pb.cons)
        if (eval_lse(c, y, false).value >= 0.0) {
            out.feasible_path = false;
            out.y = y;
            return out;
        }

    double mu = 1.0;
    double t_last = 1.0;
    int total_newton = 0;
    while (true) {
        double t = 1.0 / mu;
        t_last = t;
        for (int it = 0; it < 200; ++it) {
            Eigen::VectorXd grad = t * pb.objective;
            Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
            std::vector<double> slack(pb.cons.size());
            for (std::size_t ci = 0; ci < pb.cons.size(); ++ci) {
                LseEval e = eval_lse(pb.cons[ci], y, true);
                double s = -e.value;  // > 0
                slack[ci] = s;
                grad += e.grad / s;
                hess += e.grad * e.grad.transpose() / (s * s) + e.hess / s;
            }

            Eigen::VectorXd step;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
            if (ldlt.info() == Eigen::Success) step = ldlt.solve(-grad);
            if (ldlt.info() != Eigen::Success || !step.allFinite()) {
                double reg = 1e-12 * hess.diagonal().maxCoeff() + 1e-30;
                Eigen::MatrixXd h2 = hess + reg * Eigen::MatrixXd::Identity(n, n);
                step = h2.ldlt().solve(-grad);
            }
            double decrement = -grad.dot(step);
            ++total_newton;
            if (total_newton > max_newton) {
                out.converged = false;
                out.y = y;
                out.newton_iters = total_newton;
                return out;
            }
            // the barrier gradient scales with t, so stationarity is judged
            // relative to the level
            if (decrement * 0.5 <= 1e-20 || grad.norm() <= 1e-9 * std::max(1.0, t)) break;

            // Armijo on the merit *difference*, evaluated without subtracting
            // two near-equal large numbers: the objective part is an inner
            // product with the step, the barrier part a sum of slack
            // log-ratios.
            double alpha = 1.0;
            bool accepted = false;
            double obj_dir = pb.objective.dot(step);
            for (int ls = 0; ls < 60; ++ls) {
                Eigen::VectorXd yn = y + alpha * step;
                bool interior = true;
                double barrier_delta = 0.0;
                for (std::size_t ci = 0; ci < pb.cons.size(); ++ci) {
                    double v = eval_lse(pb.cons[ci], yn, false).value;
                    if (v >= 0.0) {
                        interior = false;
                        break;
                    }
                    barrier_delta -= std::log(-v / slack[ci]);
                }
                if (interior) {
                    double merit_delta = t * alpha * obj_dir + barrier_delta;
                    if (merit_delta <= -1e-4 * alpha * decrement) {
                        y = yn;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) break;  // stagnated at this barrier level
        }
        if (m * mu <= gap_tol) break;
        mu *= 0.1;
    }

    // stationarity residual of the final barrier subproblem
    Eigen::VectorXd grad = pb.objective;
    for (const auto& c : pb.cons) {
        LseEval e = eval_lse(c, y, false);
        grad += e.grad / (-e.value) / t_last;
    }
    out.kkt_residual = grad.norm() / std::max(1.0, pb.objective.norm());
    out.y = y;
    out.newton_iters = total_newton;
    return out;
}

// Phase-I: minimize the shared slack s with constraints g_i(x) - s <= 0,
// which stays in pure LSE form by giving s exponent -1 in every term.
inline bool phase_one(const std::vector<LseConstraint>& cons, Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    BarrierProblem pb;
    pb.objective = Eigen::VectorXd::Zero(n + 1);
    pb.objective[n] = 1.0;
    for (const auto& c : cons) {
        LseConstraint ext;
        ext.a = Eigen::MatrixXd::Zero(c.a.rows(), n + 1);
        ext.a.leftCols(n) = c.a;
        ext.a.col(n).setConstant(-1.0);
        ext.b = c.b;
        pb.cons.push_back(std::move(ext));
    }
    double smax = -std::numeric_limits<double>::infinity();
    for (const auto& c : cons) smax = std::max(smax, eval_lse(c, x, false).value);
    Eigen::VectorXd y(n + 1);
    y.head(n) = x;
    y[n] = smax + 1.0;
    auto res = solve_barrier(pb, y, 1e-6);
    if (res.y[n] < -1e-9) {
        x = res.y.head(n);
        return true;
    }
    return false;
}

}  // namespace detail

// Interior-point solve in log variables. The initial point puts every power
// at half its box bound and phi' at 0.9 times the minimum pair SINR there;
// a phase-I slack problem takes over when that point is not strictly
// feasible. tol is the barrier duality-gap target in log space, i.e. the
// relative accuracy of phi'.
inline AllocationResult solve_gp(const GPInstance& g, double tol = 1e-6) {
    const int n = g.n_vars;
    std::vector<detail::LseConstraint> cons;
    cons.reserve(g.constraints.size());
    for (const auto& p : g.constraints) cons.push_back(detail::to_lse(p, n));

    // initial point
    std::vector<double> x0(n);
    for (int v = 0; v < n - 1; ++v) x0[v] = 0.5 * g.upper[v];
    x0[g.phi_index] = 1.0;
    double min_gamma = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.constraints.size(); ++i) {
        if (g.kinds[i] != ConstraintKind::Pair) continue;
        // pair posynomial value equals phi' / Gamma_i at phi' = 1
        min_gamma = std::min(min_gamma, 1.0 / eval_posynomial(g.constraints[i], x0));
    }
    x0[g.phi_index] = std::max(0.9 * min_gamma, 1.001 * g.phi_floor);

    Eigen::VectorXd y(n);
    for (int v = 0; v < n; ++v) y[v] = std::log(x0[v]);

    bool interior = true;
    for (const auto& c : cons)
        if (detail::eval_lse(c, y, false).value >= 0.0) interior = false;
    AllocationResult res;
    if (!interior && !detail::phase_one(cons, y)) {
        res.status = SolveStatus::Infeasible;
        return res;
    }

    detail::BarrierProblem pb;
    pb.cons = cons;
    pb.objective = Eigen::VectorXd::Zero(n);
    pb.objective[g.phi_index] = -1.0;  // maximize phi'
    auto out = detail::solve_barrier(pb, y, tol);

    res.newton_iters = out.newton_iters;
    res.kkt_residual = out.kkt_residual;
    res.status = out.converged ? SolveStatus::Optimal : SolveStatus::MaxIter;
    res.alloc.p_v.resize(g.n_pairs);
    res.alloc.q_v.resize(g.n_pairs);
    res.alloc.p_c.resize(g.n_cues);
    res.alloc.q_c.resize(g.n_cues);
    for (int i = 0; i < g.n_pairs; ++i) {
        res.alloc.p_v[i] = std::exp(out.y[i]);
        res.alloc.q_v[i] = std::exp(out.y[g.n_pairs + i]);
    }
    for (int c = 0; c < g.n_cues; ++c) {
        res.alloc.p_c[c] = std::exp(out.y[2 * g.n_pairs + c]);
        res.alloc.q_c[c] = std::exp(out.y[2 * g.n_pairs + g.n_cues + c]);
    }
    res.phi_prime = std::exp(out.y[g.phi_index]);
    res.phi_bits = g.lambda * std::log2(1.0 + res.phi_prime) -
                   fbl::b_coefficient(g.eps) * std::sqrt(g.lambda);
    return res;
}

// phi' -> phi inversion for a solved instance.
inline double recover_phi(const AllocationResult& r, const frame::FrameDesign& fd, double eps) {
    double lambda = fd.lambda();
    return lambda * std::log2(1.0 + r.phi_prime) - fbl::b_coefficient(eps) * std::sqrt(lambda);
}

}  // namespace urllc::gp
