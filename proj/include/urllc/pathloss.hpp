#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "urllc/config.hpp"
#include "urllc/geometry.hpp"
#include "urllc/quadrature.hpp"
#include "urllc/rng.hpp"

namespace urllc::pathloss {

struct FadingModel {
    double theta;  // antenna/carrier constant
    double alpha;  // path-loss exponent, > 2

    static FadingModel from(const ScenarioConfig& c) { return {c.pathloss_const, c.pathloss_exp}; }
};

// Large-scale gain beta = theta * d^{-alpha}.
inline double beta(const FadingModel& m, double d) {
    if (!(d > 0.0)) throw std::domain_error("beta: distance must be > 0");
    return m.theta * std::pow(d, -m.alpha);
}

// Moments of inter-node distances under the uniform placement laws: N entries
// are E[d^{-2a}], P entries E[d^{+2a}]. These feed every worst-case bound.
struct OmegaTable {
    double v2v_n1 = 0.0;  // same road, interferer outside the protection region
    double v2v_n2 = 0.0;  // perpendicular road
    double v2v_n3 = 0.0;  // parallel road
    double v2v_p1 = 0.0;  // own-pair positive moment
    double c2v_n = 0.0;   // CUE (sidewalk ring) to V2V receiver
    double v2b_n = 0.0;   // V2V transmitter to BS at the origin
    double c2b_n = 0.0;   // CUE to BS
    double c2b_p = 0.0;   // CUE to BS, positive moment

    std::array<double, 8> as_array() const {
        return {v2v_n1, v2v_n2, v2v_n3, v2v_p1, c2v_n, v2b_n, c2b_n, c2b_p};
    }
    static const std::array<const char*, 8>& names() {
        static const std::array<const char*, 8> n = {"v2v_n1", "v2v_n2", "v2v_n3", "v2v_p1",
                                                     "c2v_n",  "v2b_n",  "c2b_n",  "c2b_p"};
        return n;
    }
};

inline void to_json(nlohmann::json& j, const OmegaTable& t) {
    j = nlohmann::json::object();
    auto a = t.as_array();
    for (std::size_t i = 0; i < a.size(); ++i) j[OmegaTable::names()[i]] = a[i];
}
inline void from_json(const nlohmann::json& j, OmegaTable& t) {
    j.at("v2v_n1").get_to(t.v2v_n1);
    j.at("v2v_n2").get_to(t.v2v_n2);
    j.at("v2v_n3").get_to(t.v2v_n3);
    j.at("v2v_p1").get_to(t.v2v_p1);
    j.at("c2v_n").get_to(t.c2v_n);
    j.at("v2b_n").get_to(t.v2b_n);
    j.at("c2b_n").get_to(t.c2b_n);
    j.at("c2b_p").get_to(t.c2b_p);
}

// Own-pair positive moment: either the fixed simulation separation r_V^{2a}
// or the un-normalized integral over separations up to r_V.
enum class P1Mode { FixedSeparation, IntegralBelowSeparation };

// Same-road interferer exclusion around the receiver: the full-width
// protection stretch of the road, or only the protection square itself.
enum class SameRoadExclusion { FullWidthSlab, ProtectionSquare };

struct OmegaOptions {
    P1Mode p1_mode = P1Mode::IntegralBelowSeparation;
    SameRoadExclusion same_road = SameRoadExclusion::FullWidthSlab;
    double rel_tol = 1e-4;
};

struct QuadratureError : std::runtime_error {
    double achieved;
    QuadratureError(const std::string& what, double err)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(err) + ")"),
          achieved(err) {}
};

namespace detail {

// E[g(d)] for d = distance between independent uniform points of two
// rectangles, reduced to 2-D over the coordinate differences.
template <class G>
inline double rect_pair_moment(const geometry::Rect& ra, const geometry::Rect& rb, const G& g,
                               double rel_tol, double slab_min_dx = -1.0, double square_excl = -1.0,
                               double within = -1.0) {
    quad::DiffDensity fx(ra.x0, ra.x1, rb.x0, rb.x1);
    quad::DiffDensity fy(ra.y0, ra.y1, rb.y0, rb.y1);

    auto inner = [&](double dx, double ylo_excl, double within_r) {
        auto fn = [&](double dy) { return fy(dy) * g(std::hypot(dx, dy)); };
        std::vector<double> br = fy.breakpoints();
        double lo = fy.b0, hi = fy.b3;
        if (within_r > 0.0) {
            double s = within_r * within_r - dx * dx;
            if (s <= 0.0) return 0.0;
            s = std::sqrt(s);
            lo = std::max(lo, -s);
            hi = std::min(hi, s);
            if (lo >= hi) return 0.0;
        }
        std::vector<double> use{lo};
        for (double v : br)
            if (v > lo && v < hi) use.push_back(v);
        if (ylo_excl > 0.0) {
            // integrate |dy| > ylo_excl only
            double v1 = 0.0, v2 = 0.0;
            if (-ylo_excl > lo) {
                std::vector<double> seg{lo};
                for (double v : br)
                    if (v > lo && v < -ylo_excl) seg.push_back(v);
                seg.push_back(-ylo_excl);
                v1 = quad::integrate(fn, seg, rel_tol * 0.1).value;
            }
            if (ylo_excl < hi) {
                std::vector<double> seg{ylo_excl};
                for (double v : br)
                    if (v > ylo_excl && v < hi) seg.push_back(v);
                seg.push_back(hi);
                v2 = quad::integrate(fn, seg, rel_tol * 0.1).value;
            }
            return v1 + v2;
        }
        use.push_back(hi);
        return quad::integrate(fn, use, rel_tol * 0.1).value;
    };

    double xlo = fx.b0, xhi = fx.b3;
    if (within > 0.0) {
        xlo = std::max(xlo, -within);
        xhi = std::min(xhi, within);
        if (xlo >= xhi) return 0.0;
    }
    auto outer_breaks = [&](double lo, double hi) {
        std::vector<double> out{lo};
        for (double v : fx.breakpoints())
            if (v > lo && v < hi) out.push_back(v);
        if (within > 0.0) {
            double yl = std::max(std::abs(fy.b0), std::abs(fy.b3));
            if (within > yl) {
                double kink = std::sqrt(within * within - yl * yl);
                for (double s : {-kink, kink})
                    if (s > lo && s < hi) out.push_back(s);
            }
        }
        out.push_back(hi);
        std::sort(out.begin(), out.end());
        return out;
    };

    double total = 0.0, err = 0.0;
    auto accumulate = [&](double lo, double hi, double y_excl) {
        if (lo >= hi) return;
        auto fn = [&](double dx) { return fx(dx) * inner(dx, y_excl, within); };
        auto r = quad::integrate(fn, outer_breaks(lo, hi), rel_tol);
        total += r.value;
        err += r.error;
    };

    if (slab_min_dx > 0.0) {
        accumulate(xlo, std::min(-slab_min_dx, xhi), -1.0);
        accumulate(std::max(slab_min_dx, xlo), xhi, -1.0);
    } else if (square_excl > 0.0) {
        accumulate(xlo, std::min(-square_excl, xhi), -1.0);
        accumulate(std::max(square_excl, xlo), xhi, -1.0);
        accumulate(std::max(-square_excl, xlo), std::min(square_excl, xhi), square_excl);
    } else {
        accumulate(xlo, xhi, -1.0);
    }
    if (!(err <= 10.0 * rel_tol * std::max(std::abs(total), 1e-300)))
        throw QuadratureError("rect_pair_moment did not converge", err);
    return total;
}

// E[g(|P|)] for P uniform over a rectangle, target at the origin.
template <class G>
inline double rect_origin_moment(const geometry::Rect& r, const G& g, double rel_tol) {
    double wx = 1.0 / r.width(), wy = 1.0 / r.height();
    auto outer = [&](double x) {
        auto fn = [&](double y) { return wy * g(std::hypot(x, y)); };
        std::vector<double> br{r.y0, r.y1};
        if (r.y0 < 0.0 && r.y1 > 0.0) br = {r.y0, 0.0, r.y1};
        return wx * quad::integrate(fn, br, rel_tol * 0.1).value;
    };
    std::vector<double> br{r.x0, r.x1};
    if (r.x0 < 0.0 && r.x1 > 0.0) br = {r.x0, 0.0, r.x1};
    auto res = quad::integrate(outer, br, rel_tol);
    if (!res.converged) throw QuadratureError("rect_origin_moment did not converge", res.error);
    return res.value;
}

}  // namespace detail

// Deterministic evaluation of every moment by nested adaptive quadrature over
// the uniform supports: receivers on the protection-shrunk road rectangles,
// the own-road interferer excluded around the receiver, CUEs on the sidewalk
// ring, V2V transmitters on the full road rectangle for the BS entry.
inline OmegaTable omega_quadrature(const ScenarioConfig& c, const OmegaOptions& opts = {}) {
    c.validate();
    geometry::RoadGrid grid(c);
    const double a2 = 2.0 * c.pathloss_exp;
    auto gneg = [a2](double d) { return std::pow(d, -a2); };
    auto gpos = [a2](double d) { return std::pow(d, a2); };
    const double tol = opts.rel_tol;

    geometry::Rect p1 = grid.placement(1), p2 = grid.placement(2), p3 = grid.placement(3);

    OmegaTable t;
    if (opts.same_road == SameRoadExclusion::FullWidthSlab)
        t.v2v_n1 = detail::rect_pair_moment(p1, p1, gneg, tol, c.protection_half_length);
    else
        t.v2v_n1 = detail::rect_pair_moment(p1, p1, gneg, tol, -1.0, c.protection_half_length);
    t.v2v_n2 = detail::rect_pair_moment(p1, p2, gneg, tol);
    t.v2v_n3 = detail::rect_pair_moment(p1, p3, gneg, tol);
    t.v2v_p1 = opts.p1_mode == P1Mode::FixedSeparation
                   ? std::pow(c.pair_separation, a2)
                   : detail::rect_pair_moment(p1, p1, gpos, tol, -1.0, -1.0, c.pair_separation);
    double c2v = 0.0, c2bn = 0.0, c2bp = 0.0;
    for (const auto& sw : grid.sidewalks()) {
        c2v += 0.25 * detail::rect_pair_moment(p1, sw, gneg, tol);
        c2bn += 0.25 * detail::rect_origin_moment(sw, gneg, tol);
        c2bp += 0.25 * detail::rect_origin_moment(sw, gpos, tol);
    }
    t.c2v_n = c2v;
    t.c2b_n = c2bn;
    t.c2b_p = c2bp;
    t.v2b_n = detail::rect_origin_moment(grid.road(1), gneg, tol);
    return t;
}

struct OmegaMonteCarlo {
    OmegaTable mean;
    OmegaTable stderr_;  // standard error per entry
};

namespace detail {

struct Acc {
    double s1 = 0.0, s2 = 0.0;
    void add(double v) { s1 += v; s2 += v * v; }
    void merge(const Acc& o) { s1 += o.s1; s2 += o.s2; }
    double mean(std::size_t n) const { return s1 / double(n); }
    double se(std::size_t n) const {
        double m = mean(n);
        return std::sqrt(std::max(s2 / double(n) - m * m, 0.0) / double(n));
    }
};

// Importance mixture along one axis: equal-weight blend of the uniform law
// and shrinking windows around the conditioning coordinate. Keeps the heavy
// d^{-2a} near-field variance in check.
struct AxisMixture {
    double lo, hi;
    std::array<double, 2> wlo{}, whi{};
    int windows = 0;

    AxisMixture(double lo_, double hi_, double center, double win_wide, double win_narrow = 0.0)
        : lo(lo_), hi(hi_) {
        for (double win : {win_wide, win_narrow}) {
            if (win <= 0.0) continue;
            double a = std::max(lo, center - win), b = std::min(hi, center + win);
            if (b > a) {
                wlo[windows] = a;
                whi[windows] = b;
                ++windows;
            }
        }
    }
    double draw(Rng& rng) const {
        int pick = static_cast<int>(rng.uniform_int(windows + 1));
        if (pick == 0) return rng.uniform(lo, hi);
        return rng.uniform(wlo[pick - 1], whi[pick - 1]);
    }
    // importance weight: uniform target density over [lo,hi] vs the mixture
    double weight(double v) const {
        double target = 1.0 / (hi - lo);
        double comp = 1.0 / double(windows + 1);
        double prop = comp * target;
        for (int i = 0; i < windows; ++i)
            if (v >= wlo[i] && v <= whi[i]) prop += comp / (whi[i] - wlo[i]);
        return target / prop;
    }
};

}  // namespace detail

// Sample-mean estimates of the same moments by direct position sampling,
// parallel over blocks with per-block RNG streams. Serves as the oracle for
// omega_quadrature.
inline OmegaMonteCarlo omega_montecarlo(const ScenarioConfig& c, std::size_t n, Rng& rng,
                                        const OmegaOptions& opts = {}) {
    if (n < 10000) throw std::invalid_argument("omega_montecarlo: need n >= 1e4");
    c.validate();
    geometry::RoadGrid grid(c);
    const double a2 = 2.0 * c.pathloss_exp;
    const double rp = c.protection_half_length, rv = c.pair_separation;
    const geometry::Rect p1 = grid.placement(1), p2 = grid.placement(2), p3 = grid.placement(3);
    const geometry::Rect road1 = grid.road(1);
    const auto& sws = grid.sidewalks();

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t nblocks = std::min<std::size_t>(hw * 4, std::max<std::size_t>(1, n / 100000));
    if (nblocks == 0) nblocks = 1;

    std::vector<std::array<detail::Acc, 8>> acc(nblocks);
    std::vector<std::uint64_t> seeds(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) seeds[b] = derive_seed(rng.seed(), b + 101);

    auto run_block = [&](std::size_t b) {
        Rng r(seeds[b]);
        std::size_t lo = b * n / nblocks, hi = (b + 1) * n / nblocks;
        auto& A = acc[b];
        for (std::size_t i = lo; i < hi; ++i) {
            // v2v_n1: same-road interferer with a near-window proposal along
            // the road axis
            {
                double x = r.uniform(p1.x0, p1.x1), y = r.uniform(p1.y0, p1.y1);
                detail::AxisMixture mx(p1.x0, p1.x1, x, 8.0, 2.0);
                double z = mx.draw(r), w = r.uniform(p1.y0, p1.y1);
                double wgt = mx.weight(z);
                double dx = std::abs(z - x), dy = std::abs(w - y);
                bool excluded = opts.same_road == SameRoadExclusion::FullWidthSlab
                                    ? (dx <= rp)
                                    : (dx <= rp && dy <= rp);
                A[0].add(excluded ? 0.0 : wgt * std::pow(dx * dx + dy * dy, -0.5 * a2));
            }
            // v2v_n2: perpendicular road; the variance sits in the shared
            // corner, so both near-corner coordinates get window proposals
            {
                detail::AxisMixture mx(p1.x0, p1.x1, p1.x1, 12.0, 2.0);
                detail::AxisMixture mw(p2.y0, p2.y1, p2.y0, 12.0, 2.0);
                double x = mx.draw(r), y = r.uniform(p1.y0, p1.y1);
                double z = r.uniform(p2.x0, p2.x1), w = mw.draw(r);
                double wgt = mx.weight(x) * mw.weight(w);
                A[1].add(wgt * std::pow(std::hypot(z - x, w - y), -a2));
            }
            // v2v_n3: parallel road, smooth integrand
            {
                double x = r.uniform(p1.x0, p1.x1), y = r.uniform(p1.y0, p1.y1);
                double z = r.uniform(p3.x0, p3.x1), w = r.uniform(p3.y0, p3.y1);
                A[2].add(std::pow(std::hypot(z - x, w - y), -a2));
            }
            // v2v_p1
            if (opts.p1_mode == P1Mode::FixedSeparation) {
                A[3].add(std::pow(rv, a2));
            } else {
                double x = r.uniform(p1.x0, p1.x1), y = r.uniform(p1.y0, p1.y1);
                double z = r.uniform(p1.x0, p1.x1), w = r.uniform(p1.y0, p1.y1);
                double d2 = (z - x) * (z - x) + (w - y) * (w - y);
                A[3].add(d2 <= rv * rv ? std::pow(d2, 0.5 * a2) : 0.0);
            }
            // c2v_n: CUE on the ring; windows toward the receiver on the long
            // axis and toward the facing edges on the short axes
            {
                detail::AxisMixture my(p1.y0, p1.y1, p1.y1, 3.0, 1.0);
                double x = r.uniform(p1.x0, p1.x1), y = my.draw(r);
                double wgt = my.weight(y);
                const geometry::Rect& s = sws[r.uniform_int(4)];
                bool horizontal = s.width() >= s.height();
                double z, w;
                if (horizontal) {
                    detail::AxisMixture mz(s.x0, s.x1, x, 8.0, 1.0);
                    detail::AxisMixture mw(s.y0, s.y1, s.y0, 3.0, 1.0);
                    z = mz.draw(r);
                    w = mw.draw(r);
                    wgt *= mz.weight(z) * mw.weight(w);
                } else {
                    detail::AxisMixture mw(s.y0, s.y1, y, 8.0, 1.0);
                    detail::AxisMixture mz(s.x0, s.x1, s.x1, 3.0, 1.0);
                    w = mw.draw(r);
                    z = mz.draw(r);
                    wgt *= mw.weight(w) * mz.weight(z);
                }
                A[4].add(wgt * std::pow(std::hypot(z - x, w - y), -a2));
            }
            // v2b_n: transmitter on the full road rectangle
            {
                double z = r.uniform(road1.x0, road1.x1), w = r.uniform(road1.y0, road1.y1);
                A[5].add(std::pow(std::hypot(z, w), -a2));
            }
            // c2b
            {
                const geometry::Rect& s = sws[r.uniform_int(4)];
                double z = r.uniform(s.x0, s.x1), w = r.uniform(s.y0, s.y1);
                double d = std::hypot(z, w);
                A[6].add(std::pow(d, -a2));
                A[7].add(std::pow(d, a2));
            }
        }
    };

    std::vector<std::thread> workers;
    for (std::size_t b = 0; b < nblocks; ++b) workers.emplace_back(run_block, b);
    for (auto& t : workers) t.join();

    std::array<detail::Acc, 8> total;
    for (const auto& A : acc)
        for (int k = 0; k < 8; ++k) total[k].merge(A[k]);

    OmegaMonteCarlo out;
    std::array<double, 8> m, se;
    for (int k = 0; k < 8; ++k) {
        m[k] = total[k].mean(n);
        se[k] = total[k].se(n);
    }
    out.mean = {m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7]};
    out.stderr_ = {se[0], se[1], se[2], se[3], se[4], se[5], se[6], se[7]};
    return out;
}

// Disk cache keyed by the geometry-relevant config fields and options.
inline std::uint64_t omega_cache_key(const ScenarioConfig& c, const OmegaOptions& opts) {
    std::uint64_t h = c.geometry_hash();
    h = splitmix64(h ^ (static_cast<std::uint64_t>(opts.p1_mode) << 1));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(opts.same_road) << 5));
    return h;
}

inline OmegaTable omega_cached(const ScenarioConfig& c, const OmegaOptions& opts = {},
                               const std::string& cache_dir = "") {
    if (cache_dir.empty()) return omega_quadrature(c, opts);
    std::ostringstream name;
    name << cache_dir << "/omega_" << std::hex << omega_cache_key(c, opts) << ".json";
    {
        std::ifstream in(name.str());
        if (in) {
            nlohmann::json j;
            in >> j;
            return j.get<OmegaTable>();
        }
    }
    OmegaTable t = omega_quadrature(c, opts);
    std::ofstream out(name.str());
    if (out) {
        nlohmann::json j = t;
        out << j.dump(2) << "\n";
    }
    return t;
}

}  // namespace urllc::pathloss
