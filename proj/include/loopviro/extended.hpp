#ifndef LOOPVIRO_EXTENDED_HPP
#define LOOPVIRO_EXTENDED_HPP

#include "loopviro/double_loop.hpp"
#include "loopviro/harmonic.hpp"
#include "loopviro/rational.hpp"

#include <string>

namespace loopviro {

/// E_lambda(z): one Laurent loop per grid node, trusted on cfg.full().  Nodes
/// where a construction failed (e.g. a flow left the big cell) hold nullopt.
struct ExtendedSolution {
    GridDomain grid;
    AnnulusConfig cfg;
    std::vector<std::optional<LaurentLoop>> loops;
    std::string variant;  // how the solution was produced

    bool has(int ix, int iy) const { return loops[grid.index(ix, iy)].has_value(); }
    const LaurentLoop& at(int ix, int iy) const { return *loops[grid.index(ix, iy)]; }
    const LaurentLoop& base() const { return *loops[grid.base_index()]; }
    int dim() const { return base().dim(); }
    std::size_t excluded() const {
        return static_cast<std::size_t>(std::count(loops.begin(), loops.end(), std::nullopt));
    }

    static ExtendedSolution identity(const GridDomain& g, const AnnulusConfig& cfg, int n) {
        return {g, cfg, std::vector<std::optional<LaurentLoop>>(g.size(), LaurentLoop::identity(n, cfg.full())),
                "identity"};
    }
};

// ---------------------------------------------------------------------------
// Uniton solutions
// ---------------------------------------------------------------------------

/// Orthogonal projection onto the line spanned by (1, w).
inline Mat line_projection(cplx w) {
    Mat v(2, 1);
    v << 1.0, w;
    return v * v.adjoint() / (1.0 + std::norm(w));
}

/// d/dz of line_projection(f(z)) for holomorphic f, given f and f'.
inline Mat line_projection_dz(cplx w, cplx dw) {
    Mat v(2, 1), dv(2, 1);
    v << 1.0, w;
    dv << 0.0, dw;
    const double n2 = 1.0 + std::norm(w);
    const cplx vdv = (v.adjoint() * dv)(0, 0);
    return dv * v.adjoint() / n2 - v * v.adjoint() * (vdv / (n2 * n2));
}

enum class UnitonVariant { lambda, inverse_lambda };

inline std::string to_string(UnitonVariant v) {
    return v == UnitonVariant::lambda ? "pi+lambda*pi_perp" : "pi+lambda^-1*pi_perp";
}

namespace detail {

/// Left-normalized G_lambda(p)^{-1} G_lambda(z) for G = pi + lambda^{+-1} pi_perp.
inline LaurentLoop uniton_loop(const Mat& pi_p, const Mat& pi_z, UnitonVariant variant, Annulus annulus) {
    const Mat I = identity(2);
    const Mat pp = I - pi_p, pz = I - pi_z;
    LaurentLoop L(2, 1, annulus);
    L.coeff(0) = pi_p * pi_z + pp * pz;
    if (variant == UnitonVariant::lambda) {
        L.coeff(-1) = pp * pi_z;
        L.coeff(1) = pi_p * pz;
    } else {
        L.coeff(-1) = pi_p * pz;
        L.coeff(1) = pp * pi_z;
    }
    return L;
}

inline std::vector<Mat> projections_on_grid(const Rational& f, const GridDomain& g) {
    std::vector<Mat> pi(g.size());
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) pi[g.index(ix, iy)] = line_projection(f(g.z(ix, iy)));
    return pi;
}

}  // namespace detail

/// Uniton extended solution for the 2x2 projection onto span(1, f(z)), one variant.
inline ExtendedSolution uniton_extended(const Rational& f, const GridDomain& g, const AnnulusConfig& cfg,
                                        UnitonVariant variant) {
    cfg.validate();
    const auto pi = detail::projections_on_grid(f, g);
    const Mat& pi_p = pi[g.base_index()];
    ExtendedSolution E{g, cfg, std::vector<std::optional<LaurentLoop>>(g.size()), to_string(variant)};
    for (std::size_t k = 0; k < g.size(); ++k) E.loops[k] = detail::uniton_loop(pi_p, pi[k], variant, cfg.full());
    return E;
}

/// Maurer-Cartan pair of s = 2 pi - I in closed form:
/// A = s^{-1} s_z = 2 (2 pi - I) pi_z and B = -A^*.
inline MaurerCartanPair uniton_maurer_cartan(const Rational& f, const GridDomain& g) {
    MaurerCartanPair mc{g, std::vector<Mat>(g.size()), std::vector<Mat>(g.size())};
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const cplx z = g.z(ix, iy);
            const cplx w = f(z);
            const Mat pi = line_projection(w);
            const Mat A = 2.0 * (2.0 * pi - identity(2)) * line_projection_dz(w, f.derivative(z));
            mc.A[g.index(ix, iy)] = A;
            mc.B[g.index(ix, iy)] = -A.adjoint();
        }
    return mc;
}

/// s = 2 pi - I sampled on the grid.
inline HarmonicMapGrid uniton_map(const Rational& f, const GridDomain& g) {
    HarmonicMapGrid s{g, detail::projections_on_grid(f, g)};
    for (auto& m : s.values) m = 2.0 * m - identity(2);
    return s;
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

struct ResidualOptions {
    int fd_order = 2;         // 2 or 4: central-difference order for z-derivatives
    std::size_t probes = 16;  // lambda probes per circle for the constancy check
    std::size_t hmrc_samples = 64;
};

namespace detail {

inline std::vector<cplx> constancy_probes(const AnnulusConfig& cfg, std::size_t per_circle) {
    auto a = circle_points(cfg.eps, per_circle);
    const auto b = circle_points(1.0 / cfg.eps, per_circle);
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

/// Central difference along one axis; returns nullopt when the stencil leaves
/// the grid or touches an excluded node.
template <class Get>
std::optional<Mat> central(const GridDomain& g, int ix, int iy, Axis axis, int order, Get&& get) {
    auto at = [&](int d) -> std::optional<Mat> {
        const int jx = axis == Axis::x ? ix + d : ix;
        const int jy = axis == Axis::y ? iy + d : iy;
        if (jx < 0 || jy < 0 || jx >= g.nx() || jy >= g.ny()) return std::nullopt;
        return get(jx, jy);
    };
    const auto p1 = at(1), m1 = at(-1);
    if (!p1 || !m1) return std::nullopt;
    if (order == 2) return Mat((*p1 - *m1) / (2.0 * g.h));
    const auto p2 = at(2), m2 = at(-2);
    if (!p2 || !m2) return std::nullopt;
    return Mat((-*p2 + 8.0 * *p1 - 8.0 * *m1 + *m2) / (12.0 * g.h));
}

}  // namespace detail

/// Per node and probe lambda: the pair  E^{-1} E_z / (1 - 1/lambda)  and
/// E^{-1} E_zbar / (1 - lambda), each minus its mean over the probes.  Both
/// are constant in lambda for an extended solution.  Nodes whose stencil is
/// incomplete get an empty entry.
struct ConstancyDeviation {
    std::vector<cplx> lambdas;
    std::vector<std::vector<Mat>> dz;     // [node][probe]
    std::vector<std::vector<Mat>> dzbar;  // [node][probe]

    /// max over nodes and probes of the larger deviation; per node in `field`.
    double max(ScalarField* field = nullptr) const {
        double worst = 0.0;
        for (std::size_t k = 0; k < dz.size(); ++k) {
            double node = 0.0;
            for (std::size_t j = 0; j < dz[k].size(); ++j)
                node = std::max({node, max_abs(dz[k][j]), max_abs(dzbar[k][j])});
            if (field) field->values[k] = node;
            worst = std::max(worst, node);
        }
        return worst;
    }
};

inline ConstancyDeviation constancy_deviation(const ExtendedSolution& E, const ResidualOptions& opt = {}) {
    if (opt.fd_order != 2 && opt.fd_order != 4) throw InvalidArgument("fd_order must be 2 or 4");
    const auto& g = E.grid;
    ConstancyDeviation out{detail::constancy_probes(E.cfg, opt.probes), {}, {}};
    const std::size_t P = out.lambdas.size();
    out.dz.assign(g.size(), {});
    out.dzbar.assign(g.size(), {});

    // Values of every loop at every probe, computed once.
    std::vector<std::vector<Mat>> vals(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!E.loops[k]) continue;
        vals[k].reserve(P);
        for (cplx l : out.lambdas) vals[k].push_back(E.loops[k]->eval_unchecked(l));
    }

    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const auto k = g.index(ix, iy);
            if (vals[k].empty()) continue;
            std::vector<Mat> xz(P), xzb(P);
            bool complete = true;
            for (std::size_t j = 0; j < P && complete; ++j) {
                auto get = [&](int a, int b) -> std::optional<Mat> {
                    const auto& v = vals[g.index(a, b)];
                    if (v.empty()) return std::nullopt;
                    return v[j];
                };
                const auto ex = detail::central(g, ix, iy, detail::Axis::x, opt.fd_order, get);
                const auto ey = detail::central(g, ix, iy, detail::Axis::y, opt.fd_order, get);
                if (!ex || !ey) {
                    complete = false;
                    break;
                }
                const cplx l = out.lambdas[j];
                const Mat Einv = vals[k][j].inverse();
                xz[j] = Einv * (0.5 * (*ex - I_unit * *ey)) / (1.0 - 1.0 / l);
                xzb[j] = Einv * (0.5 * (*ex + I_unit * *ey)) / (1.0 - l);
            }
            if (!complete) continue;
            Mat mz = zeros(E.dim()), mzb = zeros(E.dim());
            for (std::size_t j = 0; j < P; ++j) {
                mz += xz[j];
                mzb += xzb[j];
            }
            mz /= static_cast<double>(P);
            mzb /= static_cast<double>(P);
            for (std::size_t j = 0; j < P; ++j) {
                xz[j] -= mz;
                xzb[j] -= mzb;
            }
            out.dz[k] = std::move(xz);
            out.dzbar[k] = std::move(xzb);
        }
    return out;
}

struct ExtendedResiduals {
    double lambda_constancy = 0.0;  // deviation of the Maurer-Cartan quotients from their lambda-mean
    double e1 = 0.0;                // max |E_1 - I|
    double basepoint = 0.0;         // max |E(p) - I| over the probes
    double hmrc = 0.0;              // max over nodes of the group HMRC residual
    double tail = 0.0;              // max truncation_error (mass dropped when the loops were built)
    double unitary = 0.0;           // max |E^* E - I| at 8 points of |lambda| = 1
    std::size_t evaluated_nodes = 0;
    ScalarField constancy;          // per-node lambda_constancy
};

inline ExtendedResiduals extended_residuals(const ExtendedSolution& E, const ResidualOptions& opt = {}) {
    const auto& g = E.grid;
    ExtendedResiduals r;
    r.constancy = ScalarField{g, std::vector<double>(g.size(), 0.0)};
    const auto dev = constancy_deviation(E, opt);
    r.lambda_constancy = dev.max(&r.constancy);
    for (const auto& d : dev.dz) r.evaluated_nodes += d.empty() ? 0 : 1;

    const int n = E.dim();
    const auto unit = circle_points(1.0, 8);
    for (const auto& L : E.loops) {
        if (!L) continue;
        r.e1 = std::max(r.e1, max_abs(L->eval_unchecked(1.0) - identity(n)));
        std::size_t N = std::max<std::size_t>(opt.hmrc_samples, 4);
        while (N < static_cast<std::size_t>(2 * L->order() + 1)) N *= 2;
        r.hmrc = std::max(r.hmrc, hmrc_residual(*L, Level::group, N));
        r.tail = std::max(r.tail, L->truncation_error());
        for (cplx l : unit) {
            const Mat v = L->eval_unchecked(l);
            r.unitary = std::max(r.unitary, max_abs(v.adjoint() * v - identity(n)));
        }
    }
    if (const auto& Lp = E.loops[g.base_index()])
        for (cplx l : dev.lambdas) r.basepoint = std::max(r.basepoint, max_abs(Lp->eval_unchecked(l) - identity(n)));
    return r;
}

/// The variant of the uniton construction with the smaller lambda-constancy
/// residual; the loser's residual is reported alongside.
struct UnitonSelection {
    ExtendedSolution solution;
    UnitonVariant variant = UnitonVariant::lambda;
    double residual = 0.0;        // winner
    double other_residual = 0.0;  // loser
};

inline UnitonSelection uniton_extended(const Rational& f, const GridDomain& g, const AnnulusConfig& cfg,
                                       double select_tol = 1e-2, const ResidualOptions& opt = {}) {
    if (g.nx() < 3 || g.ny() < 3) throw InvalidArgument("uniton_extended needs at least a 3x3 grid");
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const cplx z = g.z(ix, iy);
            if (!std::isfinite(std::abs(f(z)))) throw InvalidArgument("f has a pole on the grid");
        }
    // Variants are told apart on a window of +-4 nodes around the basepoint.
    const int lo_x = std::max(g.ip - 4, 0), hi_x = std::min(g.ip + 4, g.nx() - 1);
    const int lo_y = std::max(g.jp - 4, 0), hi_y = std::min(g.jp + 4, g.ny() - 1);
    const auto window = GridDomain::make(g.z(lo_x, 0).real(), g.z(hi_x, 0).real(), g.z(0, lo_y).imag(),
                                         g.z(0, hi_y).imag(), g.h, g.basepoint());
    auto probe = [&](UnitonVariant v) {
        return extended_residuals(uniton_extended(f, window, cfg, v), opt).lambda_constancy;
    };
    const double ra = probe(UnitonVariant::lambda);
    const double rb = probe(UnitonVariant::inverse_lambda);
    const auto win = ra <= rb ? UnitonVariant::lambda : UnitonVariant::inverse_lambda;
    const double best = std::min(ra, rb);
    if (!(best <= select_tol))
        throw ConstructionError("no uniton variant passes the lambda-constancy check (best residual " +
                                std::to_string(best) + ")");
    return {uniton_extended(f, g, cfg, win), win, best, std::max(ra, rb)};
}

// ---------------------------------------------------------------------------
// Integration of the flat connection
// ---------------------------------------------------------------------------

enum class PathOrder { x_first, y_first };

namespace detail {

/// Midpoint value between nodes i and i+1 of a line by cubic interpolation.
inline Mat cubic_midpoint(const std::vector<Mat>& f, int i) {
    const int n = static_cast<int>(f.size());
    if (n < 4) return 0.5 * (f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(i + 1)]);
    auto F = [&](int k) -> const Mat& { return f[static_cast<std::size_t>(k)]; };
    if (i >= 1 && i + 2 <= n - 1) return (-F(i - 1) + 9.0 * F(i) + 9.0 * F(i + 1) - F(i + 2)) / 16.0;
    if (i == 0) return (5.0 * F(0) + 15.0 * F(1) - 5.0 * F(2) + F(3)) / 16.0;
    return (F(i - 2) - 5.0 * F(i - 1) + 15.0 * F(i) + 5.0 * F(i + 1)) / 16.0;
}

/// Integrates E' = E M along a line of nodes from index `from` in both
/// directions with classical RK4, step h, starting at E(from) = start.
inline std::vector<Mat> integrate_line(const std::vector<Mat>& M, int from, const Mat& start, double h) {
    const int n = static_cast<int>(M.size());
    std::vector<Mat> E(M.size());
    E[static_cast<std::size_t>(from)] = start;
    auto step = [&](const Mat& e, const Mat& m0, const Mat& mh, const Mat& m1, double dt) {
        const Mat k1 = e * m0;
        const Mat k2 = (e + 0.5 * dt * k1) * mh;
        const Mat k3 = (e + 0.5 * dt * k2) * mh;
        const Mat k4 = (e + dt * k3) * m1;
        Mat next = e + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(max_abs(next) <= 1e6)) throw ConstructionError("flat-frame integration blew up");
        return next;
    };
    for (int i = from; i + 1 < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        E[u + 1] = step(E[u], M[u], cubic_midpoint(M, i), M[u + 1], h);
    }
    for (int i = from; i > 0; --i) {
        const auto u = static_cast<std::size_t>(i);
        E[u - 1] = step(E[u], M[u], cubic_midpoint(M, i - 1), M[u - 1], -h);
    }
    return E;
}

/// E_lambda(z) at every node for one lambda, with E(p) = I.
inline std::vector<Mat> flat_frame(const MaurerCartanPair& mc, cplx lambda, PathOrder order) {
    const auto& g = mc.grid;
    const int n = static_cast<int>(mc.A.front().rows());
    const cplx a = 0.5 * (1.0 - 1.0 / lambda), b = 0.5 * (1.0 - lambda);
    // E^{-1} E_x = A_l + B_l,  E^{-1} E_y = i (A_l - B_l).
    std::vector<Mat> Mx(g.size()), My(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Mat Al = a * mc.A[k], Bl = b * mc.B[k];
        Mx[k] = Al + Bl;
        My[k] = I_unit * (Al - Bl);
    }
    std::vector<Mat> out(g.size());
    auto row = [&](const std::vector<Mat>& F, int iy) {
        std::vector<Mat> r(static_cast<std::size_t>(g.nx()));
        for (int ix = 0; ix < g.nx(); ++ix) r[static_cast<std::size_t>(ix)] = F[g.index(ix, iy)];
        return r;
    };
    auto col = [&](const std::vector<Mat>& F, int ix) {
        std::vector<Mat> c(static_cast<std::size_t>(g.ny()));
        for (int iy = 0; iy < g.ny(); ++iy) c[static_cast<std::size_t>(iy)] = F[g.index(ix, iy)];
        return c;
    };
    if (order == PathOrder::x_first) {
        const auto spine = integrate_line(row(Mx, g.jp), g.ip, identity(n), g.h);
        for (int ix = 0; ix < g.nx(); ++ix) {
            const auto c = integrate_line(col(My, ix), g.jp, spine[static_cast<std::size_t>(ix)], g.h);
            for (int iy = 0; iy < g.ny(); ++iy) out[g.index(ix, iy)] = c[static_cast<std::size_t>(iy)];
        }
    } else {
        const auto spine = integrate_line(col(My, g.ip), g.jp, identity(n), g.h);
        for (int iy = 0; iy < g.ny(); ++iy) {
            const auto r = integrate_line(row(Mx, iy), g.ip, spine[static_cast<std::size_t>(iy)], g.h);
            for (int ix = 0; ix < g.nx(); ++ix) out[g.index(ix, iy)] = r[static_cast<std::size_t>(ix)];
        }
    }
    return out;
}

}  // namespace detail

/// Flat frame of the connection E^{-1} E_z = (1 - 1/lambda) A / 2,
/// E^{-1} E_zbar = (1 - lambda) B / 2 with E(p) = I, integrated for every
/// lambda sample of both circles along axis-aligned paths from p and then
/// assembled into per-node Laurent loops of order cfg.K.
inline ExtendedSolution extended_from_connection(const MaurerCartanPair& mc, const AnnulusConfig& cfg,
                                                 PathOrder order = PathOrder::x_first) {
    cfg.validate();
    const auto& g = mc.grid;
    if (g.nx() < 2 || g.ny() < 2) throw InvalidArgument("extended_from_connection needs at least a 2x2 grid");
    const std::size_t N = cfg.N;
    const auto inner = circle_points(cfg.eps, N);
    const auto outer = circle_points(1.0 / cfg.eps, N);
    std::vector<std::vector<Mat>> s0(g.size(), std::vector<Mat>(N)), sInf(g.size(), std::vector<Mat>(N));
    for (std::size_t m = 0; m < N; ++m) {
        const auto f0 = detail::flat_frame(mc, inner[m], order);
        const auto fInf = detail::flat_frame(mc, outer[m], order);
        for (std::size_t k = 0; k < g.size(); ++k) {
            s0[k][m] = f0[k];
            sInf[k][m] = fInf[k];
        }
    }
    ExtendedSolution E{g, cfg, std::vector<std::optional<LaurentLoop>>(g.size()), "connection"};
    for (std::size_t k = 0; k < g.size(); ++k)
        E.loops[k] = laurent_from_two_circles(s0[k], sInf[k], cfg.full(), cfg.K).trimmed();
    return E;
}

/// Direct integration at a single lambda (used for lambda = -1 and +1 checks).
inline std::vector<Mat> flat_frame_at(const MaurerCartanPair& mc, cplx lambda, PathOrder order = PathOrder::x_first) {
    if (lambda == cplx{0.0}) throw InvalidArgument("lambda must be nonzero");
    return detail::flat_frame(mc, lambda, order);
}

// ---------------------------------------------------------------------------
// Restriction
// ---------------------------------------------------------------------------

/// s = E_{-1}, made exactly unitary by a polar correction when the drift is small.
inline HarmonicMapGrid restrict_harmonic(const ExtendedSolution& E, double drift_tol = 1e-6) {
    HarmonicMapGrid s{E.grid, std::vector<Mat>(E.grid.size())};
    for (std::size_t k = 0; k < E.loops.size(); ++k) {
        if (!E.loops[k]) throw InvalidArgument("restrict_harmonic: solution has excluded nodes");
        Mat v = E.loops[k]->eval_unchecked(-1.0);
        const double d = max_abs(v.adjoint() * v - identity(static_cast<int>(v.rows())));
        if (d > drift_tol)
            throw RealityViolation("restrict_harmonic: E_{-1} is not unitary (defect " + std::to_string(d) + ")");
        if (d > 1e-12) v = polar_unitary(v);
        s.values[k] = v;
    }
    return s;
}

}  // namespace loopviro

#endif  // LOOPVIRO_EXTENDED_HPP
