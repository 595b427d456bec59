#ifndef LOOPVIRO_VIRASORO_HPP
#define LOOPVIRO_VIRASORO_HPP

#include "loopviro/birkhoff.hpp"
#include "loopviro/extended.hpp"
#include "loopviro/vector_field.hpp"

#include <functional>

namespace loopviro {

// ---------------------------------------------------------------------------
// Spectral maps
// ---------------------------------------------------------------------------

/// A pair of holomorphic maps, one defined near 0 and one near infinity,
/// acting on loops by reparametrizing each circle.
struct SpectralMap {
    std::function<cplx(cplx)> near0;
    std::function<cplx(cplx)> nearInf;

    static SpectralMap identity() {
        return {[](cplx l) { return l; }, [](cplx l) { return l; }};
    }
    /// (this o g)(lambda) = this(g(lambda)) on both ends.
    SpectralMap after(const SpectralMap& g) const {
        return {[f = near0, g0 = g.near0](cplx l) { return f(g0(l)); },
                [f = nearInf, gi = g.nearInf](cplx l) { return f(gi(l)); }};
    }
};

/// f(lambda) = lambda + t v(lambda) near 0, extended to infinity by
/// f(lambda) = 1 / conj(f(1/conj(lambda))).
struct HoloMap {
    VectorFieldLambda v;
    double t = 0.0;

    cplx operator()(cplx l) const { return l + t * v(l); }
    cplx at_infinity(cplx l) const { return 1.0 / std::conj((*this)(1.0 / std::conj(l))); }

    /// |t| max|v| < eps/4 on the inner circle.
    void validate(const AnnulusConfig& cfg, std::size_t samples = 64) const {
        if (!v.vanishes_at_zero()) throw InvalidArgument("HoloMap: v must vanish at 0");
        double vmax = 0.0;
        for (cplx l : circle_points(cfg.eps, samples)) vmax = std::max(vmax, std::abs(v(l)));
        if (!(std::abs(t) * vmax < cfg.eps / 4.0))
            throw InvalidArgument("HoloMap: flow parameter too large for injectivity on the annulus");
    }

    SpectralMap as_map() const {
        return {[h = *this](cplx l) { return h(l); }, [h = *this](cplx l) { return h.at_infinity(l); }};
    }
};

// ---------------------------------------------------------------------------
// Group action
// ---------------------------------------------------------------------------

inline BirkhoffOptions flow_birkhoff_options() {
    BirkhoffOptions o;
    o.hmrc_tol = 1e-8;
    return o;
}

/// f^# E = P+(E o f) for E in the plus group.  Since E o f = E (E^{-1} (E o f))
/// and E already lies in the plus group, only the near-identity loop
/// D = E^{-1} (E o f) is factored: P+(E o f) = E P+(D).
inline LaurentLoop group_action(const SpectralMap& f, const LaurentLoop& E, const AnnulusConfig& cfg,
                                const BirkhoffOptions& opt = flow_birkhoff_options()) {
    cfg.validate();
    const std::size_t N = cfg.N;
    const int K_work = static_cast<int>(N / 2) - 1;
    const double r0 = cfg.eps, rInf = 1.0 / cfg.eps;
    const auto p0 = circle_points(r0, N), pInf = circle_points(rInf, N);
    std::vector<Mat> d0(N), dInf(N);
    for (std::size_t m = 0; m < N; ++m) {
        d0[m] = checked_inverse(E.eval_unchecked(p0[m])) * E.eval_unchecked(f.near0(p0[m]));
        dInf[m] = checked_inverse(E.eval_unchecked(pInf[m])) * E.eval_unchecked(f.nearInf(pInf[m]));
    }
    const DoubleLoop D(laurent_from_samples(d0, r0, K_work), laurent_from_samples(dInf, rInf, K_work));
    const auto pair = birkhoff_harmonic(D, cfg, opt);
    return loop_mul(E, pair.plus, cfg.work_order()).trimmed();
}

/// Per-node group action; nodes where the factorization fails are excluded.
inline ExtendedSolution group_action(const SpectralMap& f, const ExtendedSolution& E,
                                     const BirkhoffOptions& opt = flow_birkhoff_options()) {
    ExtendedSolution out{E.grid, E.cfg, std::vector<std::optional<LaurentLoop>>(E.loops.size()), "flowed"};
    for (std::size_t k = 0; k < E.loops.size(); ++k) {
        if (!E.loops[k]) continue;
        try {
            out.loops[k] = group_action(f, *E.loops[k], E.cfg, opt);
        } catch (const OutsideBigCell&) {
            if (k == E.grid.base_index()) throw;
        } catch (const RealityViolation&) {
            if (k == E.grid.base_index()) throw;
        }
    }
    return out;
}

inline ExtendedSolution group_action(const HoloMap& f, const ExtendedSolution& E,
                                     const BirkhoffOptions& opt = flow_birkhoff_options()) {
    f.validate(E.cfg);
    if (f.t == 0.0) return E;
    return group_action(f.as_map(), E, opt);
}

// ---------------------------------------------------------------------------
// Infinitesimal action
// ---------------------------------------------------------------------------

struct ActionOptions {
    bool flip_infinity_sign = false;  // use +conj instead of -conj at infinity (diagnostic only)
    double membership_tol = 1e-8;
};

/// Checks that E lies in the plus group: E(1) = I and the group HMRC.
inline double plus_membership(const LaurentLoop& E, std::size_t N = 256) {
    return std::max(max_abs(E.eval_unchecked(1.0) - identity(E.dim())), hmrc_residual(E, Level::group, N));
}

namespace detail {

/// Samples of E^{-1} u(lambda) E'(lambda) on |lambda| = r, as a loop of order K.
inline LaurentLoop pulled_back_field(const VectorFieldLambda& u, const LaurentLoop& E, const LaurentLoop& dE, double r,
                                     std::size_t N, int K) {
    const auto pts = circle_points(r, N);
    const auto e = sample_circle(E, r, N);
    const auto de = sample_circle(dE, r, N);
    std::vector<Mat> w(N);
    for (std::size_t m = 0; m < N; ++m) w[m] = checked_inverse(e[m]) * (u(pts[m]) * de[m]);
    return laurent_from_samples(w, r, K);
}

}  // namespace detail

/// W = (E^{-1} v E', E^{-1} vtilde E') on the two circles, vtilde = reality_extend(V).
inline DoubleLoop virasoro_field(const VectorFieldLambda& V, const LaurentLoop& E, const AnnulusConfig& cfg,
                                 const ActionOptions& opt = {}) {
    auto vinf = reality_extend(V);
    if (opt.flip_infinity_sign) vinf = cplx{-1.0} * vinf;
    const int K = static_cast<int>(cfg.N / 2) - 1;
    const auto dE = loop_dlambda(E);
    return {detail::pulled_back_field(V, E, dE, cfg.eps, cfg.N, K),
            detail::pulled_back_field(vinf, E, dE, 1.0 / cfg.eps, cfg.N, K)};
}

/// Pi+ W with W = E^{-1} v E' near 0 and E^{-1} vtilde E' near infinity; this is
/// E^{-1} V#E.  With the diagnostic sign flip the reality check is skipped.
inline LaurentLoop virasoro_generator_field(const VectorFieldLambda& V, const LaurentLoop& E, const AnnulusConfig& cfg,
                                            const ActionOptions& opt = {}) {
    cfg.validate();
    if (const double m = plus_membership(E, cfg.N); m > opt.membership_tol)
        throw InvalidArgument("virasoro_action: E is not in the plus group (residual " + std::to_string(m) + ")");
    const auto W = virasoro_field(V, E, cfg, opt);
    const auto split = opt.flip_infinity_sign ? split_two_circle(W) : pi_split_harmonic(W, cfg.N);
    return split.plus.resized(cfg.work_order()).trimmed();
}

/// Tangent vector V#E = E Pi+(E^{-1} v dE/dlambda).
inline LaurentLoop virasoro_action(const VectorFieldLambda& V, const LaurentLoop& E, const AnnulusConfig& cfg,
                                   const ActionOptions& opt = {}) {
    return loop_mul(E, virasoro_generator_field(V, E, cfg, opt), cfg.work_order()).trimmed();
}

inline LaurentLoop generator_action(int j, const LaurentLoop& E, const AnnulusConfig& cfg,
                                    const ActionOptions& opt = {}) {
    if (j < 0) throw InvalidArgument("generator_action: j must be non-negative");
    return virasoro_action(VectorFieldLambda::generator(j), E, cfg, opt);
}

/// V#E at every node of an extended solution.
inline std::vector<std::optional<LaurentLoop>> virasoro_action(const VectorFieldLambda& V, const ExtendedSolution& E) {
    std::vector<std::optional<LaurentLoop>> out(E.loops.size());
    for (std::size_t k = 0; k < E.loops.size(); ++k)
        if (E.loops[k]) out[k] = virasoro_action(V, *E.loops[k], E.cfg);
    return out;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct TangencyOptions {
    std::vector<double> t_list{1e-2, 1e-3};
    ResidualOptions residual{4, 16, 64};
    bool group_flow = false;  // also flow with group_action and record its residuals
};

struct TangencyRow {
    double t = 0.0;
    double defect = 0.0;             // constancy change of E + t dE against E
    double ratio = 0.0;              // defect / t^2
    double control_defect = 0.0;     // same for E + t E lambda^2 X
    double flowed_residual = -1.0;   // lambda_constancy of the group flow, when computed
    std::size_t flowed_excluded = 0;
};

struct TangencyReport {
    double base_residual = 0.0;  // lambda_constancy of E itself
    std::vector<TangencyRow> rows;

    /// max ratio / min ratio across t_list.
    double ratio_spread() const {
        double lo = INFINITY, hi = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
        }
        return rows.empty() || hi == 0.0 ? 1.0 : hi / lo;
    }
};

namespace detail {

inline double deviation_distance(const ConstancyDeviation& a, const ConstancyDeviation& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.dz.size(); ++k) {
        if (a.dz[k].empty() || b.dz[k].empty()) continue;
        for (std::size_t j = 0; j < a.dz[k].size(); ++j)
            worst = std::max({worst, max_abs(a.dz[k][j] - b.dz[k][j]), max_abs(a.dzbar[k][j] - b.dzbar[k][j])});
    }
    return worst;
}

inline ExtendedSolution perturbed(const ExtendedSolution& E, const std::vector<std::optional<LaurentLoop>>& dE,
                                  double t) {
    ExtendedSolution out = E;
    for (std::size_t k = 0; k < E.loops.size(); ++k)
        if (E.loops[k] && dE[k]) out.loops[k] = *E.loops[k] + cplx{t} * *dE[k];
    return out;
}

}  // namespace detail

/// Tangency of V#E to the extended solutions: the lambda-constancy defect of
/// E + t V#E differs from that of E by O(t^2), whereas a non-tangent
/// perturbation E lambda^2 X changes it at first order.
inline TangencyReport tangency_check(const ExtendedSolution& E, const VectorFieldLambda& V,
                                     const TangencyOptions& opt = {}) {
    TangencyReport rep;
    const auto base = constancy_deviation(E, opt.residual);
    rep.base_residual = base.max();
    const auto dE = virasoro_action(V, E);

    Mat X = zeros(E.dim());
    X(0, E.dim() - 1) = 1.0;
    std::vector<std::optional<LaurentLoop>> control(E.loops.size());
    for (std::size_t k = 0; k < E.loops.size(); ++k)
        if (E.loops[k]) control[k] = loop_mul(*E.loops[k], LaurentLoop::monomial(X, 2, E.cfg.full()));

    for (double t : opt.t_list) {
        TangencyRow row;
        row.t = t;
        row.defect = detail::deviation_distance(constancy_deviation(detail::perturbed(E, dE, t), opt.residual), base);
        row.ratio = row.defect / (t * t);
        row.control_defect =
            detail::deviation_distance(constancy_deviation(detail::perturbed(E, control, t), opt.residual), base);
        if (opt.group_flow) {
            const auto flowed = group_action(HoloMap{V, t}, E);
            row.flowed_residual = extended_residuals(flowed, opt.residual).lambda_constancy;
            row.flowed_excluded = flowed.excluded();
        }
        rep.rows.push_back(row);
    }
    return rep;
}

/// The right-invariant curve E exp(s E^{-1} V#E), which stays in the plus group.
inline LaurentLoop flow_curve(const LaurentLoop& E, const LaurentLoop& generator_field, double s,
                              const AnnulusConfig& cfg) {
    const auto ex = exp_loop(cplx{s} * generator_field, cfg.N, cfg.work_order());
    return loop_mul(E, ex, cfg.work_order()).trimmed();
}

/// | (dX_V[X_W] - dX_W[X_V])(E) - X_{[V,W]}(E) |, where dX_V[Y] is the central
/// difference of X_V along the curve E exp(s E^{-1} Y) and X_V(E) = V#E.
inline double bracket_representation_check(const VectorFieldLambda& V, const VectorFieldLambda& W,
                                           const LaurentLoop& E, const AnnulusConfig& cfg, double h = 1e-4) {
    const auto gV = virasoro_generator_field(V, E, cfg);
    const auto gW = virasoro_generator_field(W, E, cfg);
    auto directional = [&](const VectorFieldLambda& U, const LaurentLoop& along) {
        const auto plus = virasoro_action(U, flow_curve(E, along, h, cfg), cfg);
        const auto minus = virasoro_action(U, flow_curve(E, along, -h, cfg), cfg);
        return cplx{1.0 / (2.0 * h)} * (plus - minus);
    };
    const auto fd = directional(V, gW) - directional(W, gV);
    const auto exact = virasoro_action(vira_bracket(V, W), E, cfg);
    return max_over_samples((fd - exact).with_annulus(cfg.full()), [](cplx, const Mat& m) { return max_abs(m); },
                            cfg.N);
}

// ---------------------------------------------------------------------------
// Decoupled action with the real structure
// ---------------------------------------------------------------------------

/// max |E(lambda) E(conj(lambda))^* - I| on the trust circles.
inline double real_structure_residual(const LaurentLoop& E, std::size_t N = 256) {
    return max_over_samples(
        E,
        [&](cplx l, const Mat& v) {
            return max_abs(v * E.eval_unchecked(std::conj(l)).adjoint() - identity(E.dim()));
        },
        N);
}

/// delta_{v,w} E = E Pi+(W) with W = E^{-1} w E' near 0 and E^{-1} v E' near
/// infinity.  The two ends are independent, so the result is computed as
/// delta_{0,w} + delta_{v,0}.
inline LaurentLoop schwarz_action(const VirasoroPairR& pair, const LaurentLoop& E, const AnnulusConfig& cfg,
                                  double reality_tol = 1e-10) {
    cfg.validate();
    pair.validate();
    if (const double r = real_structure_residual(E, cfg.N); r > reality_tol)
        throw RealityViolation("schwarz_action: E violates E(l) E(conj l)^* = I (residual " + std::to_string(r) + ")");
    const int K = static_cast<int>(cfg.N / 2) - 1;
    const auto dE = loop_dlambda(E);
    const LaurentLoop zero0(E.dim(), K, cfg.inner()), zeroInf(E.dim(), K, cfg.outer());
    auto half = [&](const DoubleLoop& W) {
        const auto plus = split_two_circle(W).plus.resized(cfg.work_order());
        return loop_mul(E, plus, cfg.work_order());
    };
    const auto at0 = half({detail::pulled_back_field(pair.w, E, dE, cfg.eps, cfg.N, K), zeroInf});
    const auto atInf = half({zero0, detail::pulled_back_field(pair.v, E, dE, 1.0 / cfg.eps, cfg.N, K)});
    return at0 + atInf;
}

}  // namespace loopviro

#endif  // LOOPVIRO_VIRASORO_HPP
