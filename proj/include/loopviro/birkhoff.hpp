#ifndef LOOPVIRO_BIRKHOFF_HPP
#define LOOPVIRO_BIRKHOFF_HPP

#include "loopviro/projections.hpp"

namespace loopviro {

/// Q = plus * minus together with the diagnostics that certify it.
template <class Minus>
struct FactorPair {
    LaurentLoop plus;
    Minus minus;
    double residual = 0.0;          // |plus * minus - Q| on the sample circles
    double plus_membership = 0.0;   // distance of `plus` from its subgroup (normalization, modes, reality)
    double minus_membership = 0.0;  // distance of `minus` from its subgroup
    int iterations = 0;
};

using StandardPair = FactorPair<LaurentLoop>;
using HarmonicPair = FactorPair<DoubleLoop>;

struct BirkhoffOptions {
    double tol = 1e-9;         // required reconstruction residual
    double step_tol = 1e-12;   // stop once |log D| falls below this
    int max_iter = 50;
    double big_cell = 0.5;     // heuristic bound on |Q - I| for the initial guess
    double hmrc_tol = 1e-10;   // input reality check (harmonic triple)
    double drift_tol = 1e-8;   // reality drift tolerated during the iteration
};

namespace detail {

inline double max_dist_to_identity(std::span<const Mat> s) {
    double d = 0.0;
    for (const auto& m : s) d = std::max(d, max_abs(m - identity(static_cast<int>(m.rows()))));
    return d;
}

inline std::vector<Mat> identity_samples(int n, std::size_t N) { return std::vector<Mat>(N, identity(n)); }

/// D = E^{-1} Q F^{-1} and V = log D, sample by sample.  Returns max |V|.
inline double log_defect(std::span<const Mat> E, std::span<const Mat> Q, std::span<const Mat> F,
                         std::vector<Mat>& V) {
    double vmax = 0.0;
    V.resize(Q.size());
    for (std::size_t m = 0; m < Q.size(); ++m) {
        const Mat D = checked_inverse(E[m]) * Q[m] * checked_inverse(F[m]);
        V[m] = mat_log_series(D);
        vmax = std::max(vmax, max_abs(V[m]));
    }
    return vmax;
}

inline double product_residual(const LaurentLoop& a, const LaurentLoop& b, const LaurentLoop& q, double r,
                               std::size_t N) {
    const auto sa = sample_circle(a, r, N);
    const auto sb = sample_circle(b, r, N);
    const auto sq = sample_circle(q, r, N);
    double res = 0.0;
    for (std::size_t m = 0; m < N; ++m) res = std::max(res, max_abs(sa[m] * sb[m] - sq[m]));
    return res;
}

inline double max_scaled(const LaurentLoop& L, int k_lo, int k_hi) {
    double worst = 0.0;
    for (int k = std::max(k_lo, -L.order()); k <= std::min(k_hi, L.order()); ++k)
        worst = std::max(worst, L.scaled_norm(k));
    return worst;
}

}  // namespace detail

/// Birkhoff factorization for the unit-circle triple, Q = E F with E holomorphic
/// outside the circle and E(infinity) = I, F holomorphic inside.
///
/// Multiplicative Newton iteration: D = E^{-1} Q F^{-1}, V = log D,
/// E <- E exp(Pi+ V), F <- exp(Pi- V) F.  The error after each step is
/// quadratic in |V| near the identity.
inline StandardPair birkhoff_standard(const LaurentLoop& Q, const BirkhoffOptions& opt = {},
                                      std::size_t N = 256, int K_out = 63) {
    if (!Q.annulus().single_circle()) throw InvalidArgument("standard triple expects a loop on one circle");
    const double r = Q.annulus().r_in;
    const int n = Q.dim();
    const int K_work = static_cast<int>(N / 2) - 1;
    K_out = std::min(K_out, K_work);

    const auto Qs = sample_circle(Q, r, N);
    for (const auto& q : Qs)
        if (std::abs(q.determinant() - 1.0) > 1e-8) throw InvalidArgument("Q is not unimodular");
    const double dist = detail::max_dist_to_identity(Qs);
    if (dist >= opt.big_cell) throw OutsideBigCell("outside big cell: |Q - I| too large", dist);

    auto Es = detail::identity_samples(n, N);
    auto Fs = detail::identity_samples(n, N);
    std::vector<Mat> V;
    int it = 0;
    double vnorm = detail::log_defect(Es, Qs, Fs, V);
    while (vnorm >= opt.step_tol) {
        if (it == opt.max_iter) throw OutsideBigCell("outside big cell: factorization did not converge", vnorm);
        const auto split = pi_split_standard(laurent_from_samples(V, r, K_work));
        const auto P = sample_circle(split.plus, r, N);
        const auto M = sample_circle(split.minus, r, N);
        for (std::size_t m = 0; m < N; ++m) {
            Es[m] = Es[m] * mat_exp(P[m]);
            Fs[m] = mat_exp(M[m]) * Fs[m];
        }
        ++it;
        vnorm = detail::log_defect(Es, Qs, Fs, V);
    }

    StandardPair out;
    out.plus = laurent_from_samples(Es, r, K_out).trimmed();
    out.minus = laurent_from_samples(Fs, r, K_out).trimmed();
    out.iterations = it;
    out.residual = detail::product_residual(out.plus, out.minus, Q, r, N);
    out.plus_membership = std::max(detail::max_scaled(out.plus, 1, out.plus.order()),
                                   max_abs(out.plus.coeff(0) - identity(n)));
    out.minus_membership = detail::max_scaled(out.minus, -out.minus.order(), -1);
    if (out.residual > opt.tol) throw OutsideBigCell("factorization residual above tolerance", out.residual);
    return out;
}

/// Birkhoff factorization for the two-circle harmonic-map triple.
///
/// Q is a DoubleLoop satisfying the group HMRC.  The result has E holomorphic on
/// C^* with E(1) = I and F = (F_0, F_inf) holomorphic at 0 and at infinity; both
/// satisfy the HMRC.  Each Newton factor exp(Pi+ V) has an exponent vanishing at
/// lambda = 1, so the normalization is kept throughout.
inline HarmonicPair birkhoff_harmonic(const DoubleLoop& Q, const AnnulusConfig& cfg,
                                      const BirkhoffOptions& opt = {}) {
    cfg.validate();
    const std::size_t N = cfg.N;
    const int n = Q.dim();
    const int K_work = static_cast<int>(N / 2) - 1;
    const int K_out = cfg.work_order();
    const double r0 = cfg.eps;
    const double rInf = 1.0 / cfg.eps;

    if (const double h = hmrc_residual(Q, Level::group, N); h > opt.hmrc_tol)
        throw RealityViolation("birkhoff_harmonic: Q violates the HMRC (residual " + std::to_string(h) + ")");

    const auto Q0 = sample_circle(Q.near0(), r0, N);
    const auto QInf = sample_circle(Q.nearInf(), rInf, N);
    const double dist = std::max(detail::max_dist_to_identity(Q0), detail::max_dist_to_identity(QInf));
    if (dist >= opt.big_cell) throw OutsideBigCell("outside big cell: |Q - I| too large", dist);

    auto E0 = detail::identity_samples(n, N), EInf = E0, F0 = E0, FInf = E0;
    std::vector<Mat> V0, VInf;
    auto defect = [&] {
        const double v = std::max(detail::log_defect(E0, Q0, F0, V0), detail::log_defect(EInf, QInf, FInf, VInf));
        // Sample m of the inner circle and sample m of the outer circle are
        // exchanged by lambda -> conj(lambda)^{-1}.
        double drift = 0.0;
        for (std::size_t m = 0; m < N; ++m) drift = std::max(drift, max_abs(V0[m] + VInf[m].adjoint()));
        if (drift > opt.drift_tol)
            throw RealityViolation("birkhoff_harmonic: HMRC drift " + std::to_string(drift) + " during iteration");
        return v;
    };

    int it = 0;
    double vnorm = defect();
    while (vnorm >= opt.step_tol) {
        if (it == opt.max_iter) throw OutsideBigCell("outside big cell: factorization did not converge", vnorm);
        const DoubleLoop Vl(laurent_from_samples(V0, r0, K_work), laurent_from_samples(VInf, rInf, K_work));
        const auto split = split_two_circle(Vl);
        const auto P0 = sample_circle(split.plus, r0, N);
        const auto PInf = sample_circle(split.plus, rInf, N);
        const auto M0 = sample_circle(split.minus.near0(), r0, N);
        const auto MInf = sample_circle(split.minus.nearInf(), rInf, N);
        for (std::size_t m = 0; m < N; ++m) {
            E0[m] = E0[m] * mat_exp(P0[m]);
            EInf[m] = EInf[m] * mat_exp(PInf[m]);
            F0[m] = mat_exp(M0[m]) * F0[m];
            FInf[m] = mat_exp(MInf[m]) * FInf[m];
        }
        ++it;
        vnorm = defect();
    }

    HarmonicPair out;
    out.plus = laurent_from_two_circles(E0, EInf, cfg.full(), K_out).trimmed();
    out.minus = DoubleLoop(laurent_from_samples(F0, r0, K_out).trimmed(),
                           laurent_from_samples(FInf, rInf, K_out).trimmed());
    out.iterations = it;

    const auto& E = out.plus;
    out.residual = std::max(detail::product_residual(E.with_annulus(cfg.inner()), out.minus.near0(), Q.near0(), r0, N),
                            detail::product_residual(E.with_annulus(cfg.outer()), out.minus.nearInf(), Q.nearInf(),
                                                     rInf, N));
    // E: single Laurent series reproducing both sample sets, E(1) = I, HMRC.
    double consistency = 0.0;
    {
        const auto s0 = sample_circle(E, r0, N);
        const auto sInf = sample_circle(E, rInf, N);
        for (std::size_t m = 0; m < N; ++m)
            consistency = std::max({consistency, max_abs(s0[m] - E0[m]), max_abs(sInf[m] - EInf[m])});
    }
    out.plus_membership = std::max({consistency, max_abs(E.eval(1.0) - identity(n)),
                                    hmrc_residual(E, Level::group, N)});
    out.minus_membership = std::max({detail::max_scaled(out.minus.near0(), -out.minus.near0().order(), -1),
                                     detail::max_scaled(out.minus.nearInf(), 1, out.minus.nearInf().order()),
                                     hmrc_residual(out.minus, Level::group, N)});
    if (out.residual > opt.tol) throw OutsideBigCell("factorization residual above tolerance", out.residual);
    return out;
}

/// Dressing action of s_minus (holomorphic inside the unit circle) on s_plus:
/// the plus factor of s_minus * s_plus.
inline LaurentLoop dressing(const LaurentLoop& s_minus, const LaurentLoop& s_plus, const BirkhoffOptions& opt = {},
                            std::size_t N = 256) {
    return birkhoff_standard(loop_mul(s_minus, s_plus, static_cast<int>(N / 2) - 1), opt, N).plus;
}

}  // namespace loopviro

#endif  // LOOPVIRO_BIRKHOFF_HPP
