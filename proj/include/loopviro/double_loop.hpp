#ifndef LOOPVIRO_DOUBLE_LOOP_HPP
#define LOOPVIRO_DOUBLE_LOOP_HPP

#include "loopviro/laurent_loop.hpp"

namespace loopviro {

/// Discretization parameters shared by every two-circle computation.
struct AnnulusConfig {
    double eps = 0.5;        // inner circle radius; the outer circle is 1/eps
    std::size_t N = 256;     // samples per circle
    int K = 16;              // truncation order of constructed solutions
    double trunc_tol = 1e-10;
    double delta = 0.5;      // quadrature radius for cross-checks, delta <= eps

    void validate() const {
        if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
        if (!is_power_of_two(N)) throw InvalidArgument("samples per circle must be a power of two");
        if (N < static_cast<std::size_t>(4 * K + 4)) throw InvalidArgument("need N >= 4K + 4");
        if (!(delta > 0.0 && delta <= eps)) throw InvalidArgument("quadrature radius must satisfy delta <= eps");
        if (!(trunc_tol > 0.0)) throw InvalidArgument("truncation tolerance must be positive");
    }

    Annulus inner() const { return circle(eps); }
    Annulus outer() const { return circle(1.0 / eps); }
    /// Annulus eps <= |lambda| <= 1/eps on which C^*-holomorphic loops are trusted.
    Annulus full() const { return {eps, 1.0 / eps}; }
    /// Largest order admissible for intermediate loops (N >= 4K + 4).
    int work_order() const { return static_cast<int>((N - 4) / 4); }
};

/// A pair of Laurent expansions, one around |lambda| = eps and one around
/// |lambda| = 1/eps, representing a loop on the two-circle contour.
class DoubleLoop {
public:
    DoubleLoop() = default;
    DoubleLoop(LaurentLoop near0, LaurentLoop nearInf)
        : near0_(std::move(near0)), nearInf_(std::move(nearInf)) {
        if (near0_.dim() != nearInf_.dim()) throw InvalidArgument("DoubleLoop members must have equal n");
    }

    /// Restriction of a C^*-holomorphic loop to both circles.
    static DoubleLoop lift(const LaurentLoop& L, const AnnulusConfig& cfg) {
        return {L.with_annulus(cfg.inner()), L.with_annulus(cfg.outer())};
    }
    static DoubleLoop identity(int n, const AnnulusConfig& cfg) {
        return lift(LaurentLoop::identity(n, cfg.full()), cfg);
    }

    int dim() const { return near0_.dim(); }
    const LaurentLoop& near0() const { return near0_; }
    const LaurentLoop& nearInf() const { return nearInf_; }
    LaurentLoop& near0() { return near0_; }
    LaurentLoop& nearInf() { return nearInf_; }

    DoubleLoop& operator+=(const DoubleLoop& o) {
        near0_ += o.near0_;
        nearInf_ += o.nearInf_;
        return *this;
    }
    DoubleLoop& operator-=(const DoubleLoop& o) {
        near0_ -= o.near0_;
        nearInf_ -= o.nearInf_;
        return *this;
    }
    DoubleLoop& operator*=(cplx s) {
        near0_ *= s;
        nearInf_ *= s;
        return *this;
    }
    friend DoubleLoop operator+(DoubleLoop a, const DoubleLoop& b) { return a += b; }
    friend DoubleLoop operator-(DoubleLoop a, const DoubleLoop& b) { return a -= b; }
    friend DoubleLoop operator*(cplx s, DoubleLoop a) { return a *= s; }

private:
    LaurentLoop near0_;
    LaurentLoop nearInf_;
};

// ---------------------------------------------------------------------------
// Harmonic map reality condition
// ---------------------------------------------------------------------------

enum class Level { group, algebra };

/// lambda -> L(conj(lambda)^{-1})^*, i.e. c_k -> c_{-k}^* on the reflected annulus.
inline LaurentLoop star_reflect(const LaurentLoop& L) {
    LaurentLoop out(L.dim(), L.order(), L.annulus().reflected());
    for (int k = -L.order(); k <= L.order(); ++k) out.coeff(k) = L.coeff(-k).adjoint();
    return out;
}

/// Image under Q(lambda) -> (Q(conj(lambda)^{-1})^*)^{-1} (group) or
/// W(lambda) -> -W(conj(lambda)^{-1})^* (algebra).
inline LaurentLoop hmrc_involution(const LaurentLoop& L, Level level, std::size_t N = 256,
                                   int K_out = -1) {
    auto r = star_reflect(L);
    if (level == Level::algebra) return -r;
    return loop_inverse(r, N, K_out < 0 ? L.order() : K_out);
}

/// On a DoubleLoop the two ends swap roles.
inline DoubleLoop hmrc_involution(const DoubleLoop& Q, Level level, std::size_t N = 256,
                                  int K_out = -1) {
    return {hmrc_involution(Q.nearInf(), level, N, K_out < 0 ? Q.nearInf().order() : K_out),
            hmrc_involution(Q.near0(), level, N, K_out < 0 ? Q.near0().order() : K_out)};
}

namespace detail {

inline double hmrc_pair_residual(const LaurentLoop& here, const LaurentLoop& there, Level level,
                                 std::size_t N) {
    return max_over_samples(
        here,
        [&](cplx lambda, const Mat& v) {
            const Mat w = there.eval_unchecked(1.0 / std::conj(lambda)).adjoint();
            if (level == Level::algebra) return max_abs(v + w);
            return max_abs(v * w - identity(static_cast<int>(v.rows())));
        },
        N);
}

}  // namespace detail

/// Sample-wise distance from the HMRC fixed-point set.  At group level this is
/// max |Q(lambda) Q(conj(lambda)^{-1})^* - I|, which equals |Q - involution(Q)|
/// up to a factor bounded by |Q|.
inline double hmrc_residual(const LaurentLoop& L, Level level, std::size_t N = 256) {
    return detail::hmrc_pair_residual(L, L, level, N);
}

inline double hmrc_residual(const DoubleLoop& Q, Level level, std::size_t N = 256) {
    return std::max(detail::hmrc_pair_residual(Q.near0(), Q.nearInf(), level, N),
                    detail::hmrc_pair_residual(Q.nearInf(), Q.near0(), level, N));
}

template <class LoopT>
bool check_hmrc(const LoopT& Q, Level level, double tol = 1e-10, std::size_t N = 256) {
    return hmrc_residual(Q, level, N) <= tol;
}

// ---------------------------------------------------------------------------
// Pointwise exponential
// ---------------------------------------------------------------------------

/// exp of a DoubleLoop field, circle by circle.
inline DoubleLoop exp_loop(const DoubleLoop& W, const AnnulusConfig& cfg, int K_out = -1) {
    if (K_out < 0) K_out = static_cast<int>(cfg.N / 2) - 1;
    auto ex = [](cplx, const Mat& v) { return mat_exp(v); };
    return {pointwise_map(W.near0(), ex, cfg.N, K_out).trimmed(),
            pointwise_map(W.nearInf(), ex, cfg.N, K_out).trimmed()};
}

inline LaurentLoop exp_loop(const LaurentLoop& W, std::size_t N, int K_out) {
    return pointwise_map(W, [](cplx, const Mat& v) { return mat_exp(v); }, N, K_out).trimmed();
}

}  // namespace loopviro

#endif  // LOOPVIRO_DOUBLE_LOOP_HPP
