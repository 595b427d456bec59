#ifndef LOOPVIRO_PROJECTIONS_HPP
#define LOOPVIRO_PROJECTIONS_HPP

#include "loopviro/double_loop.hpp"

#include <utility>

namespace loopviro {

template <class Plus, class Minus>
struct Split {
    Plus plus;
    Minus minus;
};

/// Lie-algebra projections of the unit-circle triple: the plus part keeps the
/// strictly negative modes (holomorphic outside the circle, zero at infinity),
/// the minus part everything else.
inline Split<LaurentLoop, LaurentLoop> pi_split_standard(const LaurentLoop& V) {
    LaurentLoop plus(V.dim(), V.order(), V.annulus());
    LaurentLoop minus(V.dim(), V.order(), V.annulus());
    for (int k = -V.order(); k <= V.order(); ++k) (k < 0 ? plus : minus).coeff(k) = V.coeff(k);
    return {plus, minus};
}

/// Two-circle mode split without any reality precondition.
///
/// With near-0 modes a_k and near-infinity modes b_k the plus part is the single
/// Laurent loop  sum_{k<0} a_k l^k + sum_{k>0} b_k l^k - C,  C chosen so that it
/// vanishes at l = 1; the minus part is the remainder on each circle, which has
/// no negative modes near 0 and no positive modes near infinity.
inline Split<LaurentLoop, DoubleLoop> split_two_circle(const DoubleLoop& W) {
    const auto& a = W.near0();
    const auto& b = W.nearInf();
    const int K = std::max(a.order(), b.order());
    const Annulus full{a.annulus().r_in, b.annulus().r_out};
    if (full.r_in > full.r_out) throw InvalidArgument("near-0 circle must lie inside the near-infinity circle");

    LaurentLoop plus(W.dim(), K, full);
    Mat C = zeros(W.dim());
    for (int k = -a.order(); k < 0; ++k) {
        plus.coeff(k) = a.coeff(k);
        C += a.coeff(k);
    }
    for (int k = 1; k <= b.order(); ++k) {
        plus.coeff(k) = b.coeff(k);
        C += b.coeff(k);
    }
    plus.coeff(0) = -C;

    LaurentLoop m0(W.dim(), K, a.annulus());
    for (int k = 0; k <= K; ++k) m0.coeff(k) = a.coeff_or_zero(k) - plus.coeff(k);
    LaurentLoop mInf(W.dim(), K, b.annulus());
    for (int k = -K; k <= 0; ++k) mInf.coeff(k) = b.coeff_or_zero(k) - plus.coeff(k);
    return {plus, DoubleLoop(m0, mInf)};
}

/// Lie-algebra projections of the two-circle harmonic-map triple.  The input
/// must satisfy the algebra HMRC; both parts then satisfy it as well.
inline Split<LaurentLoop, DoubleLoop> pi_split_harmonic(const DoubleLoop& W, std::size_t N = 256,
                                                        double hmrc_tol = 1e-8) {
    const double drift = hmrc_residual(W, Level::algebra, N);
    if (drift > hmrc_tol)
        throw RealityViolation("pi_split_harmonic: input violates the algebra HMRC (residual " +
                               std::to_string(drift) + ")");
    return split_two_circle(W);
}

}  // namespace loopviro

#endif  // LOOPVIRO_PROJECTIONS_HPP
