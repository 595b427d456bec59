#ifndef LOOPVIRO_MOBIUS_HPP
#define LOOPVIRO_MOBIUS_HPP

#include "loopviro/rational.hpp"
#include "loopviro/vector_field.hpp"

#include <Eigen/Eigenvalues>

namespace loopviro {

/// r(lambda) d/dlambda with r rational.
using RationalField = Rational;

/// (a/b, c/d) -> (a/b)(c/d)' - (c/d)(a/b)'
///   = [a (c'd - c d') b - c (a'b - a b') d] / (b^2 d^2),
/// computed with polynomial arithmetic only.
inline RationalField rational_bracket(const RationalField& V, const RationalField& W) {
    const auto& a = V.num;
    const auto& b = V.den;
    const auto& c = W.num;
    const auto& d = W.den;
    const Polynomial num = a * (c.derivative() * d - c * d.derivative()) * b - c * (a.derivative() * b - a * b.derivative()) * d;
    return {num, b * b * d * d};
}

/// a/b == c/d as rational functions, by cross-multiplication.
inline bool rational_equal(const RationalField& V, const RationalField& W) { return V.num * W.den == W.num * V.den; }

/// Roots of a polynomial (companion-matrix eigenvalues).
inline std::vector<cplx> polynomial_roots(const Polynomial& p) {
    const int d = p.degree();
    if (d < 1) return {};
    Mat C = Mat::Zero(d, d);
    for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) C(i, d - 1) = -p.c[static_cast<std::size_t>(i)] / p.c.back();
    Eigen::ComplexEigenSolver<Mat> es(C, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
    return r;
}

namespace detail {

/// First K+1 power-series coefficients of num/den around 0 (den(0) != 0).
inline std::vector<cplx> series_quotient(const std::vector<cplx>& num, const std::vector<cplx>& den, int K) {
    std::vector<cplx> q(static_cast<std::size_t>(K + 1), 0.0);
    auto at = [](const std::vector<cplx>& v, int k) { return k < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(k)] : cplx{0.0}; };
    for (int k = 0; k <= K; ++k) {
        cplx s = at(num, k);
        for (int i = 1; i <= k; ++i) s -= at(den, i) * q[static_cast<std::size_t>(k - i)];
        q[static_cast<std::size_t>(k)] = s / den[0];
    }
    return q;
}

}  // namespace detail

/// Laurent expansion of r around 0, powers up to K (r may have a pole of
/// finite order at 0).
inline VectorFieldLambda laurent_at_zero(const RationalField& r, int K) {
    int shift = 0;  // den = lambda^shift * den'
    while (shift <= r.den.degree() && r.den.c[static_cast<std::size_t>(shift)] == cplx{0.0}) ++shift;
    const std::vector<cplx> den(r.den.c.begin() + shift, r.den.c.end());
    const auto q = detail::series_quotient(r.num.c, den, K + shift);
    VectorFieldLambda v;
    for (int k = 0; k <= K + shift; ++k) v.set(k - shift, q[static_cast<std::size_t>(k)]);
    return v;
}

/// Laurent expansion of r around infinity, powers down to -K.
inline VectorFieldLambda laurent_at_infinity(const RationalField& r, int K) {
    // r(lambda) = mu^{dd - dn} rev(num)(mu) / rev(den)(mu) with mu = 1/lambda.
    std::vector<cplx> rn(r.num.c.rbegin(), r.num.c.rend()), rd(r.den.c.rbegin(), r.den.c.rend());
    const int shift = r.den.degree() - r.num.degree();
    const auto q = detail::series_quotient(rn, rd, K + std::max(shift, 0) + std::max(-shift, 0));
    VectorFieldLambda v;
    for (std::size_t k = 0; k < q.size(); ++k) {
        const int p = -(static_cast<int>(k) + shift);
        if (p >= -K) v.set(p, q[k]);
    }
    return v;
}

/// t^{j+1} d/dt in the coordinate lambda, t = (lambda - 1)/(lambda + 1), with
/// its truncated Laurent expansions on the two circles of radius eps and 1/eps.
struct MobiusField {
    int j = 0;
    RationalField field;
    VectorFieldLambda near0;
    VectorFieldLambda nearInf;
};

/// (lambda - 1)^{j+1} (lambda + 1)^{1-j} / 2.
inline RationalField mobius_rational(int j) {
    if (j < -1) throw InvalidArgument("mobius_pushforward: j must be >= -1");
    const Polynomial minus({-1.0, 1.0}), plus({1.0, 1.0});
    Rational r{Polynomial::constant(0.5), Polynomial::constant(1.0)};
    for (int k = 0; k < j + 1; ++k) r.num = r.num * minus;
    for (int k = 0; k < 1 - j; ++k) r.num = r.num * plus;
    for (int k = 0; k < j - 1; ++k) r.den = r.den * plus;
    return r;
}

inline MobiusField mobius_pushforward(int j, double eps = 0.5, int K = 16) {
    MobiusField out{j, mobius_rational(j), {}, {}};
    // The expansion at 0 converges inside the smallest pole, the one at
    // infinity outside the largest; each must reach its circle.
    for (cplx z : polynomial_roots(out.field.den)) {
        const double m = std::abs(z);
        if (m <= eps * (1.0 + 1e-12) || m >= (1.0 - 1e-12) / eps)
            throw InvalidArgument("mobius_pushforward: a pole crosses a trust circle");
    }
    out.near0 = laurent_at_zero(out.field, K);
    out.nearInf = laurent_at_infinity(out.field, K);
    return out;
}

}  // namespace loopviro

#endif  // LOOPVIRO_MOBIUS_HPP
