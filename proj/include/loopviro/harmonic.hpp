#ifndef LOOPVIRO_HARMONIC_HPP
#define LOOPVIRO_HARMONIC_HPP

#include "loopviro/grid.hpp"

#include <utility>

namespace loopviro {

/// A = s^{-1} s_z and B = s^{-1} s_zbar with s_z = (s_x - i s_y)/2 and
/// s_zbar = (s_x + i s_y)/2 by second-order finite differences.
inline MaurerCartanPair maurer_cartan(const HarmonicMapGrid& s) {
    const auto& g = s.grid;
    if (g.nx() < 3 || g.ny() < 3) throw InvalidArgument("maurer_cartan needs at least a 3x3 grid");
    MaurerCartanPair mc{g, std::vector<Mat>(g.size()), std::vector<Mat>(g.size())};
    auto get = [&](int ix, int iy) -> const Mat& { return s.at(ix, iy); };
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const Mat sx = detail::grid_derivative<Mat>(g, ix, iy, detail::Axis::x, get);
            const Mat sy = detail::grid_derivative<Mat>(g, ix, iy, detail::Axis::y, get);
            const Mat sinv = s.at(ix, iy).inverse();
            mc.A[g.index(ix, iy)] = sinv * (0.5 * (sx - I_unit * sy));
            mc.B[g.index(ix, iy)] = sinv * (0.5 * (sx + I_unit * sy));
        }
    return mc;
}

/// Per-node max-norm of the discretized Euler-Lagrange expression
/// d/dx (s^{-1} s_x) + d/dy (s^{-1} s_y), on nodes at least two steps from the edge.
inline ScalarField harmonic_residual(const HarmonicMapGrid& s) {
    const auto& g = s.grid;
    if (g.nx() < 5 || g.ny() < 5) throw InvalidArgument("harmonic_residual needs at least a 5x5 grid");
    const int n = s.dim();
    std::vector<Mat> Mx(g.size(), zeros(n)), My(g.size(), zeros(n));
    for (int iy = 1; iy < g.ny() - 1; ++iy)
        for (int ix = 1; ix < g.nx() - 1; ++ix) {
            const Mat sinv = s.at(ix, iy).inverse();
            Mx[g.index(ix, iy)] = sinv * (s.at(ix + 1, iy) - s.at(ix - 1, iy)) / (2.0 * g.h);
            My[g.index(ix, iy)] = sinv * (s.at(ix, iy + 1) - s.at(ix, iy - 1)) / (2.0 * g.h);
        }
    ScalarField out{g, std::vector<double>(g.size(), 0.0)};
    for (int iy = 2; iy < g.ny() - 2; ++iy)
        for (int ix = 2; ix < g.nx() - 2; ++ix) {
            const Mat el = (Mx[g.index(ix + 1, iy)] - Mx[g.index(ix - 1, iy)]) / (2.0 * g.h) +
                           (My[g.index(ix, iy + 1)] - My[g.index(ix, iy - 1)]) / (2.0 * g.h);
            out.values[g.index(ix, iy)] = max_abs(el);
        }
    return out;
}

/// Residuals of A_zbar + B_z = 0 and A_zbar - B_z = [A, B] on interior nodes.
inline std::pair<ScalarField, ScalarField> zero_curvature_residual(const MaurerCartanPair& mc) {
    const auto& g = mc.grid;
    if (g.nx() < 3 || g.ny() < 3) throw InvalidArgument("zero_curvature_residual needs at least a 3x3 grid");
    ScalarField first{g, std::vector<double>(g.size(), 0.0)};
    ScalarField second{g, std::vector<double>(g.size(), 0.0)};
    auto d = [&](const std::vector<Mat>& f, int ix, int iy, detail::Axis axis) {
        return detail::grid_derivative<Mat>(g, ix, iy, axis,
                                            [&](int a, int b) -> const Mat& { return f[g.index(a, b)]; });
    };
    for (int iy = 1; iy < g.ny() - 1; ++iy)
        for (int ix = 1; ix < g.nx() - 1; ++ix) {
            const Mat Ax = d(mc.A, ix, iy, detail::Axis::x), Ay = d(mc.A, ix, iy, detail::Axis::y);
            const Mat Bx = d(mc.B, ix, iy, detail::Axis::x), By = d(mc.B, ix, iy, detail::Axis::y);
            const Mat A_zbar = 0.5 * (Ax + I_unit * Ay);
            const Mat B_z = 0.5 * (Bx - I_unit * By);
            const auto k = g.index(ix, iy);
            first.values[k] = max_abs(A_zbar + B_z);
            second.values[k] = max_abs(A_zbar - B_z - commutator(mc.A[k], mc.B[k]));
        }
    return {first, second};
}

}  // namespace loopviro

#endif  // LOOPVIRO_HARMONIC_HPP
