#ifndef LOOPVIRO_GRID_HPP
#define LOOPVIRO_GRID_HPP

#include "loopviro/core.hpp"

#include <optional>

namespace loopviro {

/// Rectangle [x0,x1] x [y0,y1] sampled on a square lattice of spacing h, with a
/// basepoint node (ip, jp).  Node (ix, iy) sits at z = (x0 + ix h) + i (y0 + iy h).
struct GridDomain {
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
    double h = 0.1;
    int ip = 0, jp = 0;

    /// Builds the lattice and snaps the basepoint (default: centre) to the nearest node.
    static GridDomain make(double x0, double x1, double y0, double y1, double h,
                           std::optional<cplx> p = std::nullopt) {
        if (!(h > 0.0)) throw InvalidArgument("grid spacing must be positive");
        if (!(x1 > x0) || !(y1 > y0)) throw InvalidArgument("grid rectangle is empty");
        GridDomain g{x0, x1, y0, y1, h, 0, 0};
        const cplx base = p.value_or(cplx{0.5 * (x0 + x1), 0.5 * (y0 + y1)});
        if (base.real() < x0 || base.real() > x1 || base.imag() < y0 || base.imag() > y1)
            throw InvalidArgument("basepoint outside the grid rectangle");
        g.ip = static_cast<int>(std::lround((base.real() - x0) / h));
        g.jp = static_cast<int>(std::lround((base.imag() - y0) / h));
        g.ip = std::clamp(g.ip, 0, g.nx() - 1);
        g.jp = std::clamp(g.jp, 0, g.ny() - 1);
        return g;
    }

    int nx() const { return static_cast<int>(std::lround((x1 - x0) / h)) + 1; }
    int ny() const { return static_cast<int>(std::lround((y1 - y0) / h)) + 1; }
    std::size_t size() const { return static_cast<std::size_t>(nx()) * static_cast<std::size_t>(ny()); }
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx()) + static_cast<std::size_t>(ix);
    }
    std::size_t base_index() const { return index(ip, jp); }
    cplx z(int ix, int iy) const { return {x0 + ix * h, y0 + iy * h}; }
    cplx basepoint() const { return z(ip, jp); }

    /// Grid with spacing h/2 over the same rectangle and basepoint.
    GridDomain refined() const { return make(x0, x1, y0, y1, 0.5 * h, basepoint()); }
};

/// One real number per node; nodes outside the evaluated interior hold 0.
struct ScalarField {
    GridDomain grid;
    std::vector<double> values;

    double max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
};

/// Unitary unimodular matrix per node.
struct HarmonicMapGrid {
    GridDomain grid;
    std::vector<Mat> values;

    const Mat& at(int ix, int iy) const { return values[grid.index(ix, iy)]; }
    int dim() const { return static_cast<int>(values.front().rows()); }

    /// max |s^* s - I| over the grid.
    double unitarity_defect() const {
        double d = 0.0;
        for (const auto& s : values) d = std::max(d, max_abs(s.adjoint() * s - identity(static_cast<int>(s.rows()))));
        return d;
    }
};

/// Maurer-Cartan fields A = s^{-1} s_z, B = s^{-1} s_zbar per node.
struct MaurerCartanPair {
    GridDomain grid;
    std::vector<Mat> A;
    std::vector<Mat> B;

    /// max |B + A^*|, which vanishes for unitary s.
    double reality_defect() const {
        double d = 0.0;
        for (std::size_t k = 0; k < A.size(); ++k) d = std::max(d, max_abs(B[k] + A[k].adjoint()));
        return d;
    }
};

namespace detail {

enum class Axis { x, y };

/// Second-order derivative of a node field along one axis: central in the
/// interior, three-point one-sided at the edges.
template <class T, class Get>
T grid_derivative(const GridDomain& g, int ix, int iy, Axis axis, Get&& get) {
    const int n = axis == Axis::x ? g.nx() : g.ny();
    const int i = axis == Axis::x ? ix : iy;
    auto at = [&](int k) { return axis == Axis::x ? get(k, iy) : get(ix, k); };
    const double h = g.h;
    if (i > 0 && i < n - 1) return (at(i + 1) - at(i - 1)) / (2.0 * h);
    if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
}

}  // namespace detail

}  // namespace loopviro

#endif  // LOOPVIRO_GRID_HPP
