#include <gtest/gtest.h>

#include "loopviro/loopviro.hpp"

using namespace loopviro;

namespace {

// s = diag(e^{i a x}, e^{-i a x}) is a geodesic, hence harmonic.
HarmonicMapGrid geodesic(const GridDomain& g, double a) {
    HarmonicMapGrid s{g, std::vector<Mat>(g.size())};
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const double x = g.z(ix, iy).real();
            Mat m = zeros(2);
            m(0, 0) = std::exp(I_unit * a * x);
            m(1, 1) = std::exp(-I_unit * a * x);
            s.values[g.index(ix, iy)] = m;
        }
    return s;
}

AnnulusConfig small_cfg() {
    AnnulusConfig c;
    c.N = 32;
    c.K = 4;
    return c;
}

}  // namespace

// --- grid -----------------------------------------------------------------------

TEST(Grid, SnapsBasepointAndRefines) {
    const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.1, cplx{0.23, -0.46});
    EXPECT_EQ(g.nx(), 21);
    EXPECT_EQ(g.ny(), 21);
    EXPECT_NEAR(g.basepoint().real(), 0.2, 1e-12);
    EXPECT_NEAR(g.basepoint().imag(), -0.5, 1e-12);
    const auto r = g.refined();
    EXPECT_EQ(r.nx(), 41);
    EXPECT_NEAR(std::abs(r.basepoint() - g.basepoint()), 0.0, 1e-12);
    EXPECT_EQ(GridDomain::make(0.0, 1.0, 0.0, 1.0, 0.25).basepoint(), cplx(0.5, 0.5));
}

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(GridDomain::make(0.0, 1.0, 0.0, 1.0, 0.0), InvalidArgument);
    EXPECT_THROW(GridDomain::make(1.0, 0.0, 0.0, 1.0, 0.1), InvalidArgument);
    EXPECT_THROW(GridDomain::make(0.0, 1.0, 0.0, 1.0, 0.1, cplx{2.0, 0.0}), InvalidArgument);
}

// --- Maurer-Cartan and harmonicity ---------------------------------------------

TEST(MaurerCartan, GeodesicHasConstantFields) {
    // A = B = (i a / 2) diag(1, -1); the central difference reproduces i sin(a h)/h.
    const double a = 1.3, h = 0.05;
    const auto g = GridDomain::make(-1.0, 1.0, -0.5, 0.5, h);
    const auto mc = maurer_cartan(geodesic(g, a));
    Mat ref = zeros(2);
    ref(0, 0) = 0.5 * I_unit * std::sin(a * h) / h;
    ref(1, 1) = -ref(0, 0);
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 1; ix < g.nx() - 1; ++ix) {
            EXPECT_LT(max_abs(mc.A[g.index(ix, iy)] - ref), 1e-12);
            EXPECT_LT(max_abs(mc.B[g.index(ix, iy)] - ref), 1e-12);
        }
    EXPECT_LT(mc.reality_defect(), 1e-3);
}

TEST(MaurerCartan, EdgeStencilIsSecondOrder) {
    const double a = 1.3;
    auto edge_error = [&](double h) {
        const auto g = GridDomain::make(0.0, 1.0, 0.0, 1.0, h);
        const auto mc = maurer_cartan(geodesic(g, a));
        return std::abs(mc.A[g.index(0, 0)](0, 0) - 0.5 * I_unit * a);
    };
    const double ratio = edge_error(0.05) / edge_error(0.025);
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Harmonic, GeodesicResidualVanishes) {
    const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.1);
    EXPECT_LT(harmonic_residual(geodesic(g, 0.9)).max(), 1e-12);
}

TEST(Harmonic, NonHarmonicMapIsDetected) {
    // diag(e^{i a x^2}, e^{-i a x^2}): d/dx(s^{-1} s_x) = 2 i a diag(1, -1).
    const double a = 0.7;
    const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.1);
    HarmonicMapGrid s{g, std::vector<Mat>(g.size())};
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const double x = g.z(ix, iy).real();
            Mat m = zeros(2);
            m(0, 0) = std::exp(I_unit * a * x * x);
            m(1, 1) = std::exp(-I_unit * a * x * x);
            s.values[g.index(ix, iy)] = m;
        }
    EXPECT_NEAR(harmonic_residual(s).max(), 2.0 * a, 2e-2);
}

TEST(Harmonic, SmallGridsRejected) {
    const auto g = GridDomain::make(0.0, 0.3, 0.0, 0.3, 0.1);
    EXPECT_THROW(harmonic_residual(geodesic(g, 1.0)), InvalidArgument);
}

// --- uniton ---------------------------------------------------------------------

TEST(Uniton, LineProjectionProperties) {
    for (cplx w : {cplx{0.0}, cplx{0.3, -1.2}, cplx{5.0, 2.0}}) {
        const Mat p = line_projection(w);
        EXPECT_LT(max_abs(p * p - p), 1e-14);
        EXPECT_LT(max_abs(p - p.adjoint()), 1e-15);
        EXPECT_NEAR(p.trace().real(), 1.0, 1e-14);
        // derivative against a complex-step difference along f(z) = z
        const double h = 1e-6;
        const Mat fd = (line_projection(w + h) - line_projection(w - h)) / (2.0 * h) -
                       I_unit * (line_projection(w + I_unit * h) - line_projection(w - I_unit * h)) / (2.0 * h);
        EXPECT_LT(max_abs(line_projection_dz(w, 1.0) - 0.5 * fd), 1e-8);
    }
}

TEST(Uniton, ClosedFormMaurerCartanMatchesDifferences) {
    const auto f = parse_rational("z");
    auto err = [&](double h) {
        const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, h);
        const auto exact = uniton_maurer_cartan(f, g);
        const auto fd = maurer_cartan(uniton_map(f, g));
        double e = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) e = std::max(e, max_abs(exact.A[k] - fd.A[k]));
        return e;
    };
    const double e1 = err(0.05), e2 = err(0.025);
    EXPECT_LT(e1, 1e-2);
    EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Uniton, ClosedFormSatisfiesZeroCurvature) {
    const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, 0.025);
    const auto [first, second] = zero_curvature_residual(uniton_maurer_cartan(parse_rational("z"), g));
    EXPECT_LT(first.max(), 1e-2);
    EXPECT_LT(second.max(), 1e-2);
}

TEST(Uniton, ExtendedSolutionNormalizations) {
    const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, 0.1, cplx{0.1, 0.2});
    const auto cfg = small_cfg();
    const auto sel = uniton_extended(parse_rational("z"), g, cfg);
    EXPECT_EQ(sel.variant, UnitonVariant::lambda);
    EXPECT_GT(sel.other_residual, 100.0 * sel.residual);
    const auto r = extended_residuals(sel.solution);
    EXPECT_LT(r.e1, 1e-15);
    EXPECT_LT(r.basepoint, 1e-15);
    EXPECT_LT(r.hmrc, 1e-14);
    EXPECT_LT(r.unitary, 1e-14);
}

TEST(Uniton, RestrictionIsTranslatedMap) {
    // E_{-1}(z) = s(p) s(z) with s = 2 pi - I.
    const auto f = parse_rational("(z+1)/(2-z)");
    const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, 0.1);
    const auto E = uniton_extended(f, g, small_cfg(), UnitonVariant::lambda);
    const auto s = uniton_map(f, g);
    const auto r = restrict_harmonic(E);
    const Mat& sp = s.values[g.base_index()];
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_LT(max_abs(r.values[k] - sp * s.values[k]), 1e-14);
}

TEST(Uniton, ConstancyResidualIsSecondOrder) {
    const auto f = parse_rational("z");
    auto res = [&](double h) {
        const auto g = GridDomain::make(-0.4, 0.4, -0.4, 0.4, h);
        return extended_residuals(uniton_extended(f, g, small_cfg(), UnitonVariant::lambda)).lambda_constancy;
    };
    const double ratio = res(0.1) / res(0.05);
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 5.0);
}

TEST(Uniton, FourthOrderStencilConverges) {
    const auto f = parse_rational("z");
    auto res = [&](double h) {
        const auto g = GridDomain::make(-0.4, 0.4, -0.4, 0.4, h);
        return extended_residuals(uniton_extended(f, g, small_cfg(), UnitonVariant::lambda), {4, 16, 64})
            .lambda_constancy;
    };
    EXPECT_GT(res(0.1) / res(0.05), 10.0);
}

TEST(Uniton, PoleOnGridRejected) {
    const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, 0.1);
    EXPECT_THROW(uniton_extended(parse_rational("1/z"), g, small_cfg()), InvalidArgument);
}

TEST(Extended, IdentityHasNoResidual) {
    const auto g = GridDomain::make(0.0, 0.5, 0.0, 0.5, 0.1);
    const auto r = extended_residuals(ExtendedSolution::identity(g, small_cfg(), 2));
    EXPECT_EQ(r.lambda_constancy, 0.0);
    EXPECT_EQ(r.e1, 0.0);
    EXPECT_EQ(r.hmrc, 0.0);
}

TEST(Extended, RestrictionRejectsExcludedNodes) {
    const auto g = GridDomain::make(0.0, 0.5, 0.0, 0.5, 0.1);
    auto E = ExtendedSolution::identity(g, small_cfg(), 2);
    E.loops[0].reset();
    EXPECT_EQ(E.excluded(), 1u);
    EXPECT_THROW(restrict_harmonic(E), InvalidArgument);
}

TEST(Connection, IntegratedFrameMatchesClosedForm) {
    const auto f = parse_rational("z");
    const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, 0.05);
    const auto cfg = small_cfg();
    const auto E = extended_from_connection(uniton_maurer_cartan(f, g), cfg);
    const auto ref = uniton_extended(f, g, cfg, UnitonVariant::lambda);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        for (cplx l : {cplx{-1.0}, cplx{0.0, 0.5}, cplx{0.0, 2.0}})
            worst = std::max(worst, max_abs(E.loops[k]->eval(l) - ref.loops[k]->eval(l)));
    EXPECT_LT(worst, 1e-5);
}

TEST(Connection, PathIndependenceOfFlatFrame) {
    const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, 0.05);
    const auto mc = uniton_maurer_cartan(parse_rational("z"), g);
    const auto a = flat_frame_at(mc, -1.0, PathOrder::x_first);
    const auto b = flat_frame_at(mc, -1.0, PathOrder::y_first);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, max_abs(a[k] - b[k]));
    EXPECT_LT(worst, 1e-6);
    EXPECT_LT(max_abs(a[g.base_index()] - identity(2)), 1e-15);
}

TEST(Connection, FrameAtOneIsIdentity) {
    const auto g = GridDomain::make(-0.5, 0.5, -0.5, 0.5, 0.1);
    const auto F = flat_frame_at(uniton_maurer_cartan(parse_rational("z"), g), 1.0);
    for (const auto& m : F) EXPECT_LT(max_abs(m - identity(2)), 1e-15);
}
