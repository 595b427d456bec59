#include <gtest/gtest.h>

#include "loopviro/loopviro.hpp"

using namespace loopviro;

namespace {

LaurentLoop dyadic_loop(Rng& rng, int n, int K, Annulus a) {
    LaurentLoop L(n, K, a);
    for (int k = -K; k <= K; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) L.coeff(k)(i, j) = {rng.integer(-16, 16) / 8.0, rng.integer(-16, 16) / 8.0};
    return L;
}

}  // namespace

// --- projections --------------------------------------------------------------

TEST(Projections, StandardSplitIsExact) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto V = dyadic_loop(rng, 2, 5, circle(1.0));
        const auto s = pi_split_standard(V);
        EXPECT_EQ(coeff_distance(s.plus + s.minus, V), 0.0);
        EXPECT_EQ(coeff_distance(pi_split_standard(s.plus).plus, s.plus), 0.0);
        EXPECT_EQ(coeff_distance(pi_split_standard(s.minus).plus, LaurentLoop(2, 5, circle(1.0))), 0.0);
        for (int k = 0; k <= 5; ++k) EXPECT_TRUE(s.plus.coeff(k).isZero(0.0));
    }
}

TEST(Projections, TwoCircleSplitShapes) {
    AnnulusConfig cfg;
    Rng rng(2);
    const DoubleLoop W(dyadic_loop(rng, 2, 4, cfg.inner()), dyadic_loop(rng, 2, 4, cfg.outer()));
    const auto s = split_two_circle(W);
    // plus vanishes at 1; minus has no negative modes near 0 and no positive ones near infinity
    EXPECT_EQ(max_abs(s.plus.eval(1.0)), 0.0);
    for (int k = 1; k <= 4; ++k) {
        EXPECT_TRUE(s.minus.near0().coeff(-k).isZero(0.0));
        EXPECT_TRUE(s.minus.nearInf().coeff(k).isZero(0.0));
    }
    EXPECT_EQ(coeff_distance(s.plus.with_annulus(cfg.inner()) + s.minus.near0(), W.near0()), 0.0);
    EXPECT_EQ(coeff_distance(s.plus.with_annulus(cfg.outer()) + s.minus.nearInf(), W.nearInf()), 0.0);
}

TEST(Projections, HarmonicSplitCommutesWithReality) {
    AnnulusConfig cfg;
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto W = random_hmrc_field(rng, 2, 5, cfg, 0.3);
        const auto s = pi_split_harmonic(W, cfg.N);
        EXPECT_LT(hmrc_residual(s.plus, Level::algebra, 64), 1e-13);
        EXPECT_LT(hmrc_residual(s.minus, Level::algebra, 64), 1e-13);
    }
}

TEST(Projections, HarmonicSplitRejectsNonRealInput) {
    AnnulusConfig cfg;
    Rng rng(4);
    const DoubleLoop W(random_laurent(rng, 2, 3, cfg.inner(), 0.3), random_laurent(rng, 2, 3, cfg.outer(), 0.3));
    EXPECT_THROW(pi_split_harmonic(W, cfg.N), RealityViolation);
}

// --- Birkhoff -------------------------------------------------------------------

TEST(Birkhoff, StandardRoundTrip) {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const auto Q = exp_loop(random_laurent(rng, 2, 4, circle(1.0), 0.03), 256, 63);
        const auto p = birkhoff_standard(Q);
        EXPECT_LT(p.residual, 1e-9);
        EXPECT_LT(p.plus_membership, 1e-9);
        EXPECT_LT(p.minus_membership, 1e-9);
        // independent check of E F = Q at off-grid points
        for (cplx l : {cplx{0.6, 0.8}, cplx{-0.28, 0.96}})
            EXPECT_LT(max_abs(p.plus.eval(l) * p.minus.eval(l) - Q.eval(l)), 1e-10);
        // E(infinity) = I: no positive modes, constant term I
        EXPECT_LT(max_abs(p.plus.coeff(0) - identity(2)), 1e-10);
    }
}

TEST(Birkhoff, StandardFactorsOfATriangularLoop) {
    // Q = (I + a lambda^{-1} N)(I + b lambda N'), N, N' nilpotent: exact factors known.
    Mat Nu = zeros(2), Nl = zeros(2);
    Nu(0, 1) = 1.0;
    Nl(1, 0) = 1.0;
    LaurentLoop E(2, 1, circle(1.0)), F(2, 1, circle(1.0));
    E.coeff(0) = identity(2);
    E.coeff(-1) = 0.2 * Nu;
    F.coeff(0) = identity(2);
    F.coeff(1) = 0.15 * Nl;
    const auto Q = loop_mul(E, F);
    const auto p = birkhoff_standard(Q);
    EXPECT_LT(coeff_distance(p.plus, E), 1e-12);
    EXPECT_LT(coeff_distance(p.minus, F), 1e-12);
}

TEST(Birkhoff, HarmonicRoundTrip) {
    AnnulusConfig cfg;
    Rng rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        const auto Q = random_hmrc_loop(rng, 2, 6, cfg, 0.02);
        const auto p = birkhoff_harmonic(Q, cfg);
        EXPECT_LT(p.residual, 1e-9);
        EXPECT_LT(p.plus_membership, 1e-9);
        EXPECT_LT(p.minus_membership, 1e-9);
        EXPECT_LT(max_abs(p.plus.eval(1.0) - identity(2)), 1e-12);
        for (cplx l : {cplx{0.5, 0.0}, cplx{0.0, 2.0}}) {
            const Mat Fl = std::abs(l) < 1.0 ? p.minus.near0().eval(l) : p.minus.nearInf().eval(l);
            const Mat Ql = std::abs(l) < 1.0 ? Q.near0().eval(l) : Q.nearInf().eval(l);
            EXPECT_LT(max_abs(p.plus.eval(l) * Fl - Ql), 1e-10);
        }
    }
}

TEST(Birkhoff, IdentityFactorsTrivially) {
    AnnulusConfig cfg;
    const auto p = birkhoff_harmonic(DoubleLoop::identity(2, cfg), cfg);
    EXPECT_EQ(p.iterations, 0);
    EXPECT_LT(coeff_distance(p.plus, LaurentLoop::identity(2, cfg.full())), 1e-15);
}

TEST(Birkhoff, FarFromIdentityIsOutsideTheBigCell) {
    AnnulusConfig cfg;
    Rng rng(7);
    const auto Q = random_hmrc_loop(rng, 2, 3, cfg, 1.0);
    try {
        birkhoff_harmonic(Q, cfg);
        FAIL() << "expected OutsideBigCell";
    } catch (const OutsideBigCell& e) {
        EXPECT_GT(e.last_residual(), 0.0);
    }
}

TEST(Birkhoff, HarmonicRejectsNonRealInput) {
    AnnulusConfig cfg;
    Rng rng(8);
    const auto W = random_laurent(rng, 2, 3, cfg.inner(), 0.02);
    const DoubleLoop Q = exp_loop(DoubleLoop(W, random_laurent(rng, 2, 3, cfg.outer(), 0.02)), cfg);
    EXPECT_THROW(birkhoff_harmonic(Q, cfg), RealityViolation);
}

TEST(Birkhoff, DressingByIdentityIsTrivial) {
    Rng rng(9);
    const auto X = random_laurent(rng, 2, 2, circle(1.0), 0.02);
    auto neg = pi_split_standard(X).plus;
    const auto s_plus = exp_loop(neg, 256, 63);
    const auto out = dressing(LaurentLoop::identity(2, circle(1.0)), s_plus);
    EXPECT_LT(coeff_distance(out, s_plus), 1e-12);
}

// --- Iwasawa --------------------------------------------------------------------

TEST(Iwasawa, HandExample) {
    // g = [[0, -1], [1, 1]]: columns (0,1), (-1,1) give u = [[0,-1],[1,0]], r = [[1,1],[0,1]].
    Mat g(2, 2);
    g << 0.0, -1.0, 1.0, 1.0;
    const auto [u, r] = iwasawa_gram_schmidt(g);
    Mat u_ref(2, 2), r_ref(2, 2);
    u_ref << 0.0, -1.0, 1.0, 0.0;
    r_ref << 1.0, 1.0, 0.0, 1.0;
    EXPECT_LT(max_abs(u - u_ref), 1e-15);
    EXPECT_LT(max_abs(r - r_ref), 1e-15);
}

TEST(Iwasawa, RandomUnimodular) {
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat g = random_unimodular(rng, 3);
        const auto [u, r] = iwasawa_gram_schmidt(g);
        EXPECT_LT(max_abs(u * r - g), 1e-12);
        EXPECT_LT(max_abs(u.adjoint() * u - identity(3)), 1e-12);
        for (int a = 0; a < 3; ++a) {
            EXPECT_GT(r(a, a).real(), 0.0);
            EXPECT_EQ(r(a, a).imag(), 0.0);
            for (int b = 0; b < a; ++b) EXPECT_EQ(r(a, b), cplx{0.0});
        }
    }
}

TEST(Iwasawa, SingularInputThrows) {
    Mat g(2, 2);
    g << 1.0, 2.0, 2.0, 4.0;
    EXPECT_THROW(iwasawa_gram_schmidt(g), InvalidArgument);
    Mat d = 2.0 * identity(2);
    EXPECT_THROW(iwasawa_gram_schmidt(d), InvalidArgument);
}
