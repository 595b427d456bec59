// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "loopviro/loopviro.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

using namespace loopviro;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s %2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

LaurentLoop dyadic_loop(Rng& rng, int n, int K, Annulus a) {
    LaurentLoop L(n, K, a);
    for (int k = -K; k <= K; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) L.coeff(k)(i, j) = {rng.integer(-64, 64) / 16.0, rng.integer(-64, 64) / 16.0};
    return L;
}

// Mode-preserving reality involution of the unit-circle triple, c_k -> -c_k^*.
LaurentLoop standard_theta(const LaurentLoop& V) {
    LaurentLoop out = V;
    for (int k = -V.order(); k <= V.order(); ++k) out.coeff(k) = -V.coeff(k).adjoint();
    return out;
}

LaurentLoop random_plus(Rng& rng, const AnnulusConfig& cfg) {
    return birkhoff_harmonic(random_hmrc_loop(rng, 2, 4, cfg, 0.02), cfg).plus;
}

const Rational uniton_f = parse_rational("z");

// ---------------------------------------------------------------------------

void factorization_round_trip() {
    AnnulusConfig cfg;  // n = 2, K = 6, N = 256, eps = 0.5
    Rng rng = Rng(7).split("criterion1");
    double res = 0.0, mem = 0.0, slowest = 0.0;
    int failed = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto Q = random_hmrc_loop(rng, 2, 6, cfg, 0.02);
        const auto t0 = Clock::now();
        try {
            const auto p = birkhoff_harmonic(Q, cfg);
            res = std::max(res, p.residual);
            mem = std::max({mem, p.plus_membership, p.minus_membership});
        } catch (const Error&) {
            ++failed;
        }
        slowest = std::max(slowest, seconds_since(t0));
    }
    verdict(1, "factorization_round_trip", failed == 0 && res <= 1e-9 && mem <= 1e-9 && slowest < 1.0,
            fmt("residual %.2e membership %.2e slowest %.3fs failures %d", res, mem, slowest, failed));
}

void projection_algebra() {
    AnnulusConfig cfg;
    Rng rng = Rng(7).split("criterion2");
    double exact = 0.0, comm = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        // unit circle
        const auto V = dyadic_loop(rng, 2, 6, circle(1.0));
        const auto s = pi_split_standard(V);
        exact = std::max({exact, coeff_distance(s.plus + s.minus, V),
                          coeff_distance(pi_split_standard(s.plus).plus, s.plus)});
        const auto Vr = random_laurent(rng, 2, 6, circle(1.0), 0.5);
        comm = std::max(comm, coeff_distance(pi_split_standard(standard_theta(Vr)).plus,
                                             standard_theta(pi_split_standard(Vr).plus)));
        // two circles
        const DoubleLoop W(dyadic_loop(rng, 2, 6, cfg.inner()), dyadic_loop(rng, 2, 6, cfg.outer()));
        const auto t = split_two_circle(W);
        const auto p0 = t.plus.with_annulus(cfg.inner()), pInf = t.plus.with_annulus(cfg.outer());
        exact = std::max({exact, coeff_distance(p0 + t.minus.near0(), W.near0()),
                          coeff_distance(pInf + t.minus.nearInf(), W.nearInf()),
                          coeff_distance(split_two_circle(DoubleLoop(p0, pInf)).plus, t.plus)});
        const auto Wr = random_hmrc_field(rng, 2, 6, cfg, 0.5);
        comm = std::max(comm, coeff_distance(pi_split_harmonic(hmrc_involution(Wr, Level::algebra), cfg.N).plus,
                                             hmrc_involution(pi_split_harmonic(Wr, cfg.N).plus, Level::algebra)));
    }
    verdict(2, "projection_algebra", exact == 0.0 && comm <= 1e-12,
            fmt("idempotence/reassembly %.2e (dyadic data) reality commutation %.2e", exact, comm));
}

void gram_schmidt() {
    Rng rng = Rng(7).split("criterion3");
    double uni = 0.0, rec = 0.0;
    bool triangular = true;
    for (int trial = 0; trial < 100; ++trial) {
        const Mat g = random_unimodular(rng, 3);
        const auto [u, r] = iwasawa_gram_schmidt(g);
        uni = std::max(uni, max_abs(u.adjoint() * u - identity(3)));
        rec = std::max(rec, max_abs(u * r - g));
        for (int a = 0; a < 3; ++a) {
            triangular = triangular && r(a, a).imag() == 0.0 && r(a, a).real() > 0.0;
            for (int b = 0; b < a; ++b) triangular = triangular && r(a, b) == cplx{0.0};
        }
    }
    verdict(3, "gram_schmidt_iwasawa", uni <= 1e-12 && rec <= 1e-12 && triangular,
            fmt("u*u-I %.2e ur-g %.2e triangular %s", uni, rec, triangular ? "yes" : "no"));
}

void extended_construction() {
    AnnulusConfig cfg;
    auto residuals = [&](double h) {
        const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, h);
        return extended_residuals(uniton_extended(uniton_f, g, cfg).solution);
    };
    const auto r1 = residuals(0.02);
    const auto r2 = residuals(0.01);
    const double ratio = r1.lambda_constancy / r2.lambda_constancy;
    const bool pass = r1.lambda_constancy <= 1e-5 && r1.e1 <= 1e-10 && r1.hmrc <= 1e-10 && ratio >= 3.0 && ratio <= 5.0;
    verdict(4, "extended_construction", pass,
            fmt("lambda-constancy %.3e (threshold 1e-5) E_1 %.1e HMRC %.1e halving ratio %.3f", r1.lambda_constancy,
                r1.e1, r1.hmrc, ratio));
}

void ode_round_trip() {
    AnnulusConfig cfg;
    cfg.N = 64;
    cfg.K = 8;
    const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.02);
    const auto E = extended_from_connection(uniton_maurer_cartan(uniton_f, g), cfg);
    const auto ref = uniton_extended(uniton_f, g, cfg, UnitonVariant::lambda);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        for (cplx l : {cplx{-1.0}, cplx{0.0, 0.5}, cplx{0.0, 2.0}})
            worst = std::max(worst, max_abs(E.loops[k]->eval(l) - ref.loops[k]->eval(l)));
    verdict(5, "ode_round_trip", worst <= 1e-5, fmt("max deviation %.2e at lambda in {-1, 0.5i, 2i}", worst));
}

void tangency() {
    AnnulusConfig cfg;
    const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.05);
    const auto E = uniton_extended(uniton_f, g, cfg, UnitonVariant::lambda);
    // A defect at roundoff level means the action changes nothing, which is
    // trivially second order; the ratio test only applies above that floor.
    constexpr double floor = 1e-12;
    bool pass = true;
    std::ostringstream detail;
    for (int j = 0; j <= 2; ++j) {
        const auto rep = tangency_check(E, VectorFieldLambda::generator(j));
        double dmax = 0.0;
        bool control = true;
        for (const auto& r : rep.rows) {
            dmax = std::max(dmax, r.defect);
            control = control && r.control_defect >= 1e-3 * r.t;
        }
        const bool ok = (rep.ratio_spread() <= 3.0 || dmax <= floor) && control;
        pass = pass && ok;
        detail << "L" << j << ": spread " << fmt("%.3f", rep.ratio_spread()) << " max defect "
               << fmt("%.1e", dmax) << " control " << (control ? "ok" : "weak") << "; ";
    }
    // group flow on a coarse grid, for the record
    AnnulusConfig coarse;
    coarse.N = 128;
    const auto gc = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.1);
    const auto Ec = uniton_extended(uniton_f, gc, coarse, UnitonVariant::lambda);
    const double base = extended_residuals(Ec).lambda_constancy;
    const auto flowed = group_action(HoloMap{VectorFieldLambda::generator(0), 1e-2}, Ec);
    const double after = extended_residuals(flowed).lambda_constancy;
    pass = pass && after <= 10.0 * base;
    detail << fmt("group flow L0 t=1e-2 residual %.2e vs %.2e", after, base);
    verdict(6, "tangency", pass, detail.str());
}

void bracket_representation() {
    AnnulusConfig cfg;
    const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.05);
    const auto E = uniton_extended(uniton_f, g, cfg, UnitonVariant::lambda);
    Rng rng = Rng(7).split("criterion7");
    const auto P = random_plus(rng, cfg);
    double uniton = 0.0, generic = 0.0;
    for (auto [j, k] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
        const auto V = VectorFieldLambda::generator(j), W = VectorFieldLambda::generator(k);
        for (auto [ix, iy] : {std::pair{30, 25}, std::pair{5, 36}})
            uniton = std::max(uniton, bracket_representation_check(V, W, E.at(ix, iy), cfg, 1e-4));
        generic = std::max(generic, bracket_representation_check(V, W, P, cfg, 1e-4));
    }
    verdict(7, "bracket_representation", uniton <= 1e-4 && generic <= 1e-4,
            fmt("uniton loops %.2e generic plus loop %.2e", uniton, generic));
}

void reality_correspondence() {
    AnnulusConfig cfg;
    VectorFieldLambda l0t, l2t;
    l0t.set(1, -1.0);
    l2t.set(-1, -1.0);
    const bool table = reality_extend(VectorFieldLambda::generator(0)) == l0t &&
                       reality_extend(VectorFieldLambda::generator(2)) == l2t;
    const auto g = GridDomain::make(-1.0, 1.0, -1.0, 1.0, 0.05);
    const auto E = uniton_extended(uniton_f, g, cfg, UnitonVariant::lambda);
    Rng rng = Rng(7).split("criterion8");
    const auto P = random_plus(rng, cfg);
    ActionOptions flip;
    flip.flip_infinity_sign = true;
    double kept = 0.0, broken_uniton = INFINITY, broken_generic = INFINITY;
    for (const LaurentLoop* L : {&E.at(30, 25), &P})
        for (int j = 0; j <= 2; ++j) {
            const auto V = VectorFieldLambda::generator(j);
            kept = std::max(kept, hmrc_residual(virasoro_generator_field(V, *L, cfg), Level::algebra, cfg.N));
        }
    broken_uniton = hmrc_residual(virasoro_generator_field(VectorFieldLambda::generator(0), E.at(30, 25), cfg, flip),
                                  Level::algebra, cfg.N);
    for (int j = 0; j <= 2; ++j)
        broken_generic = std::min(broken_generic, hmrc_residual(virasoro_generator_field(VectorFieldLambda::generator(j),
                                                                                          P, cfg, flip),
                                                                 Level::algebra, cfg.N));
    verdict(8, "reality_correspondence", table && kept <= 1e-10 && broken_uniton >= 1e-3 && broken_generic >= 1e-3,
            fmt("table %s HMRC kept %.1e flipped: uniton L0 %.2e generic min over L0..L2 %.2e",
                table ? "exact" : "wrong", kept, broken_uniton, broken_generic));
}

void mobius_embedding() {
    // closed forms written out independently of the generator
    const Polynomial one = Polynomial::constant(1.0);
    const std::vector<std::pair<int, Rational>> closed{
        {-1, {Polynomial({0.5, 1.0, 0.5}), one}},
        {0, {Polynomial({-0.5, 0.0, 0.5}), one}},
        {1, {Polynomial({0.5, -1.0, 0.5}), one}},
        {2, {Polynomial({-0.5, 1.5, -1.5, 0.5}), Polynomial({1.0, 1.0})}},
    };
    bool forms = true, brackets = true;
    for (const auto& [j, r] : closed) forms = forms && rational_equal(mobius_pushforward(j).field, r);
    for (int j = -1; j <= 2; ++j)
        for (int k = -1; k <= 2; ++k) {
            if (j + k < -1) continue;
            const auto P = mobius_rational(j + k);
            brackets = brackets &&
                       rational_equal(rational_bracket(mobius_rational(j), mobius_rational(k)), {cplx(k - j) * P.num, P.den});
        }
    verdict(9, "mobius_embedding", forms && brackets,
            fmt("closed forms %s, brackets (k-j)P(j+k) %s", forms ? "exact" : "differ", brackets ? "exact" : "differ"));
}

void schwarz_decoupling() {
    AnnulusConfig cfg;
    Rng rng = Rng(7).split("criterion10");
    double add = 0.0, scale = 0.0, general = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        LaurentLoop X(2, 2, cfg.full());
        for (int k = -2; k <= 2; ++k) {
            const Mat m = random_traceless(rng, 2, 0.05 / cfg.full().weight(k));
            X.coeff(k) = 0.5 * (m - m.adjoint());
        }
        const auto E = exp_loop(X, cfg.N, cfg.work_order());
        VectorFieldLambda w, v;
        for (int p = 0; p <= 3; ++p) w.set(p, rng.uniform(-1.0, 1.0));
        for (int p = -2; p <= 2; ++p) v.set(p, rng.uniform(-1.0, 1.0));
        const auto d = schwarz_action({w, v}, E, cfg);
        add = std::max(add, coeff_distance(d, schwarz_action({w, {}}, E, cfg) + schwarz_action({{}, v}, E, cfg)));
        for (double a : {2.0, -1.0, 0.5})
            scale = std::max(scale, coeff_distance(schwarz_action({cplx{a} * w, cplx{a} * v}, E, cfg), cplx{a} * d));
        const double a = 0.3, b = -1.7;
        general = std::max(general, coeff_distance(schwarz_action({cplx{a} * w, cplx{b} * v}, E, cfg),
                                                   cplx{a} * schwarz_action({w, {}}, E, cfg) +
                                                       cplx{b} * schwarz_action({{}, v}, E, cfg)));
    }
    verdict(10, "schwarz_decoupling", add == 0.0 && scale == 0.0 && general <= 1e-15,
            fmt("additivity %.1e, scaling by 2, -1, 1/2 %.1e, general real coefficients %.1e", add, scale, general));
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    factorization_round_trip();
    projection_algebra();
    gram_schmidt();
    extended_construction();
    ode_round_trip();
    tangency();
    bracket_representation();
    reality_correspondence();
    mobius_embedding();
    schwarz_decoupling();
    std::printf("%d of 10 criteria failed, %.1fs\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
