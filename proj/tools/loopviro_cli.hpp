#ifndef LOOPVIRO_TOOLS_CLI_HPP
#define LOOPVIRO_TOOLS_CLI_HPP

#include "loopviro/loopviro.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>

namespace loopviro::cli {

using json = nlohmann::json;

enum ExitCode { ok = 0, residual_failure = 1, malformed = 2 };

struct Options {
    RunConfig cfg;
    std::string grid;  // "x0,x1,y0,y1,h"
    std::string p;     // "x,y"
    int fd_order = 2;

    // per-command
    std::string f = "z";
    std::string triple = "harmonic";
    int j = 0, k = 1;
    double t = 1e-3;
    double h = 1e-4;
    std::string jrange = "0..2";
    std::string w_field, v_field;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, std::size_t expect, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw InvalidArgument(std::string("bad number in ") + what + ": '" + cell + "'");
        }
    }
    if (out.size() != expect) throw InvalidArgument(std::string(what) + " needs " + std::to_string(expect) + " values");
    return out;
}

inline std::pair<int, int> parse_range(const std::string& s) {
    const auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            const int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw InvalidArgument("bad index range '" + s + "'");
    }
}

/// "p:c,p:c" with real c, e.g. "1:0.5,2:-1" for 0.5 lambda + ... - lambda^2.
inline VectorFieldLambda parse_real_field(const std::string& s) {
    VectorFieldLambda v;
    if (s.empty()) return v;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) {
        const auto colon = cell.find(':');
        if (colon == std::string::npos) throw InvalidArgument("field term must be power:coeff, got '" + cell + "'");
        try {
            const int p = std::stoi(cell.substr(0, colon));
            v.set(p, v.coeff(p) + std::stod(cell.substr(colon + 1)));
        } catch (const std::exception&) {
            throw InvalidArgument("bad field term '" + cell + "'");
        }
    }
    return v;
}

inline json read_json(const std::string& path) {
    if (path.empty()) throw InvalidArgument("--in is required");
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_json(const std::string& path, const json& j) {
    if (!path.empty()) atomic_write(path, j.dump() + "\n");
}

inline void add_extended_rows(ResidualReport& rep, const ExtendedSolution& E, const Options& o) {
    const auto& tol = o.cfg.tol;
    const auto r = extended_residuals(E, {o.fd_order, 16, 64});
    rep.add("lambda_constancy", r.lambda_constancy, tol.pde);
    rep.add("e1_identity", r.e1, tol.reality);
    rep.add("basepoint_identity", r.basepoint, tol.reality);
    rep.add("hmrc", r.hmrc, tol.reality);
    rep.add("truncation", r.tail, o.cfg.annulus.trunc_tol);
    rep.add("unitary_on_circle", r.unitary, tol.unitary);
    rep.notes["evaluated_nodes"] = r.evaluated_nodes;
    rep.notes["excluded_nodes"] = E.excluded();
    rep.notes["fd_order"] = o.fd_order;
    if (E.excluded() == 0 && E.grid.nx() >= 5 && E.grid.ny() >= 5) {
        try {
            rep.add("harmonic_residual", harmonic_residual(restrict_harmonic(E)).max(), tol.pde);
        } catch (const RealityViolation& e) {
            rep.add("restrict_unitarity", INFINITY, tol.unitary);
            rep.notes["restrict_error"] = e.what();
        }
    }
}

// --- subcommands -----------------------------------------------------------

inline ResidualReport gen_uniton(const Options& o) {
    ResidualReport rep;
    const auto f = parse_rational(o.f);
    const auto g = o.cfg.grid();
    try {
        const auto sel = uniton_extended(f, g, o.cfg.annulus);
        rep.notes["variant"] = to_string(sel.variant);
        rep.notes["variant_residual"] = sel.residual;
        rep.notes["rejected_variant_residual"] = sel.other_residual;
        write_json(o.cfg.out, io::to_json(sel.solution));
        add_extended_rows(rep, sel.solution, o);
    } catch (const ConstructionError& e) {
        rep.add("variant_selection", INFINITY, 0.0);
        rep.notes["error"] = e.what();
    }
    return rep;
}

inline ResidualReport check_extended(const Options& o) {
    ResidualReport rep;
    const auto E = io::extended_from_json(read_json(o.cfg.in));
    rep.notes["variant"] = E.variant;
    add_extended_rows(rep, E, o);
    return rep;
}

inline BirkhoffOptions birkhoff_options(const Options& o) {
    BirkhoffOptions b;
    b.tol = o.cfg.tol.factorization;
    b.hmrc_tol = o.cfg.tol.reality;
    b.drift_tol = o.cfg.tol.hmrc_input;
    return b;
}

inline ResidualReport factorize(const Options& o) {
    ResidualReport rep;
    const auto& tol = o.cfg.tol;
    const auto in = read_json(o.cfg.in);
    auto record = [&](const auto& pair) {
        rep.add("residual", pair.residual, tol.factorization);
        rep.add("plus_membership", pair.plus_membership, tol.factorization);
        rep.add("minus_membership", pair.minus_membership, tol.factorization);
        rep.notes["iterations"] = pair.iterations;
        write_json(o.cfg.out, io::to_json(pair));
    };
    try {
        if (o.triple == "standard") {
            record(birkhoff_standard(io::loop_from_json(in), birkhoff_options(o), o.cfg.annulus.N));
        } else if (o.triple == "harmonic") {
            record(birkhoff_harmonic(io::double_loop_from_json(in), o.cfg.annulus, birkhoff_options(o)));
        } else {
            throw InvalidArgument("--triple must be standard or harmonic");
        }
    } catch (const OutsideBigCell& e) {
        rep.add("residual", e.last_residual(), tol.factorization);
        rep.notes["error"] = e.what();
    } catch (const RealityViolation& e) {
        rep.add("hmrc", INFINITY, tol.reality);
        rep.notes["error"] = e.what();
    }
    return rep;
}

inline ResidualReport project(const Options& o) {
    ResidualReport rep;
    const auto& tol = o.cfg.tol;
    const auto in = read_json(o.cfg.in);
    if (o.triple == "standard") {
        const auto V = io::loop_from_json(in);
        const auto s = pi_split_standard(V);
        rep.add("reassembly", coeff_distance(s.plus + s.minus, V), tol.commutation);
        rep.add("idempotence", coeff_distance(pi_split_standard(s.plus).plus, s.plus), tol.exact);
        write_json(o.cfg.out, {{"plus", io::to_json(s.plus)}, {"minus", io::to_json(s.minus)}});
    } else if (o.triple == "harmonic") {
        const auto W = io::double_loop_from_json(in);
        const std::size_t N = o.cfg.annulus.N;
        rep.add("input_hmrc", hmrc_residual(W, Level::algebra, N), tol.hmrc_input);
        const auto s = split_two_circle(W);
        const auto lifted_plus0 = s.plus.with_annulus(W.near0().annulus());
        const auto lifted_plusInf = s.plus.with_annulus(W.nearInf().annulus());
        rep.add("reassembly", std::max(coeff_distance(lifted_plus0 + s.minus.near0(), W.near0()),
                                       coeff_distance(lifted_plusInf + s.minus.nearInf(), W.nearInf())),
                tol.commutation);
        const auto again = split_two_circle(DoubleLoop(lifted_plus0, lifted_plusInf));
        rep.add("idempotence", coeff_distance(again.plus, s.plus), tol.commutation);
        const auto theta_then_split = split_two_circle(hmrc_involution(W, Level::algebra)).plus;
        const auto split_then_theta = hmrc_involution(s.plus, Level::algebra);
        rep.add("hmrc_commutation", coeff_distance(theta_then_split, split_then_theta), tol.commutation);
        write_json(o.cfg.out, {{"plus", io::to_json(s.plus)}, {"minus", io::to_json(s.minus)}});
    } else {
        throw InvalidArgument("--triple must be standard or harmonic");
    }
    return rep;
}

inline ResidualReport virasoro_flow(const Options& o) {
    ResidualReport rep;
    const auto E = io::extended_from_json(read_json(o.cfg.in));
    const HoloMap f{VectorFieldLambda::generator(o.j), o.t};
    f.validate(E.cfg);
    const ResidualOptions ro{o.fd_order, 16, 64};
    const double before = extended_residuals(E, ro).lambda_constancy;
    try {
        const auto flowed = group_action(f, E, birkhoff_options(o));
        const auto r = extended_residuals(flowed, ro);
        rep.add("flowed_lambda_constancy", r.lambda_constancy, o.cfg.tol.flow_factor * before);
        rep.add("flowed_e1_identity", r.e1, o.cfg.tol.reality);
        rep.add("flowed_basepoint_identity", r.basepoint, o.cfg.tol.reality);
        rep.add("flowed_hmrc", r.hmrc, o.cfg.tol.reality);
        rep.notes["excluded_nodes"] = flowed.excluded();
        rep.notes["input_lambda_constancy"] = before;
        write_json(o.cfg.out, io::to_json(flowed));
    } catch (const OutsideBigCell& e) {
        rep.add("basepoint_factorization", e.last_residual(), o.cfg.tol.factorization);
        rep.notes["error"] = e.what();
    }
    return rep;
}

inline ResidualReport bracket_test(const Options& o) {
    ResidualReport rep;
    const auto E = io::loop_from_json(read_json(o.cfg.in));
    const auto& cfg = o.cfg.annulus;
    rep.add("plus_membership", plus_membership(E, cfg.N), o.cfg.tol.reality);
    if (rep.all_pass()) {
        const auto V = VectorFieldLambda::generator(o.j), W = VectorFieldLambda::generator(o.k);
        try {
            rep.add("bracket_deviation", bracket_representation_check(V, W, E, cfg, o.h), o.cfg.tol.bracket);
        } catch (const OutsideBigCell& e) {
            rep.add("bracket_deviation", INFINITY, o.cfg.tol.bracket);
            rep.notes["error"] = e.what();
        }
    }
    return rep;
}

inline ResidualReport mobius(const Options& o) {
    ResidualReport rep;
    const auto [lo, hi] = parse_range(o.jrange);
    if (lo < -1 || hi < lo) throw InvalidArgument("--j range must satisfy -1 <= lo <= hi");
    const auto& cfg = o.cfg.annulus;
    const int K = cfg.work_order();
    json fields = json::array();
    for (int j = lo; j <= hi; ++j) {
        const auto m = mobius_pushforward(j, cfg.eps, K);
        double err = 0.0;
        for (cplx l : circle_points(cfg.eps, 64)) err = std::max(err, std::abs(m.near0(l) - m.field(l)));
        for (cplx l : circle_points(1.0 / cfg.eps, 64))
            err = std::max(err, std::abs(m.nearInf(l) - m.field(l)) / std::abs(l * l));
        rep.add("expansion_" + std::to_string(j), err, cfg.trunc_tol);
        fields.push_back({{"j", j},
                          {"num", io::to_json(m.field.num)},
                          {"den", io::to_json(m.field.den)},
                          {"near0", io::to_json(m.near0)},
                          {"nearInf", io::to_json(m.nearInf)}});
    }
    for (int a = lo; a <= hi; ++a)
        for (int b = a + 1; b <= hi; ++b) {
            const auto lhs = rational_bracket(mobius_rational(a), mobius_rational(b));
            const auto P = mobius_rational(a + b);
            const RationalField rhs{cplx(b - a) * P.num, P.den};
            rep.add("bracket_" + std::to_string(a) + "_" + std::to_string(b), rational_equal(lhs, rhs) ? 0.0 : 1.0,
                    o.cfg.tol.exact);
        }
    write_json(o.cfg.out, fields);
    return rep;
}

inline ResidualReport schwarz(const Options& o) {
    ResidualReport rep;
    const auto E = io::loop_from_json(read_json(o.cfg.in));
    const VirasoroPairR pair{parse_real_field(o.w_field), parse_real_field(o.v_field)};
    pair.validate();
    const auto& cfg = o.cfg.annulus;
    const double reality = real_structure_residual(E, cfg.N);
    rep.add("input_reality", reality, o.cfg.tol.reality);
    if (!rep.all_pass()) return rep;
    const auto delta = schwarz_action(pair, E, cfg, o.cfg.tol.reality);
    const auto split = schwarz_action({pair.w, {}}, E, cfg, o.cfg.tol.reality) +
                       schwarz_action({{}, pair.v}, E, cfg, o.cfg.tol.reality);
    rep.add("additivity", coeff_distance(delta, split), o.cfg.tol.exact);
    const auto doubled = schwarz_action({cplx{2.0} * pair.w, cplx{2.0} * pair.v}, E, cfg, o.cfg.tol.reality);
    rep.add("homogeneity", coeff_distance(doubled, cplx{2.0} * delta), o.cfg.tol.exact);
    write_json(o.cfg.out, io::to_json(delta));
    return rep;
}

/// Randomized property checks at small sizes, driven by the seed.
inline ResidualReport suite(const Options& o) {
    ResidualReport rep;
    const auto& tol = o.cfg.tol;
    const auto& cfg = o.cfg.annulus;
    const Rng root(o.cfg.seed);

    {  // two-circle factorization
        Rng rng = root.split("birkhoff_harmonic");
        double res = 0.0, mem = 0.0;
        for (int i = 0; i < 5; ++i) {
            const auto Q = random_hmrc_loop(rng, 2, 6, cfg, 0.02);
            const auto p = birkhoff_harmonic(Q, cfg);
            res = std::max(res, p.residual);
            mem = std::max({mem, p.plus_membership, p.minus_membership});
        }
        rep.add("birkhoff_harmonic_residual", res, tol.factorization);
        rep.add("birkhoff_harmonic_membership", mem, tol.factorization);
    }
    {  // unit-circle factorization
        Rng rng = root.split("birkhoff_standard");
        double res = 0.0, mem = 0.0;
        for (int i = 0; i < 5; ++i) {
            const auto Q = exp_loop(random_laurent(rng, 2, 6, circle(1.0), 0.02), cfg.N, cfg.work_order());
            const auto p = birkhoff_standard(Q, {}, cfg.N);
            res = std::max(res, p.residual);
            mem = std::max({mem, p.plus_membership, p.minus_membership});
        }
        rep.add("birkhoff_standard_residual", res, tol.factorization);
        rep.add("birkhoff_standard_membership", mem, tol.factorization);
    }
    {  // projections on dyadic data (exact) and the reality involution
        Rng rng = root.split("projections");
        double alg = 0.0, comm = 0.0;
        for (int i = 0; i < 20; ++i) {
            LaurentLoop a(2, 5, cfg.inner()), b(2, 5, cfg.outer());
            for (auto* L : {&a, &b})
                for (int k = -5; k <= 5; ++k)
                    for (int r = 0; r < 2; ++r)
                        for (int c = 0; c < 2; ++c) L->coeff(k)(r, c) = {rng.integer(-8, 8) / 8.0, rng.integer(-8, 8) / 8.0};
            const DoubleLoop W(a, b);
            const auto s = split_two_circle(W);
            alg = std::max({alg, coeff_distance(s.plus.with_annulus(a.annulus()) + s.minus.near0(), a),
                            coeff_distance(s.plus.with_annulus(b.annulus()) + s.minus.nearInf(), b),
                            coeff_distance(split_two_circle(DoubleLoop(s.plus.with_annulus(a.annulus()),
                                                                       s.plus.with_annulus(b.annulus())))
                                               .plus,
                                           s.plus)});
            comm = std::max(comm, coeff_distance(split_two_circle(hmrc_involution(W, Level::algebra)).plus,
                                                 hmrc_involution(s.plus, Level::algebra)));
        }
        rep.add("projection_algebra", alg, tol.exact);
        rep.add("projection_hmrc_commutation", comm, tol.commutation);
    }
    {  // Gram-Schmidt
        Rng rng = root.split("iwasawa");
        double rec = 0.0, uni = 0.0, tri = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Mat g = random_unimodular(rng, 3);
            const auto [u, r] = iwasawa_gram_schmidt(g);
            rec = std::max(rec, max_abs(u * r - g));
            uni = std::max(uni, max_abs(u.adjoint() * u - identity(3)));
            for (int a = 0; a < 3; ++a) {
                tri = std::max(tri, std::abs(r(a, a).imag()) + (r(a, a).real() > 0.0 ? 0.0 : 1.0));
                for (int b = 0; b < a; ++b) tri = std::max(tri, std::abs(r(a, b)));
            }
        }
        rep.add("iwasawa_reconstruction", rec, tol.iwasawa);
        rep.add("iwasawa_unitarity", uni, tol.iwasawa);
        rep.add("iwasawa_triangularity", tri, tol.exact);
    }
    {  // Virasoro bracket: Jacobi on integer fields, generator table
        Rng rng = root.split("jacobi");
        double jac = 0.0;
        for (int i = 0; i < 10; ++i) {
            VectorFieldLambda f[3];
            for (auto& v : f)
                for (int p = 1; p <= 4; ++p) v.set(p, static_cast<double>(rng.integer(-3, 3)));
            const auto J = vira_bracket(f[0], vira_bracket(f[1], f[2])) + vira_bracket(f[1], vira_bracket(f[2], f[0])) +
                           vira_bracket(f[2], vira_bracket(f[0], f[1]));
            for (const auto& [p, c] : J.terms()) jac = std::max(jac, std::abs(c));
        }
        rep.add("vira_jacobi", jac, tol.exact);
        double table = 0.0;
        for (int a = 0; a <= 3; ++a)
            for (int b = 0; b <= 3; ++b) {
                const auto lhs = vira_bracket(VectorFieldLambda::generator(a), VectorFieldLambda::generator(b));
                const auto rhs = cplx(b - a) * VectorFieldLambda::generator(a + b);
                table = std::max(table, lhs == rhs ? 0.0 : 1.0);
            }
        rep.add("vira_generator_table", table, tol.exact);
    }
    {  // reality correspondence and the infinitesimal action on a random plus-group loop
        Rng rng = root.split("virasoro");
        const auto E = birkhoff_harmonic(random_hmrc_loop(rng, 2, 4, cfg, 0.02), cfg).plus;
        double hm = 0.0, flipped = 0.0;
        for (int j = 0; j <= 2; ++j) {
            const auto V = VectorFieldLambda::generator(j);
            hm = std::max(hm, hmrc_residual(virasoro_generator_field(V, E, cfg), Level::algebra, cfg.N));
            ActionOptions flip;
            flip.flip_infinity_sign = true;
            flipped = std::max(flipped,
                               hmrc_residual(virasoro_generator_field(V, E, cfg, flip), Level::algebra, cfg.N));
        }
        rep.add("virasoro_hmrc", hm, tol.reality);
        rep.add("virasoro_flipped_sign_hmrc_inverse", flipped > 0.0 ? 1.0 / flipped : INFINITY, 1e3);
        const bool l0 = reality_extend(VectorFieldLambda::generator(0)) == cplx{-1.0} * VectorFieldLambda::generator(0);
        VectorFieldLambda l2;
        l2.set(-1, -1.0);
        const bool l2ok = reality_extend(VectorFieldLambda::generator(2)) == l2;
        rep.add("reality_extend_table", (l0 && l2ok) ? 0.0 : 1.0, tol.exact);
    }
    {  // Moebius embedding
        double bad = 0.0;
        for (int a = -1; a <= 2; ++a)
            for (int b = -1; b <= 2; ++b) {
                if (a + b < -1) continue;
                const auto lhs = rational_bracket(mobius_rational(a), mobius_rational(b));
                const auto P = mobius_rational(a + b);
                bad = std::max(bad, rational_equal(lhs, {cplx(b - a) * P.num, P.den}) ? 0.0 : 1.0);
            }
        rep.add("mobius_brackets", bad, tol.exact);
    }
    {  // decoupled action on a loop with the real structure
        Rng rng = root.split("schwarz");
        LaurentLoop X(2, 2, cfg.full());
        for (int k = -2; k <= 2; ++k) {
            const Mat m = random_traceless(rng, 2, 0.05 / cfg.full().weight(k));
            X.coeff(k) = 0.5 * (m - m.adjoint());
        }
        const auto E = exp_loop(X, cfg.N, cfg.work_order());
        const VirasoroPairR pr{VectorFieldLambda::from_coeffs({0.5, -0.25}), VectorFieldLambda::generator(-3)};
        const auto d = schwarz_action(pr, E, cfg, 1e-9);
        const auto sum = schwarz_action({pr.w, {}}, E, cfg, 1e-9) + schwarz_action({{}, pr.v}, E, cfg, 1e-9);
        rep.add("schwarz_additivity", coeff_distance(d, sum), tol.exact);
    }
    return rep;
}

}  // namespace detail

// --- driver ----------------------------------------------------------------

inline void add_common(CLI::App* s, Options& o) {
    auto& c = o.cfg;
    s->add_option("--in", c.in, "input JSON")->envname("LOOPVIRO_IN");
    s->add_option("--out", c.out, "output JSON")->envname("LOOPVIRO_OUT");
    s->add_option("--report", c.report, "CSV report path (JSON sidecar at <path>.json)")->envname("LOOPVIRO_REPORT");
    s->add_option("--seed", c.seed, "seed for randomized suites")->envname("LOOPVIRO_SEED");
    s->add_option("--eps", c.annulus.eps, "inner circle radius")->envname("LOOPVIRO_EPS");
    s->add_option("--samples", c.annulus.N, "samples per circle")->envname("LOOPVIRO_SAMPLES");
    s->add_option("--trunc", c.annulus.K, "truncation order K")->envname("LOOPVIRO_TRUNC");
    s->add_option("--grid", o.grid, "x0,x1,y0,y1,h")->envname("LOOPVIRO_GRID");
    s->add_option("--p", o.p, "basepoint x,y")->envname("LOOPVIRO_P");
    s->add_option("--fd-order", o.fd_order, "2 or 4")->envname("LOOPVIRO_FD_ORDER");
    auto tol = [&](const char* name, const char* env, double& v) { s->add_option(name, v)->envname(env); };
    tol("--tol-trunc", "LOOPVIRO_TOL_TRUNC", c.annulus.trunc_tol);
    tol("--tol-factorization", "LOOPVIRO_TOL_FACTORIZATION", c.tol.factorization);
    tol("--tol-pde", "LOOPVIRO_TOL_PDE", c.tol.pde);
    tol("--tol-reality", "LOOPVIRO_TOL_REALITY", c.tol.reality);
    tol("--tol-unitary", "LOOPVIRO_TOL_UNITARY", c.tol.unitary);
    tol("--tol-ode", "LOOPVIRO_TOL_ODE", c.tol.ode);
    tol("--tol-bracket", "LOOPVIRO_TOL_BRACKET", c.tol.bracket);
    tol("--tol-flow-factor", "LOOPVIRO_TOL_FLOW_FACTOR", c.tol.flow_factor);
    tol("--tol-commutation", "LOOPVIRO_TOL_COMMUTATION", c.tol.commutation);
    tol("--tol-iwasawa", "LOOPVIRO_TOL_IWASAWA", c.tol.iwasawa);
    tol("--tol-hmrc-input", "LOOPVIRO_TOL_HMRC_INPUT", c.tol.hmrc_input);
}

inline void finish_config(Options& o) {
    using detail::parse_list;
    auto& c = o.cfg;
    if (!o.grid.empty()) {
        const auto v = parse_list(o.grid, 5, "--grid");
        c.x0 = v[0], c.x1 = v[1], c.y0 = v[2], c.y1 = v[3], c.h = v[4];
    }
    if (!o.p.empty()) {
        const auto v = parse_list(o.p, 2, "--p");
        c.p = cplx{v[0], v[1]};
    }
    c.annulus.delta = std::min(c.annulus.delta, c.annulus.eps);
    c.annulus.validate();
    for (double t : {c.tol.factorization, c.tol.pde, c.tol.reality, c.tol.unitary, c.tol.ode, c.tol.bracket,
                     c.tol.flow_factor, c.tol.commutation, c.tol.iwasawa, c.tol.hmrc_input})
        if (!(t > 0.0)) throw InvalidArgument("tolerances must be positive");
    if (o.fd_order != 2 && o.fd_order != 4) throw InvalidArgument("--fd-order must be 2 or 4");
}

/// Runs one subcommand.  args excludes the program name.  Returns 0 when every
/// report row passes, 1 on a residual failure, 2 on malformed input or I/O failure.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    Options o;
    CLI::App app{"loopviro: loop-group factorization, extended harmonic maps and the Virasoro action"};
    app.require_subcommand(1);
    using Handler = ResidualReport (*)(const Options&);
    std::vector<std::pair<CLI::App*, Handler>> commands;
    auto sub = [&](const char* name, const char* help, Handler h) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, o);
        commands.emplace_back(s, h);
        return s;
    };
    sub("gen-uniton", "build the uniton extended solution of f", detail::gen_uniton)->add_option("--f", o.f, "rational f(z)");
    sub("check-extended", "residuals of an extended solution", detail::check_extended);
    auto* fac = sub("factorize", "Birkhoff factorization", detail::factorize);
    fac->add_option("--triple", o.triple, "standard|harmonic");
    fac->add_option("--tol", o.cfg.tol.factorization, "factorization tolerance");
    sub("project", "Lie-algebra projections", detail::project)->add_option("--triple", o.triple, "standard|harmonic");
    auto* vf = sub("virasoro-flow", "flow an extended solution by exp(t L_j)", detail::virasoro_flow);
    vf->add_option("--j", o.j);
    vf->add_option("--t", o.t);
    auto* bt = sub("bracket-test", "finite-difference check of the bracket representation", detail::bracket_test);
    bt->add_option("--j", o.j);
    bt->add_option("--k", o.k);
    bt->add_option("--step", o.h, "finite-difference step");
    sub("mobius", "pushforwards of t^{j+1} d/dt", detail::mobius)->add_option("--j", o.jrange, "index or range a..b");
    auto* sw = sub("schwarz", "decoupled action (w at 0, v at infinity)", detail::schwarz);
    sw->add_option("--w", o.w_field, "power:coeff,... (real)");
    sw->add_option("--v", o.v_field, "power:coeff,... (real)");
    sub("suite", "randomized property checks", detail::suite);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return malformed;
    }

    const auto start = std::chrono::steady_clock::now();
    ResidualReport rep;
    try {
        finish_config(o);
        for (const auto& [s, h] : commands)
            if (s->parsed()) rep = h(o);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return malformed;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return malformed;
    } catch (const Error& e) {
        rep.add("failure", INFINITY, 0.0);
        rep.notes["error"] = e.what();
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.seed = o.cfg.seed;
    rep.config = o.cfg.to_json();
    rep.config_hash = o.cfg.hash();
    std::string cl = "loopviro";
    for (const auto& a : args) cl += " " + a;
    rep.command_line = cl;
    try {
        if (o.cfg.report.empty())
            out << report_csv(rep);
        else
            emit_report(rep, o.cfg.report);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return malformed;
    }
    return rep.all_pass() ? ok : residual_failure;
}

}  // namespace loopviro::cli

#endif  // LOOPVIRO_TOOLS_CLI_HPP
