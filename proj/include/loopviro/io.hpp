#ifndef LOOPVIRO_IO_HPP
#define LOOPVIRO_IO_HPP

#include "loopviro/birkhoff.hpp"
#include "loopviro/extended.hpp"
#include "loopviro/vector_field.hpp"

#include <json.hpp>

namespace loopviro::io {

using json = nlohmann::json;

/// Parse failures surface as InvalidArgument so callers can map them to "malformed input".
template <class Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed ") + what + ": " + e.what());
    }
}

inline json to_json(cplx c) { return json::array({c.real(), c.imag()}); }
inline cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw InvalidArgument("complex number must be a [re, im] pair");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}
inline Mat mat_from_json(const json& j, int n) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) throw InvalidArgument("matrix must have n rows");
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<int>(row.size()) != n) throw InvalidArgument("matrix row must have n entries");
        for (int k = 0; k < n; ++k) m(i, k) = cplx_from_json(row.at(static_cast<std::size_t>(k)));
    }
    return m;
}

// --- loops -----------------------------------------------------------------

inline json to_json(const LaurentLoop& L) {
    json c = json::array();
    for (int k = -L.order(); k <= L.order(); ++k) c.push_back(to_json(L.coeff(k)));
    json j = {{"n", L.dim()}, {"K", L.order()}, {"r_in", L.annulus().r_in}, {"r_out", L.annulus().r_out},
              {"coeffs", std::move(c)}};
    if (L.truncation_error() != 0.0) j["truncation_error"] = L.truncation_error();
    return j;
}

inline LaurentLoop loop_from_json(const json& j) {
    return guarded("loop", [&] {
        const int n = j.at("n").get<int>();
        const int K = j.at("K").get<int>();
        const Annulus a{j.at("r_in").get<double>(), j.at("r_out").get<double>()};
        LaurentLoop L(n, K, a);
        const auto& c = j.at("coeffs");
        if (!c.is_array() || static_cast<int>(c.size()) != 2 * K + 1)
            throw InvalidArgument("loop coeffs must hold 2K+1 matrices");
        for (int k = -K; k <= K; ++k) L.coeff(k) = mat_from_json(c.at(static_cast<std::size_t>(k + K)), n);
        if (j.contains("truncation_error")) L.note_truncation(j.at("truncation_error").get<double>());
        return L;
    });
}

inline json to_json(const DoubleLoop& Q) { return {{"near0", to_json(Q.near0())}, {"nearInf", to_json(Q.nearInf())}}; }
inline DoubleLoop double_loop_from_json(const json& j) {
    return guarded("double loop", [&] { return DoubleLoop(loop_from_json(j.at("near0")), loop_from_json(j.at("nearInf"))); });
}

template <class Minus>
json to_json(const FactorPair<Minus>& p) {
    return {{"plus", to_json(p.plus)},
            {"minus", to_json(p.minus)},
            {"residual", p.residual},
            {"plus_membership", p.plus_membership},
            {"minus_membership", p.minus_membership},
            {"iterations", p.iterations}};
}

// --- grids -----------------------------------------------------------------

inline json grid_header(const GridDomain& g) {
    const cplx p = g.basepoint();
    return {{"x0", g.x0}, {"x1", g.x1}, {"y0", g.y0}, {"y1", g.y1}, {"h", g.h}, {"p", {p.real(), p.imag()}}};
}
inline GridDomain grid_from_json(const json& j) {
    return guarded("grid", [&] {
        std::optional<cplx> p;
        if (j.contains("p")) p = cplx{j.at("p").at(0).get<double>(), j.at("p").at(1).get<double>()};
        return GridDomain::make(j.at("x0").get<double>(), j.at("x1").get<double>(), j.at("y0").get<double>(),
                                j.at("y1").get<double>(), j.at("h").get<double>(), p);
    });
}

inline json to_json(const HarmonicMapGrid& s) {
    json j = grid_header(s.grid);
    json rows = json::array();
    for (int iy = 0; iy < s.grid.ny(); ++iy) {
        json row = json::array();
        for (int ix = 0; ix < s.grid.nx(); ++ix) row.push_back(to_json(s.at(ix, iy)));
        rows.push_back(std::move(row));
    }
    j["values"] = std::move(rows);
    return j;
}
inline HarmonicMapGrid harmonic_map_from_json(const json& j) {
    return guarded("harmonic map grid", [&] {
        HarmonicMapGrid s{grid_from_json(j), {}};
        const auto& rows = j.at("values");
        if (static_cast<int>(rows.size()) != s.grid.ny()) throw InvalidArgument("values must have ny rows");
        const int n = static_cast<int>(rows.at(0).at(0).size());
        s.values.resize(s.grid.size());
        for (int iy = 0; iy < s.grid.ny(); ++iy) {
            const auto& row = rows.at(static_cast<std::size_t>(iy));
            if (static_cast<int>(row.size()) != s.grid.nx()) throw InvalidArgument("value rows must have nx entries");
            for (int ix = 0; ix < s.grid.nx(); ++ix)
                s.values[s.grid.index(ix, iy)] = mat_from_json(row.at(static_cast<std::size_t>(ix)), n);
        }
        return s;
    });
}

inline json to_json(const AnnulusConfig& c) {
    return {{"eps", c.eps}, {"N", c.N}, {"K", c.K}, {"trunc_tol", c.trunc_tol}, {"delta", c.delta}};
}
inline AnnulusConfig annulus_config_from_json(const json& j) {
    return guarded("annulus config", [&] {
        AnnulusConfig c;
        c.eps = j.value("eps", c.eps);
        c.N = j.value("N", c.N);
        c.K = j.value("K", c.K);
        c.trunc_tol = j.value("trunc_tol", c.trunc_tol);
        c.delta = j.value("delta", std::min(c.delta, c.eps));
        c.validate();
        return c;
    });
}

/// Grid header, annulus, variant, and loops in row-major node order (null = excluded).
inline json to_json(const ExtendedSolution& E) {
    json j = grid_header(E.grid);
    j["annulus"] = to_json(E.cfg);
    j["variant"] = E.variant;
    json loops = json::array();
    for (const auto& L : E.loops) loops.push_back(L ? to_json(*L) : json(nullptr));
    j["loops"] = std::move(loops);
    return j;
}
inline ExtendedSolution extended_from_json(const json& j) {
    return guarded("extended solution", [&] {
        ExtendedSolution E{grid_from_json(j), annulus_config_from_json(j.at("annulus")), {}, j.value("variant", "")};
        const auto& loops = j.at("loops");
        if (loops.size() != E.grid.size()) throw InvalidArgument("loops must hold one entry per grid node");
        E.loops.resize(E.grid.size());
        for (std::size_t k = 0; k < loops.size(); ++k)
            if (!loops[k].is_null()) E.loops[k] = loop_from_json(loops[k]);
        if (!E.loops[E.grid.base_index()]) throw InvalidArgument("basepoint node has no loop");
        return E;
    });
}

// --- vector fields ---------------------------------------------------------

inline json to_json(const VectorFieldLambda& v) {
    json powers = json::array(), coeffs = json::array();
    for (const auto& [p, c] : v.terms()) {
        powers.push_back(p);
        coeffs.push_back(to_json(c));
    }
    return {{"powers", std::move(powers)}, {"coeffs", std::move(coeffs)}};
}
inline VectorFieldLambda vector_field_from_json(const json& j) {
    return guarded("vector field", [&] {
        const auto& p = j.at("powers");
        const auto& c = j.at("coeffs");
        if (p.size() != c.size()) throw InvalidArgument("powers and coeffs differ in length");
        VectorFieldLambda v;
        for (std::size_t k = 0; k < p.size(); ++k) v.set(p[k].get<int>(), v.coeff(p[k].get<int>()) + cplx_from_json(c[k]));
        return v;
    });
}

inline json to_json(const Polynomial& p) {
    json a = json::array();
    for (cplx c : p.c) a.push_back(to_json(c));
    return a;
}

}  // namespace loopviro::io

#endif  // LOOPVIRO_IO_HPP
