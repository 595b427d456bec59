#ifndef LOOPVIRO_REPORT_HPP
#define LOOPVIRO_REPORT_HPP

#include "loopviro/double_loop.hpp"
#include "loopviro/grid.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace loopviro {

class IoError : public Error {
public:
    using Error::Error;
};

/// Every threshold used by the command-line tools.
struct Tolerances {
    double factorization = 1e-9;  // |EF - Q| and membership
    double pde = 1e-5;            // lambda-constancy and harmonic residuals
    double reality = 1e-10;       // E_1 = I, E(p) = I, HMRC, exact-identity checks
    double unitary = 1e-8;        // E unitary on |lambda| = 1
    double ode = 1e-5;            // connection integration against closed form
    double bracket = 1e-4;        // finite-difference bracket representation
    double flow_factor = 10.0;    // flowed residual relative to the input's
    double commutation = 1e-12;   // projections against the reality involution
    double iwasawa = 1e-12;       // Gram-Schmidt reconstruction and unitarity
    double exact = 0.0;           // identities that hold exactly in floating point
    double hmrc_input = 1e-8;     // reality accepted on fields handed to the harmonic projection
};

struct RunConfig {
    AnnulusConfig annulus;
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0, h = 0.05;
    std::optional<cplx> p;
    Tolerances tol;
    std::uint64_t seed = 7;
    std::string in, out, report;

    GridDomain grid() const { return GridDomain::make(x0, x1, y0, y1, h, p); }

    /// Canonical JSON of the numerical configuration (paths excluded).
    nlohmann::json to_json() const {
        nlohmann::json j = {{"eps", annulus.eps},
                            {"N", annulus.N},
                            {"K", annulus.K},
                            {"trunc_tol", annulus.trunc_tol},
                            {"delta", annulus.delta},
                            {"grid", {x0, x1, y0, y1, h}},
                            {"tol",
                             {{"factorization", tol.factorization},
                              {"pde", tol.pde},
                              {"reality", tol.reality},
                              {"unitary", tol.unitary},
                              {"ode", tol.ode},
                              {"bracket", tol.bracket},
                              {"flow_factor", tol.flow_factor},
                              {"commutation", tol.commutation},
                              {"iwasawa", tol.iwasawa},
                              {"exact", tol.exact},
                              {"hmrc_input", tol.hmrc_input}}},
                            {"seed", seed}};
        if (p) j["p"] = {p->real(), p->imag()};
        return j;
    }

    /// FNV-1a of the canonical JSON, as 16 hex digits.
    std::string hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : to_json().dump()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

struct ReportEntry {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;

    friend bool operator==(const ReportEntry& a, const ReportEntry& b) {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return a.name == b.name && same(a.value, b.value) && same(a.threshold, b.threshold) && a.pass == b.pass;
    }
};

struct ResidualReport {
    std::vector<ReportEntry> entries;
    std::string command_line;
    std::string config_hash;
    std::uint64_t seed = 0;
    double seconds = 0.0;
    nlohmann::json config;
    nlohmann::json notes = nlohmann::json::object();

    /// pass is value <= threshold; NaN never passes.
    void add(std::string name, double value, double threshold) {
        entries.push_back({std::move(name), value, threshold, value <= threshold});
    }
    bool all_pass() const {
        return std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return e.pass; });
    }
};

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return NAN;
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("bad number in report: '" + s + "'");
    }
    if (used != s.size()) throw InvalidArgument("bad number in report: '" + s + "'");
    return v;
}

}  // namespace detail

inline std::string report_csv(const ResidualReport& r) {
    std::string out = "name,value,threshold,pass\n";
    for (const auto& e : r.entries) {
        if (e.name.find_first_of(",\n\"") != std::string::npos)
            throw InvalidArgument("report entry names may not contain ',', '\"' or newlines");
        out += e.name + ',' + detail::format_double(e.value) + ',' + detail::format_double(e.threshold) + ',' +
               (e.pass ? "true" : "false") + '\n';
    }
    return out;
}

inline std::vector<ReportEntry> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "name,value,threshold,pass") throw InvalidArgument("missing report header");
    std::vector<ReportEntry> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 4 || (f[3] != "true" && f[3] != "false")) throw InvalidArgument("bad report row: " + line);
        out.push_back({f[0], detail::parse_double(f[1]), detail::parse_double(f[2]), f[3] == "true"});
    }
    return out;
}

inline nlohmann::json report_sidecar(const ResidualReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : r.entries)
        rows.push_back({{"name", e.name}, {"value", detail::format_double(e.value)},
                        {"threshold", detail::format_double(e.threshold)}, {"pass", e.pass}});
    return {{"command_line", r.command_line}, {"config_hash", r.config_hash}, {"seed", r.seed},
            {"timing_seconds", r.seconds},    {"config", r.config},           {"all_pass", r.all_pass()},
            {"notes", r.notes},               {"entries", rows}};
}

/// Writes to a temporary sibling and renames it over `path`.
inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
        f << content;
        f.flush();
        if (!f) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into '" + path + "'");
    }
}

/// CSV at `path` and JSON provenance at `path` + ".json".
inline void emit_report(const ResidualReport& r, const std::string& path) {
    atomic_write(path, report_csv(r));
    atomic_write(path + ".json", report_sidecar(r).dump(2) + "\n");
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace loopviro

#endif  // LOOPVIRO_REPORT_HPP
