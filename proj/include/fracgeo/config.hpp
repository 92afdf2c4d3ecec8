#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "report.hpp"
#include "shape.hpp"

namespace fracgeo {

enum class Experiment {
    Perimeter,
    Seminorm,
    Capacity,
    CoareaCheck,
    CapVsPerimeter,
    IsoperimetricScan,
    MollifyScan,
    EquivalenceCheck
};

inline const char* to_string(Experiment e) {
    switch (e) {
    case Experiment::Perimeter: return "perimeter";
    case Experiment::Seminorm: return "seminorm";
    case Experiment::Capacity: return "capacity";
    case Experiment::CoareaCheck: return "coarea_check";
    case Experiment::CapVsPerimeter: return "cap_vs_perimeter";
    case Experiment::IsoperimetricScan: return "isoperimetric_scan";
    case Experiment::MollifyScan: return "mollify_scan";
    case Experiment::EquivalenceCheck: return "equivalence_check";
    }
    return "?";
}

/// Field attached to a shape: its indicator, a seeded random integer field
/// on the shape, or a radial tent peaking at the shape centre.
enum class FieldKind { Indicator, Random, Tent };

inline const char* to_string(FieldKind f) {
    switch (f) {
    case FieldKind::Indicator: return "indicator";
    case FieldKind::Random: return "random";
    case FieldKind::Tent: return "tent";
    }
    return "?";
}

struct ShapeSpec {
    std::string id;
    Shape shape;
    FieldKind field = FieldKind::Indicator;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::EquivalenceCheck;
    int dim = 2;
    double delta = 0.5;
    std::optional<double> q_override;
    double spacing = 0.05;
    /// G itself, and the extra margin of the grid around it.
    Shape domain = Shape::ball({0, 0}, 1.0);
    double domain_margin = 0.0;
    KernelParams kernel;
    int zero_layer_width = 1;
    std::uint64_t seed = 0;
    std::string output_path;
    double p = 1.0;
    std::vector<int> mollifier_j{4, 8, 16, 32};
    int random_fields = 3;
    std::vector<ShapeSpec> shapes;
    /// Non-comment config lines in file order, echoed into the report header.
    std::vector<std::string> echo;

    /// Integrability exponent; n/(n-delta) unless set explicitly.
    [[nodiscard]] double q() const { return q_override ? *q_override : dim / (dim - delta); }
};

class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& source, int line, const std::string& what)
        : InvalidArgument(source + ":" + std::to_string(line) + ": " + what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_numbers(const std::string& v) {
    std::string t = v;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream is(t);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok));
    return out;
}

inline double parse_number(const std::string& v) {
    const auto xs = parse_numbers(v);
    if (xs.size() != 1) throw InvalidArgument("expected one number, got '" + v + "'");
    return xs[0];
}

inline int as_int(double x) {
    if (x != std::floor(x) || std::abs(x) > 1e9) throw InvalidArgument("expected an integer, got " + format_double(x));
    return static_cast<int>(x);
}

inline int parse_int(const std::string& v) { return as_int(parse_number(v)); }

inline Point parse_point(const std::string& v, int dim) {
    const auto xs = parse_numbers(v);
    if (static_cast<int>(xs.size()) != dim)
        throw InvalidArgument("expected " + std::to_string(dim) + " coordinate(s), got '" + v + "'");
    return {xs[0], dim == 2 ? xs[1] : 0.0};
}

/// key -> value map for one shape (or the domain) plus the line of each key.
struct ShapeBlock {
    std::string prefix;
    std::map<std::string, std::string> kv;
    std::map<std::string, int> line;
    int first_line = 0;
};

inline Shape build_shape(const ShapeBlock& b, int dim, const std::string& source) {
    auto get = [&](const std::string& key) -> const std::string& {
        const auto it = b.kv.find(key);
        if (it == b.kv.end()) throw ConfigError(source, b.first_line, b.prefix + "." + key + " is required");
        return it->second;
    };
    std::vector<std::string> allowed{"id", "kind", "field"};
    const std::string kind = b.kv.count("kind") ? b.kv.at("kind") : "";
    try {
        if (kind == "ball") {
            allowed.insert(allowed.end(), {"center", "radius"});
        } else if (kind == "box") {
            allowed.insert(allowed.end(), {"lo", "hi"});
        } else if (kind == "annulus") {
            allowed.insert(allowed.end(), {"center", "r_in", "r_out"});
        } else if (kind == "koch") {
            allowed.insert(allowed.end(), {"level", "anchor", "scale"});
        } else {
            throw ConfigError(source, b.first_line, b.prefix + ".kind must be ball, box, annulus or koch");
        }
        for (const auto& [k, v] : b.kv)
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                throw ConfigError(source, b.line.at(k), "unknown key " + b.prefix + "." + k + " for kind " + kind);
        if (kind == "ball") return Shape::ball(parse_point(get("center"), dim), parse_number(get("radius")), dim);
        if (kind == "box") return Shape::box(parse_point(get("lo"), dim), parse_point(get("hi"), dim), dim);
        if (kind == "annulus")
            return Shape::annulus(parse_point(get("center"), dim), parse_number(get("r_in")),
                                  parse_number(get("r_out")), dim);
        if (dim != 2) throw InvalidArgument("koch shapes need dim = 2");
        return Shape::koch(parse_int(get("level")), parse_point(get("anchor"), 2), parse_number(get("scale")));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(source, b.first_line, b.prefix + ": " + e.what());
    }
}

inline Experiment parse_experiment(const std::string& v) {
    for (auto e : {Experiment::Perimeter, Experiment::Seminorm, Experiment::Capacity, Experiment::CoareaCheck,
                   Experiment::CapVsPerimeter, Experiment::IsoperimetricScan, Experiment::MollifyScan,
                   Experiment::EquivalenceCheck})
        if (v == to_string(e)) return e;
    throw InvalidArgument("unknown experiment '" + v + "'");
}

inline FieldKind parse_field(const std::string& v) {
    for (auto f : {FieldKind::Indicator, FieldKind::Random, FieldKind::Tent})
        if (v == to_string(f)) return f;
    throw InvalidArgument("unknown field kind '" + v + "'");
}

} // namespace detail

/// Parses the line-oriented `key = value` format. `#` starts a comment;
/// every `shape.id` line opens a new shape block.
inline ExperimentConfig parse_config(std::istream& is, const std::string& source = "<config>") {
    ExperimentConfig cfg;
    std::map<std::string, std::string> top;
    std::map<std::string, int> top_line;
    detail::ShapeBlock domain{"domain", {}, {}, 0};
    std::vector<detail::ShapeBlock> blocks;

    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError(source, lineno, "empty key or value");
        cfg.echo.push_back(key + " = " + value);

        auto put = [&](std::map<std::string, std::string>& kv, std::map<std::string, int>& at, const std::string& k) {
            if (kv.count(k)) throw ConfigError(source, lineno, "duplicate key " + key);
            kv[k] = value;
            at[k] = lineno;
        };
        if (key.rfind("shape.", 0) == 0) {
            const std::string sub = key.substr(6);
            if (sub == "id") blocks.push_back({"shape", {}, {}, lineno});
            if (blocks.empty()) throw ConfigError(source, lineno, "shape block must start with shape.id");
            put(blocks.back().kv, blocks.back().line, sub);
        } else if (key.rfind("domain.", 0) == 0) {
            if (domain.first_line == 0) domain.first_line = lineno;
            put(domain.kv, domain.line, key.substr(7));
        } else {
            put(top, top_line, key);
        }
    }

    auto at = [&](const std::string& k) { return top_line.count(k) ? top_line[k] : 0; };
    for (const auto& [k, v] : top) try {
            if (k == "experiment") cfg.experiment = detail::parse_experiment(v);
            else if (k == "dim") cfg.dim = detail::parse_int(v);
            else if (k == "delta") cfg.delta = detail::parse_number(v);
            else if (k == "q") cfg.q_override = detail::parse_number(v);
            else if (k == "spacing") cfg.spacing = detail::parse_number(v);
            else if (k == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(v));
            else if (k == "output") cfg.output_path = v;
            else if (k == "p") cfg.p = detail::parse_number(v);
            else if (k == "zero_layer_width") cfg.zero_layer_width = detail::parse_int(v);
            else if (k == "random_fields") cfg.random_fields = detail::parse_int(v);
            else if (k == "kernel.near_field_radius_cells") cfg.kernel.near_field_radius_cells = detail::parse_int(v);
            else if (k == "kernel.subdivision_depth") cfg.kernel.subdivision_depth = detail::parse_int(v);
            else if (k == "kernel.truncation_radius") cfg.kernel.truncation_radius = detail::parse_number(v);
            else if (k == "mollifier.j") {
                cfg.mollifier_j.clear();
                for (double x : detail::parse_numbers(v)) cfg.mollifier_j.push_back(detail::as_int(x));
            } else throw ConfigError(source, at(k), "unknown key " + k);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(source, at(k), e.what());
        }

    if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError(source, at("dim"), "dim must be 1 or 2");
    if (!(cfg.delta > 0 && cfg.delta < 1)) throw ConfigError(source, at("delta"), "delta must lie in (0, 1)");
    if (cfg.q_override && !(*cfg.q_override >= 1)) throw ConfigError(source, at("q"), "q must be at least 1");
    if (!(cfg.spacing > 0)) throw ConfigError(source, at("spacing"), "spacing must be positive");
    if (!(cfg.p >= 1)) throw ConfigError(source, at("p"), "p must be at least 1");
    if (cfg.zero_layer_width < 1) throw ConfigError(source, at("zero_layer_width"), "zero_layer_width must be >= 1");
    if (cfg.random_fields < 0) throw ConfigError(source, at("random_fields"), "random_fields must be >= 0");
    if (cfg.mollifier_j.empty()) throw ConfigError(source, at("mollifier.j"), "mollifier.j must not be empty");
    for (std::size_t a = 0; a < cfg.mollifier_j.size(); ++a) {
        if (cfg.mollifier_j[a] < 1) throw ConfigError(source, at("mollifier.j"), "mollifier.j entries must be >= 1");
        if (a > 0 && cfg.mollifier_j[a] <= cfg.mollifier_j[a - 1])
            throw ConfigError(source, at("mollifier.j"), "mollifier.j must be increasing");
    }
    cfg.kernel.delta = cfg.delta;
    try {
        validate(cfg.kernel, cfg.spacing);
    } catch (const Error& e) {
        throw ConfigError(source, 0, e.what());
    }

    if (!domain.kv.empty()) {
        if (domain.kv.count("margin")) {
            try {
                cfg.domain_margin = detail::parse_number(domain.kv["margin"]);
            } catch (const Error& e) {
                throw ConfigError(source, domain.line["margin"], e.what());
            }
            if (!(cfg.domain_margin >= 0)) throw ConfigError(source, domain.line["margin"], "margin must be >= 0");
            domain.kv.erase("margin");
        }
        cfg.domain = detail::build_shape(domain, cfg.dim, source);
    } else if (cfg.dim == 1) {
        cfg.domain = Shape::box({-1}, {1}, 1);
    }

    for (const auto& b : blocks) {
        ShapeSpec s{b.kv.at("id"), detail::build_shape(b, cfg.dim, source), FieldKind::Indicator};
        if (b.kv.count("field")) {
            try {
                s.field = detail::parse_field(b.kv.at("field"));
            } catch (const Error& e) {
                throw ConfigError(source, b.line.at("field"), e.what());
            }
        }
        for (const auto& other : cfg.shapes)
            if (other.id == s.id) throw ConfigError(source, b.first_line, "duplicate shape id '" + s.id + "'");
        cfg.shapes.push_back(std::move(s));
    }
    if (cfg.shapes.empty()) throw ConfigError(source, lineno, "config lists no shapes");
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

} // namespace fracgeo
