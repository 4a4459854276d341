#pragma once

#include <json.hpp>

#include <charconv>
#include <string>
#include <vector>

#include "poqm/stats.hpp"
#include "poqm/util.hpp"

namespace poqm::report {

using json = nlohmann::ordered_json;

inline constexpr const char* kProvenance = "poqm/0.1.0";

struct NamedEstimate {
    std::string name;
    games::Estimate est;
};

struct GateResult {
    std::string name;
    bool pass = false;
};

/// Columnar payload for sweeps (bounds tables and the like).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    bool empty() const { return header.empty(); }
};

struct Report {
    std::string experiment;
    json params = json::object();
    std::string provenance = kProvenance;
    std::uint64_t seed = 0;
    std::vector<NamedEstimate> estimates;
    std::vector<GateResult> gates;
    Table table;
    json extra = json::object();
    double wall_ms = 0.0;

    bool all_pass() const {
        for (const auto& g : gates)
            if (!g.pass) return false;
        return true;
    }
};

namespace detail {
// Shortest round-trip decimal form; keeps emission byte-stable.
inline std::string fmt_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}
}  // namespace detail

inline json estimate_to_json(const games::Estimate& e) {
    json j;
    j["trials"] = e.trials;
    j["successes"] = e.successes;
    j["p_hat"] = e.p_hat;
    j["ci_low"] = e.ci_low;
    j["ci_high"] = e.ci_high;
    if (e.bound) {
        j["bound"] = *e.bound;
        j["bound_vacuous"] = e.bound_vacuous;
    }
    return j;
}

inline games::Estimate estimate_from_json(const json& j) {
    games::Estimate e;
    e.trials = j.at("trials").get<long>();
    e.successes = j.at("successes").get<long>();
    e.p_hat = j.at("p_hat").get<double>();
    e.ci_low = j.at("ci_low").get<double>();
    e.ci_high = j.at("ci_high").get<double>();
    if (j.contains("bound")) {
        e.bound = j.at("bound").get<double>();
        e.bound_vacuous = j.at("bound_vacuous").get<bool>();
    }
    return e;
}

/// JSON emission with fixed field order; emitting the same report twice
/// yields identical bytes.
inline std::string emit_json(const Report& r) {
    json j;
    j["experiment"] = r.experiment;
    j["provenance"] = r.provenance;
    j["seed"] = r.seed;
    j["params"] = r.params;
    json ests = json::array();
    for (const auto& ne : r.estimates) {
        json e = estimate_to_json(ne.est);
        json named;
        named["name"] = ne.name;
        named.update(e);
        ests.push_back(named);
    }
    j["estimates"] = ests;
    json gates = json::array();
    for (const auto& g : r.gates) {
        json gg;
        gg["name"] = g.name;
        gg["pass"] = g.pass;
        gates.push_back(gg);
    }
    j["gates"] = gates;
    if (!r.table.empty()) {
        json t;
        t["header"] = r.table.header;
        t["rows"] = r.table.rows;
        j["table"] = t;
    }
    j["extra"] = r.extra;
    j["wall_ms"] = r.wall_ms;
    return j.dump(2) + "\n";
}

inline Report parse_json(const std::string& text) {
    json j = json::parse(text);
    Report r;
    r.experiment = j.at("experiment").get<std::string>();
    r.provenance = j.at("provenance").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.params = j.at("params");
    for (const auto& e : j.at("estimates"))
        r.estimates.push_back(
            {e.at("name").get<std::string>(), estimate_from_json(e)});
    for (const auto& g : j.at("gates"))
        r.gates.push_back(
            {g.at("name").get<std::string>(), g.at("pass").get<bool>()});
    if (j.contains("table")) {
        r.table.header = j["table"].at("header").get<std::vector<std::string>>();
        r.table.rows =
            j["table"].at("rows").get<std::vector<std::vector<std::string>>>();
    }
    if (j.contains("extra")) r.extra = j["extra"];
    if (j.contains("wall_ms")) r.wall_ms = j["wall_ms"].get<double>();
    return r;
}

/// CSV emission: a sweep table when present, otherwise one row per estimate
/// followed by gate rows. Stable ordering, byte-identical re-emission.
inline std::string emit_csv(const Report& r) {
    std::string out;
    if (!r.table.empty()) {
        for (std::size_t i = 0; i < r.table.header.size(); ++i) {
            if (i) out += ",";
            out += r.table.header[i];
        }
        out += "\n";
        for (const auto& row : r.table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ",";
                out += row[i];
            }
            out += "\n";
        }
        return out;
    }
    out = "name,trials,successes,p_hat,ci_low,ci_high,bound,bound_vacuous\n";
    for (const auto& ne : r.estimates) {
        const auto& e = ne.est;
        out += ne.name + "," + std::to_string(e.trials) + "," +
               std::to_string(e.successes) + "," + detail::fmt_double(e.p_hat) +
               "," + detail::fmt_double(e.ci_low) + "," +
               detail::fmt_double(e.ci_high) + ",";
        out += e.bound ? detail::fmt_double(*e.bound) : "";
        out += ",";
        out += e.bound ? (e.bound_vacuous ? "true" : "false") : "";
        out += "\n";
    }
    for (const auto& g : r.gates)
        out += "gate:" + g.name + ",,,,,,," + (g.pass ? "pass" : "fail") + "\n";
    return out;
}

inline std::string emit(const Report& r, const std::string& format) {
    if (format == "json") return emit_json(r);
    if (format == "csv") return emit_csv(r);
    throw std::invalid_argument("unknown report format: " + format);
}

}  // namespace poqm::report
