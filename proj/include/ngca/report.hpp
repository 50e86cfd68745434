#ifndef NGCA_REPORT_HPP
#define NGCA_REPORT_HPP

#include "ngca/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ngca::report {

inline constexpr const char* kToolName = "ngca_lab";
inline constexpr const char* kToolVersion = "0.1.0";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::int64_t, std::uint64_t, double, bool, std::string>;

/// Provenance written at the top of every artifact.
struct Header {
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, Cell>> params;
};

struct Table {
    std::string schema;
    std::vector<std::vector<Cell>> rows;
};

inline const std::map<std::string, std::vector<std::string>>& schemas() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"beta", {"n", "m", "k", "exact", "mc_mean", "mc_stderr", "reps"}},
        {"decay", {"n", "m", "k", "replicate", "seed", "value"}},
        {"decay-summary", {"k", "n", "median", "q1", "q3", "slope"}},
        {"cap", {"n", "phi", "ratio", "log_ratio"}},
        {"distinguish", {"trial", "hypothesis", "n", "d", "query_value", "null_center", "threshold", "decision", "correct"}},
        {"concentration", {"n", "d", "query_id", "replicate", "gap", "tau", "exceeded"}},
        {"chi2-avg", {"n", "m", "law", "one_plus_chi2", "chi2", "normalization_error", "relative_change", "finite"}},
        {"discrete-gauss", {"s", "theta", "k", "moment", "rescaled_moment", "gaussian_moment", "deviation"}},
    };
    return s;
}

inline const std::vector<std::string>& columns(const std::string& schema) {
    const auto it = schemas().find(schema);
    if (it == schemas().end()) throw ContractViolation("report: unknown schema '" + schema + "'");
    return it->second;
}

/// 17 significant digits, so every double round-trips.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return format_double(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else return std::to_string(v);
        },
        c);
}

inline std::string json_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c))
        return std::isfinite(*d) ? format_double(*d) : nlohmann::json(format_double(*d)).dump();
    if (const auto* s = std::get_if<std::string>(&c)) return nlohmann::json(*s).dump();
    return format_cell(c);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string argv_json(const std::vector<std::string>& argv) { return nlohmann::json(argv).dump(); }

inline void check_rows(const Table& t) {
    const auto& cols = columns(t.schema);
    for (const auto& r : t.rows)
        if (r.size() != cols.size()) throw ContractViolation("report: row width does not match schema '" + t.schema + "'");
}

inline std::string to_csv(const Table& t, const Header& h) {
    check_rows(t);
    std::ostringstream os;
    os << "# tool: " << kToolName << " " << kToolVersion << "\n";
    os << "# argv: " << argv_json(h.argv) << "\n";
    os << "# seed: " << h.seed << "\n";
    os << "# schema: " << t.schema << "\n";
    for (const auto& [k, v] : h.params) os << "# param " << k << "=" << format_cell(v) << "\n";
    const auto& cols = columns(t.schema);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(format_cell(r[i]));
        os << "\n";
    }
    return os.str();
}

inline std::string header_json(const Header& h) {
    std::ostringstream os;
    os << "{\"tool\":" << nlohmann::json(kToolName).dump() << ",\"version\":" << nlohmann::json(kToolVersion).dump()
       << ",\"argv\":" << argv_json(h.argv) << ",\"seed\":" << h.seed << ",\"params\":{";
    for (std::size_t i = 0; i < h.params.size(); ++i)
        os << (i ? "," : "") << nlohmann::json(h.params[i].first).dump() << ":" << json_cell(h.params[i].second);
    os << "}}";
    return os.str();
}

inline std::string to_json(const Table& t, const Header& h) {
    check_rows(t);
    const auto& cols = columns(t.schema);
    std::ostringstream os;
    os << "{\"header\":" << header_json(h) << ",\n\"schema\":" << nlohmann::json(t.schema).dump() << ",\n\"records\":[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        os << (r ? ",\n" : "\n") << "{";
        for (std::size_t i = 0; i < cols.size(); ++i)
            os << (i ? "," : "") << nlohmann::json(cols[i]).dump() << ":" << json_cell(t.rows[r][i]);
        os << "}";
    }
    os << "\n]}\n";
    return os.str();
}

/// A free-form JSON document with the provenance header under "header".
inline std::string document_json(const nlohmann::ordered_json& body, const Header& h) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(header_json(h));
    nlohmann::ordered_json doc;
    doc["header"] = j;
    for (const auto& [k, v] : body.items()) doc[k] = v;
    return doc.dump(2) + "\n";
}

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ContractViolation("report: unknown format '" + s + "'");
}

/// Writes `content` to `path`; "-" or empty means `fallback`.
inline void write_artifact(const std::string& content, const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << content;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

inline void emit_report(const Table& t, const Header& h, const std::string& path, Format f, std::ostream& fallback) {
    write_artifact(f == Format::csv ? to_csv(t, h) : to_json(t, h), path, fallback);
}

}  // namespace ngca::report

#endif  // NGCA_REPORT_HPP
