#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"

#ifndef FRACGEO_VERSION
#define FRACGEO_VERSION "0.0.0"
#endif

namespace fracgeo {

enum class PassFlag { Pass, Fail, NotApplicable, Warn };

inline const char* to_string(PassFlag f) {
    switch (f) {
    case PassFlag::Pass: return "true";
    case PassFlag::Fail: return "false";
    case PassFlag::NotApplicable: return "na";
    case PassFlag::Warn: return "warn";
    }
    return "na";
}

inline PassFlag parse_pass_flag(std::string_view s) {
    if (s == "true") return PassFlag::Pass;
    if (s == "false") return PassFlag::Fail;
    if (s == "na") return PassFlag::NotApplicable;
    if (s == "warn") return PassFlag::Warn;
    throw InvalidArgument("unknown pass flag '" + std::string(s) + "'");
}

inline PassFlag pass_if(bool ok) { return ok ? PassFlag::Pass : PassFlag::Fail; }

struct ReportRow {
    std::string experiment;
    std::string shape_id;
    double delta = 0;
    double q = 0;
    double h = 0;
    std::string quantity;
    double value = 0;
    double error_bound = 0;
    PassFlag pass = PassFlag::NotApplicable;

    friend bool operator==(const ReportRow& a, const ReportRow& b) {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return a.experiment == b.experiment && a.shape_id == b.shape_id && same(a.delta, b.delta) &&
               same(a.q, b.q) && same(a.h, b.h) && a.quantity == b.quantity && same(a.value, b.value) &&
               same(a.error_bound, b.error_bound) && a.pass == b.pass;
    }
};

inline constexpr std::string_view kCsvHeader = "experiment,shape_id,delta,q,h,quantity,value,error_bound,pass";

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidArgument("not a number: '" + std::string(s) + "'");
    return v;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += '"', ++i;
            else if (c == '"') quoted = false;
            else out.back() += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    if (quoted) throw InvalidArgument("unterminated quote in CSV line");
    return out;
}

} // namespace detail

/// Result table of one run plus a metadata header.
class Report {
public:
    void add(ReportRow row) { rows_.push_back(std::move(row)); }
    void add_metadata(std::string key, std::string value) { meta_.emplace_back(std::move(key), std::move(value)); }

    [[nodiscard]] const std::vector<ReportRow>& rows() const noexcept { return rows_; }
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& metadata() const noexcept { return meta_; }

    /// Stable order by (shape_id, quantity).
    void sort_rows() {
        std::stable_sort(rows_.begin(), rows_.end(), [](const ReportRow& a, const ReportRow& b) {
            return std::tie(a.shape_id, a.quantity) < std::tie(b.shape_id, b.quantity);
        });
    }

    [[nodiscard]] bool any_failed() const {
        return std::any_of(rows_.begin(), rows_.end(), [](const ReportRow& r) { return r.pass == PassFlag::Fail; });
    }

    [[nodiscard]] const ReportRow* find(std::string_view shape_id, std::string_view quantity) const {
        for (const auto& r : rows_)
            if (r.shape_id == shape_id && r.quantity == quantity) return &r;
        return nullptr;
    }

    /// Metadata lines start with '#'; then the fixed header and one line per row.
    void write_csv(std::ostream& os) const {
        for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << '\n';
        os << kCsvHeader << '\n';
        write_body(os);
    }

    void write_body(std::ostream& os) const {
        for (const auto& r : rows_) {
            os << detail::csv_field(r.experiment) << ',' << detail::csv_field(r.shape_id) << ','
               << format_double(r.delta) << ',' << format_double(r.q) << ',' << format_double(r.h) << ','
               << detail::csv_field(r.quantity) << ',' << format_double(r.value) << ','
               << format_double(r.error_bound) << ',' << to_string(r.pass) << '\n';
        }
    }

    static Report read_csv(std::istream& is) {
        Report rep;
        std::string line;
        bool header = false;
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line[0] == '#') {
                const auto colon = line.find(": ");
                if (colon == std::string::npos) continue;
                rep.add_metadata(line.substr(2, colon - 2), line.substr(colon + 2));
                continue;
            }
            if (!header) {
                if (line != kCsvHeader) throw InvalidArgument("unexpected CSV header: " + line);
                header = true;
                continue;
            }
            const auto f = detail::split_csv_line(line);
            if (f.size() != 9) throw InvalidArgument("CSV row must have 9 fields: " + line);
            rep.add({f[0], f[1], parse_double(f[2]), parse_double(f[3]), parse_double(f[4]), f[5],
                     parse_double(f[6]), parse_double(f[7]), parse_pass_flag(f[8])});
        }
        if (!header) throw InvalidArgument("CSV header missing");
        return rep;
    }

private:
    std::vector<ReportRow> rows_;
    std::vector<std::pair<std::string, std::string>> meta_;
};

/// UTC timestamp in ISO 8601 form.
inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline const char* version() { return FRACGEO_VERSION; }

} // namespace fracgeo
