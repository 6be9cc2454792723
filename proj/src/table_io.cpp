#include "matchstat/table_io.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "matchstat/errors.hpp"

namespace matchstat::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    if (line.find(',') != std::string::npos) {
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    } else {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) fields.push_back(line.substr(i, j - i));
            i = j;
        }
    }
    for (auto& f : fields) {
        const auto begin = f.find_first_not_of(" \t");
        const auto end = f.find_last_not_of(" \t");
        f = (begin == std::string::npos) ? std::string{} : f.substr(begin, end - begin + 1);
    }
    return fields;
}

bool parse_double(const std::string& field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !field.empty();
}

ordered_json to_json(const PowerCell& c) {
    return {{"n", c.n},
            {"rho", c.rho},
            {"power_matching", c.power_matching},
            {"power_pearson", c.power_pearson},
            {"reps", c.reps_used},
            {"mc_stderr", c.mc_stderr}};
}

void finish_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << "\n"; }

}  // namespace

InputTable read_input_table(std::istream& in) {
    InputTable table;
    std::string line;
    long row = 0;
    bool saw_data = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_fields(line);
        double x = 0.0, y = 0.0;
        const bool parsed = fields.size() == 2 && parse_double(fields[0], x) &&
                            parse_double(fields[1], y);
        if (!parsed) {
            if (!saw_data && !table.header_present && fields.size() == 2) {
                table.header_present = true;  // header row
                continue;
            }
            throw DataError("row " + std::to_string(row) +
                            ": expected two numeric fields, got '" + line + "'");
        }
        if (!std::isfinite(x) || !std::isfinite(y))
            throw DataError("row " + std::to_string(row) + ": values must be finite");
        table.x.push_back(x);
        table.y.push_back(y);
        saw_data = true;
    }
    if (!saw_data) throw DataError("input contains no data rows");
    return table;
}

std::string fixed(double value, int decimals) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

void write_power_table(std::ostream& out, const std::vector<PowerCell>& cells,
                       const EmitOptions& options) {
    if (options.format == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& c : cells) j.push_back(to_json(c));
        finish_json(out, j);
        return;
    }
    if (options.header)
        out << "n,rho,power_matching,power_pearson,reps,mc_stderr\n";
    for (const auto& c : cells)
        out << c.n << ',' << fixed(c.rho) << ',' << fixed(c.power_matching) << ','
            << fixed(c.power_pearson) << ',' << c.reps_used << ',' << fixed(c.mc_stderr)
            << '\n';
}

void write_relpower_table(std::ostream& out, const std::vector<RelPowerCell>& cells,
                          const EmitOptions& options) {
    if (options.format == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& c : cells) {
            ordered_json row = to_json(c.cell);
            row["nominal_power"] = c.nominal_power;
            j.push_back(row);
        }
        finish_json(out, j);
        return;
    }
    if (options.header)
        out << "n,rho,nominal_power,power_matching,power_pearson,reps,mc_stderr\n";
    for (const auto& c : cells)
        out << c.cell.n << ',' << fixed(c.cell.rho) << ',' << fixed(c.nominal_power) << ','
            << fixed(c.cell.power_matching) << ',' << fixed(c.cell.power_pearson) << ','
            << c.cell.reps_used << ',' << fixed(c.cell.mc_stderr) << '\n';
}

void write_rae_table(std::ostream& out, const std::vector<JointStats>& rows,
                     const EmitOptions& options) {
    if (options.format == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows)
            j.push_back({{"n", r.n},
                         {"corr_m_rho", r.corr_m_rho},
                         {"corr_rho_tau", r.corr_rho_tau},
                         {"std_slope", r.std_slope_m_rho},
                         {"r_squared", r.r_squared_m_rho},
                         {"sd_m", r.sd_m},
                         {"sd_rho", r.sd_rho}});
        finish_json(out, j);
        return;
    }
    if (options.header)
        out << "n,corr_m_rho,corr_rho_tau,std_slope,r_squared,sd_m,sd_rho\n";
    for (const auto& r : rows)
        out << r.n << ',' << fixed(r.corr_m_rho) << ',' << fixed(r.corr_rho_tau) << ','
            << fixed(r.std_slope_m_rho) << ',' << fixed(r.r_squared_m_rho) << ','
            << fixed(r.sd_m) << ',' << fixed(r.sd_rho) << '\n';
}

void write_dispersion_table(std::ostream& out, const std::vector<DispersionRow>& rows,
                            const EmitOptions& options) {
    if (options.format == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows)
            j.push_back({{"n", r.n}, {"sd_m", r.sd_m}, {"sd_rho", r.sd_rho}});
        finish_json(out, j);
        return;
    }
    if (options.header) out << "n,sd_m,sd_rho\n";
    for (const auto& r : rows)
        out << r.n << ',' << fixed(r.sd_m) << ',' << fixed(r.sd_rho) << '\n';
}

void write_indicator_table(std::ostream& out, const std::vector<IndicatorRow>& rows,
                           const EmitOptions& options) {
    if (options.format == Format::json) {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows)
            j.push_back({{"n", r.n},
                         {"rho", r.rho},
                         {"bucket", bucket_name(r.bucket)},
                         {"prob_overestimate", r.prob_overestimate},
                         {"count", r.bucket_count}});
        finish_json(out, j);
        return;
    }
    if (options.header) out << "n,rho,bucket,prob_overestimate,count\n";
    for (const auto& r : rows)
        out << r.n << ',' << fixed(r.rho) << ',' << bucket_name(r.bucket) << ','
            << fixed(r.prob_overestimate) << ',' << r.bucket_count << '\n';
}

void write_test_result(std::ostream& out, const TestResult& result,
                       const EmitOptions& options) {
    if (options.format == Format::json) {
        finish_json(out, {{"statistic", result.statistic},
                          {"p_value", result.p_value},
                          {"mode", test_mode_name(result.mode)},
                          {"alpha", result.alpha},
                          {"reject", result.reject},
                          {"n", result.n}});
        return;
    }
    if (options.header) out << "statistic,p_value,mode,alpha,reject,n\n";
    out << fixed(result.statistic) << ',' << fixed(result.p_value) << ','
        << test_mode_name(result.mode) << ',' << fixed(result.alpha) << ','
        << (result.reject ? "true" : "false") << ',' << result.n << '\n';
}

}  // namespace matchstat::io
