#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "matchstat/inference.hpp"
#include "matchstat/montecarlo.hpp"

namespace matchstat::io {

enum class Format { csv, json };

struct EmitOptions {
    Format format = Format::csv;
    bool header = true;  // CSV only
};

// Two-column numeric table parsed from delimited text (comma, or whitespace
// when no comma is present). An unparseable first row is treated as a
// header; anything unparseable later raises DataError with the row number.
struct InputTable {
    std::vector<double> x;
    std::vector<double> y;
    bool header_present = false;

    std::size_t rows() const { return x.size(); }
};

InputTable read_input_table(std::istream& in);

// Fixed-point decimal with the C locale; NaN prints as "nan".
std::string fixed(double value, int decimals = 6);

// Emitters. CSV is comma-delimited with LF line endings; probabilities and
// other reals carry 6 decimals. JSON preserves full double precision.
void write_power_table(std::ostream& out, const std::vector<PowerCell>& cells,
                       const EmitOptions& options);
void write_relpower_table(std::ostream& out, const std::vector<RelPowerCell>& cells,
                          const EmitOptions& options);
void write_rae_table(std::ostream& out, const std::vector<JointStats>& rows,
                     const EmitOptions& options);
void write_dispersion_table(std::ostream& out, const std::vector<DispersionRow>& rows,
                            const EmitOptions& options);
void write_indicator_table(std::ostream& out, const std::vector<IndicatorRow>& rows,
                           const EmitOptions& options);
void write_test_result(std::ostream& out, const TestResult& result,
                       const EmitOptions& options);

}  // namespace matchstat::io
