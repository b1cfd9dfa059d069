#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tracelab/common.hpp"

namespace tracelab {

// Outcome of one verification: a table of per-item rows plus the summary
// statistic the pass predicate is evaluated on.
struct EstimateReport {
    std::string check;
    std::vector<std::string> columns;
    // Rows are sorted lexicographically on their first key_columns entries.
    std::size_t key_columns = 1;
    std::vector<std::vector<double>> rows;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    bool pass = false;
    std::string predicate;
    double runtime_seconds = 0.0;
    std::vector<std::string> warnings;
    // Fitted slopes, constants and other scalar diagnostics.
    std::map<std::string, double> metrics;

    void add_row(std::vector<double> row);
    // Sorts rows and sets min/max over the column named `ratio_column`.
    void summarize(const std::string& ratio_column);
    void sort_rows();
    std::size_t column(const std::string& name) const;
};

// 17 significant digits, '.' separator; integers print without exponent.
std::string format_real(double value);

void write_csv(std::ostream& out, const EstimateReport& report);

// Least-squares slope of log(y) against log(x); non-positive entries skipped.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tracelab
