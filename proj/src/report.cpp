#include "tracelab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace tracelab {

void EstimateReport::add_row(std::vector<double> row) {
    if (!columns.empty() && row.size() != columns.size())
        throw InvalidArgument("report '" + check + "': row width does not match columns");
    rows.push_back(std::move(row));
}

std::size_t EstimateReport::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("report '" + check + "' has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

void EstimateReport::sort_rows() {
    const std::size_t k = key_columns;
    std::stable_sort(rows.begin(), rows.end(), [k](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.begin() + static_cast<long>(std::min(k, a.size())),
                                            b.begin(), b.begin() + static_cast<long>(std::min(k, b.size())));
    });
}

void EstimateReport::summarize(const std::string& ratio_column) {
    sort_rows();
    const std::size_t c = column(ratio_column);
    min_ratio = std::numeric_limits<double>::infinity();
    max_ratio = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        min_ratio = std::min(min_ratio, row[c]);
        max_ratio = std::max(max_ratio, row[c]);
    }
    if (rows.empty()) min_ratio = max_ratio = std::numeric_limits<double>::quiet_NaN();
}

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == std::trunc(value) && std::abs(value) < 1e15) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(value));
        return std::string(buf, end);
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, end);
}

void write_csv(std::ostream& out, const EstimateReport& report) {
    for (std::size_t i = 0; i < report.columns.size(); ++i) out << (i ? "," : "") << report.columns[i];
    out << '\n';
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_real(row[i]);
        out << '\n';
    }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

}  // namespace tracelab
