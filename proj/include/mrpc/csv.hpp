#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mrpc::csv {

/// Floats are written with 17 significant digits; non-finite values as NA.
std::string format_double(double v);
std::string format_index_set(const std::vector<int>& idx);  // "1-2-3-4"

std::vector<std::string> split(std::string_view line, char sep = ',');
double parse_double(std::string_view s);  // accepts NA / nan
int parse_int(std::string_view s);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position, or InputError naming the missing column.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

/// Reads a header + rows table. `source` names the input in errors.
Table read_table(std::istream& is, std::string_view source);

void write_matrix_rows(std::ostream& os, const Eigen::MatrixXd& a);

}  // namespace mrpc::csv
