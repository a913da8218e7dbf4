#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ivgp {

// Column-major numeric data set; the last CSV column becomes `response`.
struct Dataset {
    std::vector<std::vector<double>> columns; // p columns of n values
    std::vector<double> response;             // n values
    std::vector<std::string> names;           // p feature names

    std::size_t rows() const { return response.size(); }
    std::size_t features() const { return columns.size(); }

    std::vector<double> row(std::size_t i) const;

    // Rows selected by `indices`, in that order.
    Dataset subset(std::span<const std::size_t> indices) const;

    // Throws std::invalid_argument when the shape is inconsistent.
    void check_shape() const;
};

} // namespace ivgp
