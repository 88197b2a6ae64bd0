#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace micmac {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    /// Copy of the given rows (in order) restricted to the given columns (in order).
    Matrix select(std::span<const std::size_t> row_ids, std::span<const std::size_t> col_ids) const {
        Matrix out(row_ids.size(), col_ids.size());
        for (std::size_t i = 0; i < row_ids.size(); ++i) {
            const auto src = row(row_ids[i]);
            for (std::size_t j = 0; j < col_ids.size(); ++j) out(i, j) = src[col_ids[j]];
        }
        return out;
    }

    Matrix select_rows(std::span<const std::size_t> row_ids) const {
        Matrix out(row_ids.size(), cols_);
        for (std::size_t i = 0; i < row_ids.size(); ++i) {
            const auto src = row(row_ids[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    Matrix select_cols(std::span<const std::size_t> col_ids) const {
        std::vector<std::size_t> all(rows_);
        for (std::size_t r = 0; r < rows_; ++r) all[r] = r;
        return select(all, col_ids);
    }

    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace micmac
