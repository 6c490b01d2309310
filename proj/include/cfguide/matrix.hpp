#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace cfguide {

// Dense row-major matrix of doubles. Rows are contiguous so kernels can walk
// them as spans.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        assert(data_.size() == rows_ * cols_);
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const noexcept { return data_; }

    // Copy of the given rows restricted to the given columns, in the order given.
    Matrix select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
        Matrix out(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double* src = data_.data() + rows[i] * cols_;
            double* dst = out.data_.data() + i * cols.size();
            for (std::size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace cfguide
