/**
 * @file
 * @brief Shared primitives: error type, dense row-major matrix, CSR sparse
 *        matrix, seeded random source and content hashing.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

namespace sepgcn {

/// Error category; maps one-to-one onto CLI exit codes.
enum class ErrorKind { input, config, numerical };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    [[nodiscard]] int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::input: return 2;
            case ErrorKind::config: return 3;
            case ErrorKind::numerical: return 4;
        }
        return 1;
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) { throw Error(kind, what); }

/**
 * @brief Dense row-major matrix of doubles.
 */
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    double &operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const Matrix &, const Matrix &) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Sum of squares of every entry.
[[nodiscard]] inline double squared_norm(const Matrix &m) {
    double s = 0.0;
    for (double v : m.data()) {
        s += v * v;
    }
    return s;
}

/// (row, col, value) triple used to assemble sparse matrices.
struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
};

/// Worker count used by the row-parallel kernels; 1 means strictly sequential.
inline std::size_t &thread_count() {
    static std::size_t n = 1;
    return n;
}

/**
 * @brief Run @p fn over [0, n) split into contiguous chunks.
 *
 * Each index is handled by exactly one worker, so kernels that write only
 * their own output row stay bit-identical for any thread count.
 */
template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n / 256, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) {
                fn(i);
            }
        });
    }
}

/**
 * @brief Compressed sparse row matrix.
 *
 * Entries within a row are sorted by column; products accumulate each output
 * row sequentially in that order.
 */
class CsrMatrix {
  public:
    CsrMatrix() = default;

    /// Assemble from triplets; duplicate coordinates are summed.
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) : rows_(rows), cols_(cols) {
        std::sort(entries.begin(), entries.end(), [](const Triplet &a, const Triplet &b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        row_ptr_.assign(rows + 1, 0);
        col_.reserve(entries.size());
        val_.reserve(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const Triplet &t = entries[k];
            if (t.row >= rows || t.col >= cols) {
                throw std::out_of_range("CsrMatrix: triplet outside matrix bounds");
            }
            if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
                val_.back() += t.value;
                continue;
            }
            col_.push_back(t.col);
            val_.push_back(t.value);
            ++row_ptr_[t.row + 1];
        }
        for (std::size_t r = 0; r < rows; ++r) {
            row_ptr_[r + 1] += row_ptr_[r];
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return val_.size(); }

    [[nodiscard]] std::span<const std::uint32_t> row_cols(std::size_t r) const noexcept {
        return {col_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    [[nodiscard]] std::span<const double> row_values(std::size_t r) const noexcept {
        return {val_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

    [[nodiscard]] std::vector<Triplet> triplets() const {
        std::vector<Triplet> out;
        out.reserve(nnz());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
                out.push_back({static_cast<std::uint32_t>(r), col_[p], val_[p]});
            }
        }
        return out;
    }

    [[nodiscard]] CsrMatrix transposed() const {
        std::vector<Triplet> t = triplets();
        for (Triplet &e : t) {
            std::swap(e.row, e.col);
        }
        return CsrMatrix(cols_, rows_, std::move(t));
    }

    /// out = this * in
    void multiply(const Matrix &in, Matrix &out) const {
        if (in.rows() != cols_) {
            fail(ErrorKind::numerical, "sparse product: dimension mismatch (matrix has " + std::to_string(cols_) +
                                           " columns, operand has " + std::to_string(in.rows()) + " rows)");
        }
        if (out.rows() != rows_ || out.cols() != in.cols()) {
            out = Matrix(rows_, in.cols());
        }
        const std::size_t width = in.cols();
        parallel_for(rows_, [&](std::size_t r) {
            std::span<double> dst = out.row(r);
            std::fill(dst.begin(), dst.end(), 0.0);
            for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
                const double w = val_[p];
                const double *src = in.row(col_[p]).data();
                for (std::size_t c = 0; c < width; ++c) {
                    dst[c] += w * src[c];
                }
            }
        });
    }

    [[nodiscard]] Matrix multiply(const Matrix &in) const {
        Matrix out(rows_, in.cols());
        multiply(in, out);
        return out;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_;
    std::vector<double> val_;
};

/// Seeded generator; every stochastic step of a run draws from one of these.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n).
[[nodiscard]] inline std::size_t uniform_index(Rng &rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// 64-bit FNV-1a; used for snapshot checksums and config hashes.
[[nodiscard]] inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

/// Shortest decimal text that round-trips a double.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace sepgcn
