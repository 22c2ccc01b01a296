// SPDX-License-Identifier: Apache-2.0
//
// Deterministic scalar/vector/matrix kernels shared by every module.
// All reductions accumulate in double with a fixed left-to-right order,
// regardless of the storage precision, so results are identical run to run.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gaze/error.hpp"

namespace gaze {

using Vec = std::vector<double>;

// Row-major matrix. Dimensions are fixed at construction.
template <class T = double>
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, T fill = T{0})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat from_row_major(std::size_t rows, std::size_t cols, std::vector<T> data) {
        if (data.size() != rows * cols)
            throw DimensionError("Mat::from_row_major: data size does not match rows*cols");
        Mat m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.data_ = std::move(data);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T& at(std::size_t r, std::size_t c) {
        check(r, c);
        return data_[r * cols_ + c];
    }
    const T& at(std::size_t r, std::size_t c) const {
        check(r, c);
        return data_[r * cols_ + c];
    }

    std::span<T> row(std::size_t r) {
        if (r >= rows_) throw IndexError("Mat::row: row " + std::to_string(r) + " out of range");
        return {data_.data() + r * cols_, cols_};
    }
    std::span<const T> row(std::size_t r) const {
        if (r >= rows_) throw IndexError("Mat::row: row " + std::to_string(r) + " out of range");
        return {data_.data() + r * cols_, cols_};
    }

    std::span<T> flat() { return {data_.data(), data_.size()}; }
    std::span<const T> flat() const { return {data_.data(), data_.size()}; }

    bool all_finite() const {
        for (const T& v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

private:
    void check(std::size_t r, std::size_t c) const {
        if (r >= rows_ || c >= cols_)
            throw IndexError("Mat::at: (" + std::to_string(r) + "," + std::to_string(c) +
                             ") out of range for " + std::to_string(rows_) + "x" +
                             std::to_string(cols_));
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// Inner product, accumulated in double no matter the storage precision.
inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw DimensionError("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

// Max-shifted softmax. Output is positive and sums to 1 within 1e-12;
// invariant under adding a constant to every score.
inline Vec softmax_stable(std::span<const double> scores) {
    if (scores.empty()) throw DimensionError("softmax_stable: empty input");
    double hi = scores[0];
    for (double s : scores)
        if (s > hi) hi = s;
    Vec out(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - hi);
        total += out[i];
    }
    for (double& p : out) p /= total;
    return out;
}

namespace detail {
inline std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic random stream: xoshiro256++ state seeded with a SplitMix64
// chain. The byte sequence per seed is identical across runs and platforms.
class SeededStream {
public:
    explicit SeededStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = detail::splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the spare draw is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n) by 128-bit multiply-shift.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    Vec normal_vec(std::size_t n, double stddev = 1.0) {
        Vec v(n);
        for (double& x : v) x = stddev * normal();
        return v;
    }

    Mat<double> normal_mat(std::size_t rows, std::size_t cols, double stddev = 1.0) {
        Mat<double> m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) m(r, c) = stddev * normal();
        return m;
    }

private:
    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Central-difference gradient estimate: (f(x+h e_i) - f(x-h e_i)) / 2h.
inline Vec central_difference(const std::function<double(std::span<const double>)>& f,
                              std::span<const double> x, double h) {
    Vec point(x.begin(), x.end());
    Vec grad(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        point[i] = x[i] + h;
        const double fp = f(point);
        point[i] = x[i] - h;
        const double fm = f(point);
        point[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("central_difference: non-finite function value at coordinate " +
                               std::to_string(i));
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

// y = x . W  for a row vector x (length W.rows()) and W (rows x cols).
template <class T>
inline Vec project(std::span<const double> x, const Mat<T>& w) {
    if (x.size() != w.rows())
        throw DimensionError("project: vector length " + std::to_string(x.size()) +
                             " does not match matrix rows " + std::to_string(w.rows()));
    Vec y(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double xi = x[i];
        const auto row = w.row(i);
        for (std::size_t j = 0; j < w.cols(); ++j) y[j] += xi * static_cast<double>(row[j]);
    }
    return y;
}

// W += a b^T  (a indexes rows, b indexes columns).
inline void add_outer(Mat<double>& w, std::span<const double> a, std::span<const double> b) {
    if (a.size() != w.rows() || b.size() != w.cols())
        throw DimensionError("add_outer: operand shapes do not match matrix");
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a[i];
        auto row = w.row(i);
        for (std::size_t j = 0; j < b.size(); ++j) row[j] += ai * b[j];
    }
}

// grad_x += g . W^T  (back-projection of a row-vector gradient).
template <class T>
inline void add_backproject(std::span<double> grad_x, std::span<const double> g, const Mat<T>& w) {
    if (g.size() != w.cols() || grad_x.size() != w.rows())
        throw DimensionError("add_backproject: operand shapes do not match matrix");
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const auto row = w.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) acc += g[j] * static_cast<double>(row[j]);
        grad_x[i] += acc;
    }
}

inline double mean_squared_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("mean_squared_error: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

}  // namespace gaze
