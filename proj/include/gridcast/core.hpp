#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridcast {

// Error categories; the CLI maps them to exit codes
// (config=2, data=3, training=4, evaluation=5).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * cols, cols};
    }
};

// Mean computed relative to the first element. Exact for constant input
// (the deviations are all zero), and at least as accurate in general.
double shifted_mean(std::span<const double> v);

std::uint64_t fnv1a64(std::string_view s);

/// Formats a double for report CSVs. Fixed %.10g so reruns are byte-identical.
std::string format_double(double v);

/// Runs fn(i) for every i in [0, n) using up to `threads` workers.
/// Callers must write results into per-index slots; outputs are then
/// identical for any thread count. Exceptions propagate (first one wins).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace gridcast
