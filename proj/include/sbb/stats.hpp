#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace sbb {

double mean(const std::vector<double>& x);

/// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
double sample_sd(const std::vector<double>& x);

/// Quantile with linear interpolation between order statistics
/// (R type 7). p in [0, 1]; x need not be sorted.
double quantile_type7(std::vector<double> x, double p);

/// Same, for input already sorted ascending.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Dense row-major matrix, just enough for design matrices and draw grids.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Run fn(i) for i in [0, n). With threads > 1, indices are partitioned
/// across workers; fn must only write to per-index slots so that results
/// do not depend on the schedule.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Shortest round-trip decimal text for a double (used by every CSV writer
/// so that reruns are byte-identical).
std::string format_double(double v);

} // namespace sbb
