// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <vector>

#include "ifsem/core.hpp"
#include "ifsem/ifs_model.hpp"

namespace ifsem {

/// Row-stochastic N x M responsibility matrix: values[i*m + j] is the
/// posterior probability that code j generated batch point i. Columns follow
/// the canonical code order of the table the matrix was computed from.
struct Responsibilities {
    std::int64_t n = 0;
    std::int64_t m = 0;
    std::vector<double> values;      // row-major
    std::vector<double> row_loglik;  // log p(x_i), the log normalizer per row

    double at(std::int64_t i, std::int64_t j) const { return values[i * m + j]; }
};

/// Expectation step. Rows are independent and each is written to its own
/// slice, so the result is identical for any worker count.
Responsibilities e_step(const CodeTable& table, const PointMatrix& batch, int workers = 1);

/// Straightforward single-threaded formulation kept as a cross-check for the
/// tuned kernel; used by tests and the benchmark.
Responsibilities e_step_serial_reference(const CodeTable& table, const PointMatrix& batch);

}  // namespace ifsem
