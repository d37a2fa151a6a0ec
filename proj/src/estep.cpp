// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/estep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ifsem {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Contributions more than 40 nats below the row maximum are dropped; they
// change row sums by less than m * 4e-18.
constexpr double kExpCutoff = -40.0;

void estep_row(const FlatDensityTable& flat, std::span<const double> x, double* row,
               double* loglik) {
    const int h = flat.dim;
    const std::int64_t m = flat.m;
    const double* mu = flat.mu.data();
    double best = kNegInf;
    for (std::int64_t j = 0; j < m; ++j, mu += h) {
        if (flat.coeff[j] == kNegInf) {
            row[j] = kNegInf;
            continue;
        }
        double d2 = 0.0;
        for (int c = 0; c < h; ++c) {
            const double t = x[c] - mu[c];
            d2 += t * t;
        }
        row[j] = flat.coeff[j] - flat.inv_two_sigma2[j] * d2;
        best = std::max(best, row[j]);
    }
    double sum = 0.0;
    for (std::int64_t j = 0; j < m; ++j) {
        const double l = row[j] - best;
        if (l > kExpCutoff) {
            row[j] = std::exp(l);
            sum += row[j];
        } else {
            row[j] = 0.0;
        }
    }
    const double inv = 1.0 / sum;
    for (std::int64_t j = 0; j < m; ++j) row[j] *= inv;
    *loglik = best + std::log(sum);
}
}  // namespace

Responsibilities e_step(const CodeTable& table, const PointMatrix& batch, int workers) {
    if (batch.empty()) throw InputError("e_step: batch must be nonempty");
    if (batch.dim != table.dim) throw InputError("e_step: dimension mismatch");
    const FlatDensityTable flat(table);
    Responsibilities r;
    r.n = static_cast<std::int64_t>(batch.size());
    r.m = flat.m;
    r.values.resize(r.n * r.m);
    r.row_loglik.resize(r.n);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(workers, 1))
#endif
    for (std::int64_t i = 0; i < r.n; ++i)
        estep_row(flat, batch.row(i), r.values.data() + i * r.m, &r.row_loglik[i]);
    return r;
}

Responsibilities e_step_serial_reference(const CodeTable& table, const PointMatrix& batch) {
    if (batch.empty()) throw InputError("e_step: batch must be nonempty");
    if (batch.dim != table.dim) throw InputError("e_step: dimension mismatch");
    Responsibilities r;
    r.n = static_cast<std::int64_t>(batch.size());
    r.m = table.size();
    r.values.resize(r.n * r.m);
    r.row_loglik.resize(r.n);

    for (std::int64_t i = 0; i < r.n; ++i) {
        double* row = r.values.data() + i * r.m;
        double best = kNegInf;
        for (std::int64_t j = 0; j < r.m; ++j) {
            row[j] = table.log_prior[j] == kNegInf
                         ? kNegInf
                         : table.log_prior[j] + log_density(table.endpoint[j], batch.row(i));
            best = std::max(best, row[j]);
        }
        double sum = 0.0;
        for (std::int64_t j = 0; j < r.m; ++j) {
            row[j] = row[j] == kNegInf ? 0.0 : std::exp(row[j] - best);
            sum += row[j];
        }
        for (std::int64_t j = 0; j < r.m; ++j) row[j] /= sum;
        r.row_loglik[i] = best + std::log(sum);
    }
    return r;
}

}  // namespace ifsem
