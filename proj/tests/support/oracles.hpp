// Apache License, Version 2.0, refer to LICENSE.txt
//
// Independent oracles for the numerical test suites. Everything here is
// computed by direct, unoptimized formulations (plain loops, linear space,
// grid search) so the library's optimized paths are checked against code
// that shares none of their structure.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ifsem/estep.hpp"
#include "ifsem/geometry.hpp"
#include "ifsem/ifs_model.hpp"
#include "ifsem/linalg.hpp"

namespace ifsem::oracle {

/// Density of one endpoint Gaussian evaluated in linear space.
inline double gaussian_density(const SphericalGaussian& g, std::span<const double> x) {
    const int h = g.dim();
    const double d2 = squared_distance(x, g.mean);
    return std::pow(2.0 * M_PI, -0.5 * h) * std::pow(g.sigma, -h) *
           std::exp(-d2 / (2.0 * g.sigma * g.sigma));
}

/// Mixture density by brute force: loop over enumerated codes, compose the
/// maps afresh per code, multiply prior and density in linear space.
inline double mixture_density_bruteforce(const IfsModel& model, std::span<const double> x) {
    const std::vector<Code> codes = enumerate_codes(model.k(), model.depth);
    double total = 0.0;
    for (const Code& code : codes) {
        double prior = model.depth_weights[code.size()];
        Similitude f = model.post;
        for (int digit : code) {
            prior *= model.weights[digit - 1];
            f = compose(f, model.components[digit - 1]);
        }
        total += prior * gaussian_density(transform_gaussian(f, SphericalGaussian::standard(model.dim)), x);
    }
    return total;
}

/// E-step by brute force in linear space, one code at a time.
inline std::vector<std::vector<double>> responsibilities_bruteforce(const IfsModel& model,
                                                                    const PointMatrix& batch) {
    const std::vector<Code> codes = enumerate_codes(model.k(), model.depth);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<double> row(codes.size());
        double sum = 0.0;
        for (std::size_t j = 0; j < codes.size(); ++j) {
            double prior = model.depth_weights[codes[j].size()];
            Similitude f = model.post;
            for (int digit : codes[j]) {
                prior *= model.weights[digit - 1];
                f = compose(f, model.components[digit - 1]);
            }
            row[j] = prior * gaussian_density(
                                 transform_gaussian(f, SphericalGaussian::standard(model.dim)),
                                 batch.row(i));
            sum += row[j];
        }
        for (double& v : row) v /= sum;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Best 2D rotation by scanning the angle at the given resolution.
inline Mat grid_search_rotation_2d(const Mat& a, double step = 1e-5) {
    double best_angle = 0.0;
    double best_value = -1e300;
    for (double angle = 0.0; angle < 2.0 * M_PI; angle += step) {
        const double c = std::cos(angle), s = std::sin(angle);
        // tr(A^T R) for R = [[c,-s],[s,c]]
        const double value = a(0, 0) * c + a(1, 0) * s - a(0, 1) * s + a(1, 1) * c;
        if (value > best_value) {
            best_value = value;
            best_angle = angle;
        }
    }
    Mat r(2, 2);
    r(0, 0) = std::cos(best_angle);
    r(0, 1) = -std::sin(best_angle);
    r(1, 0) = std::sin(best_angle);
    r(1, 1) = std::cos(best_angle);
    return r;
}

/// The per-component objective, written out literally:
///   Q(s, R, t) = -p H ln s - sum_ij P_ij z_j / (2 s^2) ||x_i - t - s R t_j||^2
/// with z_j and t_j taken from the post-free inner similitudes selected by
/// (tail_rows, cols); cols picks the responsibility columns.
inline double q_objective(const Responsibilities& resp, const PointMatrix& batch,
                          const CodeTable& table, std::span<const std::int64_t> tail_rows,
                          std::span<const std::int64_t> cols, const Similitude& f) {
    const int h = batch.dim;
    double p = 0.0;
    double penalty = 0.0;
    std::vector<double> mapped(h);
    for (std::size_t jj = 0; jj < cols.size(); ++jj) {
        const Similitude& inner = table.inner[tail_rows[jj]];
        const double z = 1.0 / (inner.scale * inner.scale);
        apply_in_place(f, inner.translation, mapped);  // t + s R t_j
        for (std::int64_t i = 0; i < resp.n; ++i) {
            const double pij = resp.at(i, cols[jj]);
            if (pij == 0.0) continue;
            p += pij;
            penalty += pij * z * squared_distance(batch.row(i), mapped);
        }
    }
    return -p * h * std::log(f.scale) - penalty / (2.0 * f.scale * f.scale);
}

/// Row index of a code, recomputed from its digits.
inline std::int64_t row_of_code(const CodeTable& table, const Code& code) {
    std::int64_t rank = 0;
    for (int digit : code) rank = rank * table.k + (digit - 1);
    return table.depth_offset(static_cast<int>(code.size())) + rank;
}

/// Responsibility columns whose code starts with k, paired with the table
/// rows of their tails; rebuilt from the code digits.
struct TailPairs {
    std::vector<std::int64_t> tail_rows;
    std::vector<std::int64_t> cols;
};

inline TailPairs tail_pairs(const CodeTable& table, int k) {
    TailPairs out;
    for (std::int64_t j = 0; j < table.size(); ++j) {
        if (table.first_digit[j] != k) continue;
        Code tail = table.code_at(j);
        tail.erase(tail.begin());
        out.tail_rows.push_back(row_of_code(table, tail));
        out.cols.push_back(j);
    }
    return out;
}

/// Skew-symmetric generator exponential by plain series; parameters fill the
/// upper triangle of the generator.
inline Mat rotation_exp(int dim, std::span<const double> params) {
    Mat s(dim, dim);
    std::size_t idx = 0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            s(i, j) = params[idx];
            s(j, i) = -params[idx];
            ++idx;
        }
    Mat result = Mat::identity(dim);
    Mat term = Mat::identity(dim);
    for (int n = 1; n < 64; ++n) {
        term = (1.0 / n) * (term * s);
        result = result + term;
        if (frobenius_norm(term) < 1e-18) break;
    }
    return result;
}

/// Upper regularized incomplete gamma Q(a, x); survival function of the
/// chi-square distribution via Q(df/2, x/2).
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // lower series
        double ap = a, del = 1.0 / a, sum = del;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // continued fraction
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, f = d;
    for (int n = 1; n < 500; ++n) {
        const double an = -n * (n - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double delta = d * c;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return f * std::exp(-x + a * std::log(x) - gln);
}

inline double chi_square_pvalue(double statistic, int dof) {
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

/// Log density of N(mu, Sigma) via Cholesky, for checking the spherical
/// special case against the general formula.
inline double multivariate_normal_logpdf(std::span<const double> x, std::span<const double> mu,
                                         const Mat& sigma) {
    const int h = sigma.rows;
    Mat l;
    if (!cholesky(sigma, l)) return -1e300;
    std::vector<double> d(h);
    for (int i = 0; i < h; ++i) d[i] = x[i] - mu[i];
    double maha = 0.0, half_logdet = 0.0;
    std::vector<double> y(h);
    for (int i = 0; i < h; ++i) {
        double s = d[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
        maha += y[i] * y[i];
        half_logdet += std::log(l(i, i));
    }
    return -0.5 * h * std::log(2.0 * M_PI) - half_logdet - 0.5 * maha;
}

}  // namespace ifsem::oracle
