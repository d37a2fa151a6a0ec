// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/mog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ifsem {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kCollapseVariance = 1e-12;

// Per-component constants for density evaluation.
struct ComponentDensity {
    std::vector<double> mean;
    double log_norm = 0.0;                 // ln w - H/2 ln 2pi - 1/2 ln det
    double inv_two_var = 0.0;              // spherical only
    Mat chol;                              // full only
    bool spherical = true;

    double log_term(std::span<const double> x) const {
        if (spherical) return log_norm - inv_two_var * squared_distance(x, mean);
        std::vector<double> d(mean.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - mean[i];
        // forward solve L y = d; Mahalanobis = ||y||^2
        double maha = 0.0;
        const int h = chol.rows;
        std::vector<double> y(h);
        for (int i = 0; i < h; ++i) {
            double s = d[i];
            for (int k = 0; k < i; ++k) s -= chol(i, k) * y[k];
            y[i] = s / chol(i, i);
            maha += y[i] * y[i];
        }
        return log_norm - 0.5 * maha;
    }
};

std::vector<ComponentDensity> prepare(const MogModel& model) {
    const int h = model.dim;
    const double norm0 = -0.5 * h * std::log(2.0 * M_PI);
    std::vector<ComponentDensity> out(model.k());
    for (int k = 0; k < model.k(); ++k) {
        ComponentDensity& c = out[k];
        c.mean = model.means[k];
        const double lw = model.weights[k] > 0.0 ? std::log(model.weights[k]) : kNegInf;
        if (model.mode == MogMode::kSpherical) {
            const double var = model.variances[k];
            c.spherical = true;
            c.inv_two_var = 1.0 / (2.0 * var);
            c.log_norm = lw + norm0 - 0.5 * h * std::log(var);
        } else {
            c.spherical = false;
            if (!cholesky(model.covariances[k], c.chol))
                throw InputError("mog component covariance is not positive definite");
            double half_logdet = 0.0;
            for (int i = 0; i < h; ++i) half_logdet += std::log(c.chol(i, i));
            c.log_norm = lw + norm0 - half_logdet;
        }
    }
    return out;
}

double log_density_prepared(const std::vector<ComponentDensity>& comps, std::span<const double> x) {
    double best = kNegInf, sum = 0.0;
    for (const ComponentDensity& c : comps) {
        if (c.log_norm == kNegInf) continue;
        const double l = c.log_term(x);
        if (l <= best) {
            sum += std::exp(l - best);
        } else {
            sum = sum * std::exp(best - l) + 1.0;
            best = l;
        }
    }
    return best == kNegInf ? kNegInf : best + std::log(sum);
}

double global_variance(const PointMatrix& data, std::vector<double>* mean_out) {
    const int h = data.dim;
    const std::size_t n = data.size();
    std::vector<double> mean(h, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        for (int c = 0; c < h; ++c) mean[c] += x[c];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += squared_distance(data.row(i), mean);
    var /= static_cast<double>(n) * h;
    if (mean_out) *mean_out = std::move(mean);
    return var;
}

Mat global_covariance(const PointMatrix& data) {
    const int h = data.dim;
    const std::size_t n = data.size();
    std::vector<double> mean;
    global_variance(data, &mean);
    Mat cov(h, h);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < h; ++c) cov(r, c) += (x[r] - mean[r]) * (x[c] - mean[c]);
    }
    for (double& v : cov.a) v /= static_cast<double>(n);
    return cov;
}

void regularize(Mat& cov) {
    const double ridge = 1e-9 * trace(cov) / cov.rows;
    for (int i = 0; i < cov.rows; ++i) cov(i, i) += ridge;
}

}  // namespace

double mog_log_density(const MogModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.dim) throw InputError("mog_log_density: dimension mismatch");
    return log_density_prepared(prepare(model), x);
}

double mog_mean_log_density(const MogModel& model, const PointMatrix& points) {
    if (points.empty()) throw InputError("mog_mean_log_density: empty point set");
    if (points.dim != model.dim) throw InputError("mog_mean_log_density: dimension mismatch");
    const auto comps = prepare(model);
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        sum += log_density_prepared(comps, points.row(i));
    return sum / static_cast<double>(points.size());
}

MogModel init_mog(const PointMatrix& data, int k, MogMode mode, Rng& rng) {
    if (static_cast<std::size_t>(k) > data.size()) throw InputError("init_mog: need N >= K");
    MogModel model;
    model.dim = data.dim;
    model.mode = mode;
    model.weights.assign(k, 1.0 / k);

    // distance-weighted seeding on distinct data points: after the first
    // uniform draw, each next mean is drawn with probability proportional to
    // the squared distance from the nearest mean chosen so far
    const std::size_t n = data.size();
    std::vector<double> nearest_sq(n, 0.0);
    {
        const auto row = data.row(rng.below(n));
        model.means.emplace_back(row.begin(), row.end());
    }
    for (int c = 1; c < k; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double d = squared_distance(data.row(i), model.means.back());
            if (c > 1) d = std::min(d, nearest_sq[i]);
            nearest_sq[i] = d;
        }
        double total = 0.0;
        for (double d : nearest_sq) total += d;
        const std::size_t pick = total > 0.0 ? rng.categorical(nearest_sq) : rng.below(n);
        const auto row = data.row(pick);
        model.means.emplace_back(row.begin(), row.end());
    }
    if (mode == MogMode::kSpherical) {
        model.variances.assign(k, global_variance(data, nullptr));
    } else {
        Mat cov = global_covariance(data);
        regularize(cov);
        model.covariances.assign(k, cov);
    }
    return model;
}

MogFitResult fit_mog_from(MogModel model, const PointMatrix& data, int iterations, Rng& rng) {
    const int h = data.dim;
    const std::size_t n = data.size();
    const int k = model.k();
    MogFitResult result{std::move(model), {}, {}};
    std::vector<double> resp(n * k);

    for (int it = 0; it < iterations; ++it) {
        // E-step
        const auto comps = prepare(result.model);
        for (std::size_t i = 0; i < n; ++i) {
            double* row = resp.data() + i * k;
            const auto x = data.row(i);
            double best = kNegInf;
            for (int c = 0; c < k; ++c) {
                row[c] = comps[c].log_norm == kNegInf ? kNegInf : comps[c].log_term(x);
                best = std::max(best, row[c]);
            }
            double sum = 0.0;
            for (int c = 0; c < k; ++c) {
                row[c] = row[c] == kNegInf ? 0.0 : std::exp(row[c] - best);
                sum += row[c];
            }
            for (int c = 0; c < k; ++c) row[c] /= sum;
        }

        // M-step
        bool reinit = false;
        for (int c = 0; c < k; ++c) {
            double mass = 0.0;
            std::vector<double> mean(h, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * k + c];
                mass += r;
                const auto x = data.row(i);
                for (int d = 0; d < h; ++d) mean[d] += r * x[d];
            }
            if (mass < 1e-300) {
                const auto row = data.row(rng.below(n));
                result.model.means[c].assign(row.begin(), row.end());
                if (result.model.mode == MogMode::kSpherical)
                    result.model.variances[c] = global_variance(data, nullptr);
                else {
                    Mat cov = global_covariance(data);
                    regularize(cov);
                    result.model.covariances[c] = cov;
                }
                result.model.weights[c] = 1.0 / n;
                reinit = true;
                continue;
            }
            for (double& m : mean) m /= mass;
            result.model.means[c] = mean;
            result.model.weights[c] = mass / static_cast<double>(n);

            if (result.model.mode == MogMode::kSpherical) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += resp[i * k + c] * squared_distance(data.row(i), mean);
                double var = s / (h * mass);
                if (var < kCollapseVariance) {
                    const auto row = data.row(rng.below(n));
                    result.model.means[c].assign(row.begin(), row.end());
                    var = global_variance(data, nullptr);
                    reinit = true;
                }
                result.model.variances[c] = var;
            } else {
                Mat cov(h, h);
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = resp[i * k + c];
                    if (r == 0.0) continue;
                    const auto x = data.row(i);
                    for (int a = 0; a < h; ++a)
                        for (int b = 0; b < h; ++b)
                            cov(a, b) += r * (x[a] - mean[a]) * (x[b] - mean[b]);
                }
                for (double& v : cov.a) v /= mass;
                regularize(cov);
                Mat l;
                if (trace(cov) / h < kCollapseVariance || !cholesky(cov, l)) {
                    const auto row = data.row(rng.below(n));
                    result.model.means[c].assign(row.begin(), row.end());
                    cov = global_covariance(data);
                    regularize(cov);
                    reinit = true;
                }
                result.model.covariances[c] = cov;
            }
        }
        // renormalize in case a reseed disturbed the simplex
        double wsum = 0.0;
        for (double w : result.model.weights) wsum += w;
        for (double& w : result.model.weights) w /= wsum;

        if (reinit) result.reinit_iterations.push_back(it);
        result.train_ll.push_back(mog_mean_log_density(result.model, data));
    }
    return result;
}

MogFitResult fit_mog(const PointMatrix& data, int k, MogMode mode, int iterations, Rng& rng) {
    return fit_mog_from(init_mog(data, k, mode, rng), data, iterations, rng);
}

}  // namespace ifsem
