// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <vector>

#include "ifsem/core.hpp"
#include "ifsem/linalg.hpp"
#include "ifsem/rng.hpp"

namespace ifsem {

enum class MogMode { kSpherical, kFull };

/// Mixture of Gaussians; spherical components carry one variance scalar,
/// full components an H x H covariance matrix.
struct MogModel {
    int dim = 0;
    MogMode mode = MogMode::kSpherical;
    std::vector<std::vector<double>> means;
    std::vector<double> variances;    // spherical mode, size K
    std::vector<Mat> covariances;     // full mode, size K
    std::vector<double> weights;

    int k() const { return static_cast<int>(means.size()); }
};

double mog_log_density(const MogModel& model, std::span<const double> x);
double mog_mean_log_density(const MogModel& model, const PointMatrix& points);

struct MogFitResult {
    MogModel model;
    std::vector<double> train_ll;         // mean log-likelihood after each iteration
    std::vector<int> reinit_iterations;   // iterations where a collapsed component was reseeded
};

/// Means seeded on K distinct data points, variances on the global variance,
/// uniform weights.
MogModel init_mog(const PointMatrix& data, int k, MogMode mode, Rng& rng);

/// Full-batch EM from the given starting model.
MogFitResult fit_mog_from(MogModel model, const PointMatrix& data, int iterations, Rng& rng);

/// Standard full-batch EM with the default initialization.
MogFitResult fit_mog(const PointMatrix& data, int k, MogMode mode, int iterations, Rng& rng);

}  // namespace ifsem
