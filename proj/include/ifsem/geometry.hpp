// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <span>
#include <vector>

#include "ifsem/core.hpp"
#include "ifsem/linalg.hpp"
#include "ifsem/rng.hpp"

namespace ifsem {

/// Similarity transformation x -> s R x + t with uniform scale s > 0,
/// proper rotation R and translation t.
struct Similitude {
    double scale = 1.0;
    Mat rotation;
    std::vector<double> translation;

    Similitude() = default;
    Similitude(double s, Mat r, std::vector<double> t);

    static Similitude identity(int dim);
    int dim() const { return static_cast<int>(translation.size()); }
};

/// Isotropic Gaussian with mean mu and per-axis standard deviation sigma.
struct SphericalGaussian {
    std::vector<double> mean;
    double sigma = 1.0;

    static SphericalGaussian standard(int dim) { return {std::vector<double>(dim, 0.0), 1.0}; }
    int dim() const { return static_cast<int>(mean.size()); }
};

std::vector<double> apply(const Similitude& f, std::span<const double> x);
void apply_in_place(const Similitude& f, std::span<const double> x, std::span<double> out);
PointMatrix apply(const Similitude& f, const PointMatrix& points);

// By-value convenience overload. Parameters taken by value bind any value
// category with an identity conversion, so unqualified calls with vectors
// resolve here instead of sliding into std::apply via argument-dependent
// lookup on std::vector.
inline std::vector<double> apply(Similitude f, std::vector<double> x) {
    // parenthesized callee: ordinary lookup only, no ADL
    return (apply)(static_cast<const Similitude&>(f), std::span<const double>(x));
}

/// g with g(x) = outer(inner(x)).
Similitude compose(const Similitude& outer, const Similitude& inner);

Similitude invert(const Similitude& f);

/// Image of a spherical Gaussian under a similitude: another spherical
/// Gaussian with mean f(mu) and deviation s * sigma.
SphericalGaussian transform_gaussian(const Similitude& f, const SphericalGaussian& g);

double log_density(const SphericalGaussian& g, std::span<const double> x);

/// Haar-uniform rotation: QR of an iid standard-Gaussian matrix with the R
/// diagonal made nonnegative, then determinant fixed to +1.
Mat random_rotation(int dim, Rng& rng);

/// The rotation maximizing tr(A^T R): R = U diag(1,...,1, det(U V^T)) V^T
/// from the SVD A = U S V^T. Non-unique when A is rank deficient; any valid
/// maximizer is returned.
Mat optimal_rotation(const Mat& a);
Mat optimal_rotation(const SvdResult& svd);

/// Checks s > 0, R^T R = I and det R = +1 within tol.
bool is_valid_similitude(const Similitude& f, double tol = 1e-9);

}  // namespace ifsem
