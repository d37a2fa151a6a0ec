// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/geometry.hpp"

#include <cmath>

#include "ifsem/core.hpp"

namespace ifsem {

Similitude::Similitude(double s, Mat r, std::vector<double> t)
    : scale(s), rotation(std::move(r)), translation(std::move(t)) {
    if (scale <= 0.0) throw InputError("similitude scale must be positive");
    if (rotation.rows != dim() || rotation.cols != dim())
        throw InputError("similitude rotation dimension mismatch");
}

Similitude Similitude::identity(int dim) {
    return Similitude(1.0, Mat::identity(dim), std::vector<double>(dim, 0.0));
}

std::vector<double> apply(const Similitude& f, std::span<const double> x) {
    std::vector<double> out(f.dim());
    apply_in_place(f, x, out);
    return out;
}

void apply_in_place(const Similitude& f, std::span<const double> x, std::span<double> out) {
    const int h = f.dim();
    if (static_cast<int>(x.size()) != h) throw InputError("apply: point dimension mismatch");
    for (int i = 0; i < h; ++i) {
        double s = 0.0;
        for (int j = 0; j < h; ++j) s += f.rotation(i, j) * x[j];
        out[i] = f.scale * s + f.translation[i];
    }
}

PointMatrix apply(const Similitude& f, const PointMatrix& points) {
    if (points.dim != f.dim()) throw InputError("apply: point matrix dimension mismatch");
    PointMatrix out(points.dim, points.size());
    for (std::size_t i = 0; i < points.size(); ++i) apply_in_place(f, points.row(i), out.row(i));
    return out;
}

Similitude compose(const Similitude& outer, const Similitude& inner) {
    if (outer.dim() != inner.dim()) throw InputError("compose: dimension mismatch");
    std::vector<double> t = mat_vec(outer.rotation, inner.translation);
    for (int i = 0; i < outer.dim(); ++i) t[i] = outer.scale * t[i] + outer.translation[i];
    return Similitude(outer.scale * inner.scale, outer.rotation * inner.rotation, std::move(t));
}

Similitude invert(const Similitude& f) {
    const double s = 1.0 / f.scale;
    Mat r = transpose(f.rotation);
    std::vector<double> t = mat_vec(r, f.translation);
    for (double& x : t) x *= -s;
    return Similitude(s, std::move(r), std::move(t));
}

SphericalGaussian transform_gaussian(const Similitude& f, const SphericalGaussian& g) {
    if (f.dim() != g.dim()) throw InputError("transform_gaussian: dimension mismatch");
    return {apply(f, g.mean), f.scale * g.sigma};
}

double log_density(const SphericalGaussian& g, std::span<const double> x) {
    const int h = g.dim();
    if (static_cast<int>(x.size()) != h) throw InputError("log_density: dimension mismatch");
    const double d2 = squared_distance(x, g.mean);
    return -0.5 * h * std::log(2.0 * M_PI) - h * std::log(g.sigma) - d2 / (2.0 * g.sigma * g.sigma);
}

Mat random_rotation(int dim, Rng& rng) {
    if (dim < 1) throw InputError("random_rotation: dimension must be >= 1");
    Mat g(dim, dim);
    for (double& x : g.a) x = rng.normal();
    Mat q = qr_orthonormal(g);
    if (determinant(q) < 0.0) {
        for (int i = 0; i < dim; ++i) q(i, dim - 1) = -q(i, dim - 1);
    }
    return q;
}

Mat optimal_rotation(const SvdResult& svd) {
    const int n = svd.u.rows;
    const double sign = determinant(svd.u * transpose(svd.v)) < 0.0 ? -1.0 : 1.0;
    Mat d = Mat::identity(n);
    d(n - 1, n - 1) = sign;
    return svd.u * d * transpose(svd.v);
}

Mat optimal_rotation(const Mat& a) { return optimal_rotation(jacobi_svd(a)); }

bool is_valid_similitude(const Similitude& f, double tol) {
    if (!(f.scale > 0.0)) return false;
    if (orthogonality_error(f.rotation) > tol) return false;
    return std::abs(determinant(f.rotation) - 1.0) <= tol;
}

}  // namespace ifsem
