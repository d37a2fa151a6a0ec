// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <span>
#include <vector>

namespace ifsem {

/// Small dense row-major matrix. Sized for the data dimension H (2-3 in
/// practice), so everything here favors robustness over speed.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static Mat identity(int n);
    bool square() const { return rows == cols; }
};

Mat operator*(const Mat& lhs, const Mat& rhs);
Mat operator+(const Mat& lhs, const Mat& rhs);
Mat operator-(const Mat& lhs, const Mat& rhs);
Mat operator*(double s, const Mat& m);
Mat transpose(const Mat& m);

std::vector<double> mat_vec(const Mat& m, std::span<const double> v);
/// m^T v without forming the transpose.
std::vector<double> mat_tvec(const Mat& m, std::span<const double> v);

double trace(const Mat& m);
double frobenius_norm(const Mat& m);
double max_abs_diff(const Mat& lhs, const Mat& rhs);

/// Determinant by LU with partial pivoting.
double determinant(const Mat& m);

/// ||R^T R - I||_F, zero for exact orthogonality.
double orthogonality_error(const Mat& r);

struct SvdResult {
    Mat u;                          // n x n orthogonal
    std::vector<double> sigma;      // descending, nonnegative
    Mat v;                          // n x n orthogonal, A = U diag(sigma) V^T
};

/// One-sided Jacobi SVD for square matrices. Iterates column rotations until
/// the relative off-diagonal mass drops below `tol`.
SvdResult jacobi_svd(const Mat& m, double tol = 1e-12);

/// Householder QR; returns Q with the R diagonal made nonnegative.
Mat qr_orthonormal(const Mat& m);

/// Lower-triangular L with A = L L^T. Returns false if A is not positive
/// definite (leaves l unspecified).
bool cholesky(const Mat& a, Mat& l);

/// Solves L y = b, then L^T x = y, for Cholesky factor L.
std::vector<double> cholesky_solve(const Mat& l, std::span<const double> b);

}  // namespace ifsem
