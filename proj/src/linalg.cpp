// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "ifsem/core.hpp"

namespace ifsem {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat operator*(const Mat& lhs, const Mat& rhs) {
    if (lhs.cols != rhs.rows) throw InputError("matrix product dimension mismatch");
    Mat out(lhs.rows, rhs.cols);
    for (int i = 0; i < lhs.rows; ++i) {
        for (int k = 0; k < lhs.cols; ++k) {
            const double l = lhs(i, k);
            if (l == 0.0) continue;
            for (int j = 0; j < rhs.cols; ++j) out(i, j) += l * rhs(k, j);
        }
    }
    return out;
}

Mat operator+(const Mat& lhs, const Mat& rhs) {
    Mat out = lhs;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += rhs.a[i];
    return out;
}

Mat operator-(const Mat& lhs, const Mat& rhs) {
    Mat out = lhs;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] -= rhs.a[i];
    return out;
}

Mat operator*(double s, const Mat& m) {
    Mat out = m;
    for (double& x : out.a) x *= s;
    return out;
}

Mat transpose(const Mat& m) {
    Mat out(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    return out;
}

std::vector<double> mat_vec(const Mat& m, std::span<const double> v) {
    if (m.cols != static_cast<int>(v.size())) throw InputError("mat_vec dimension mismatch");
    std::vector<double> out(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

std::vector<double> mat_tvec(const Mat& m, std::span<const double> v) {
    if (m.rows != static_cast<int>(v.size())) throw InputError("mat_tvec dimension mismatch");
    std::vector<double> out(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double vi = v[i];
        for (int j = 0; j < m.cols; ++j) out[j] += m(i, j) * vi;
    }
    return out;
}

double trace(const Mat& m) {
    double t = 0.0;
    for (int i = 0; i < std::min(m.rows, m.cols); ++i) t += m(i, i);
    return t;
}

double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (double x : m.a) s += x * x;
    return std::sqrt(s);
}

double max_abs_diff(const Mat& lhs, const Mat& rhs) {
    double d = 0.0;
    for (std::size_t i = 0; i < lhs.a.size(); ++i) d = std::max(d, std::abs(lhs.a[i] - rhs.a[i]));
    return d;
}

double determinant(const Mat& m) {
    if (!m.square()) throw InputError("determinant of non-square matrix");
    const int n = m.rows;
    Mat lu = m;
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
        if (lu(pivot, k) == 0.0) return 0.0;
        if (pivot != k) {
            for (int j = 0; j < n; ++j) std::swap(lu(pivot, j), lu(k, j));
            det = -det;
        }
        det *= lu(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / lu(k, k);
            for (int j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    return det;
}

double orthogonality_error(const Mat& r) {
    return frobenius_norm(transpose(r) * r - Mat::identity(r.cols));
}

namespace {

// Fills zero columns of u (marked by sigma[j] == 0) with unit vectors
// orthogonal to every nonzero column, so u is a full orthogonal basis.
void complete_basis(Mat& u, const std::vector<double>& sigma) {
    const int n = u.rows;
    for (int j = 0; j < n; ++j) {
        if (sigma[j] != 0.0) continue;
        for (int trial = 0; trial < n; ++trial) {
            std::vector<double> cand(n, 0.0);
            cand[trial] = 1.0;
            for (int c = 0; c < n; ++c) {
                if (c == j) continue;
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += cand[i] * u(i, c);
                if (sigma[c] == 0.0 && c > j) continue;  // not yet filled
                for (int i = 0; i < n; ++i) cand[i] -= dot * u(i, c);
            }
            double norm = std::sqrt(std::inner_product(cand.begin(), cand.end(), cand.begin(), 0.0));
            if (norm > 1e-8) {
                for (int i = 0; i < n; ++i) u(i, j) = cand[i] / norm;
                break;
            }
        }
    }
}

}  // namespace

SvdResult jacobi_svd(const Mat& m, double tol) {
    if (!m.square()) throw InputError("jacobi_svd expects a square matrix");
    const int n = m.rows;
    Mat w = m;                    // columns get rotated in place
    Mat v = Mat::identity(n);

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (int i = 0; i < n; ++i) {
                    alpha += w(i, p) * w(i, p);
                    beta += w(i, q) * w(i, q);
                    gamma += w(i, p) * w(i, q);
                }
                if (alpha == 0.0 || beta == 0.0) continue;
                const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
                off = std::max(off, rel);
                if (rel <= tol) continue;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < n; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (off <= tol) break;
    }

    SvdResult out;
    out.sigma.assign(n, 0.0);
    out.u = Mat(n, n);
    out.v = v;
    for (int j = 0; j < n; ++j) {
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += w(i, j) * w(i, j);
        norm = std::sqrt(norm);
        out.sigma[j] = norm;
        if (norm > 0.0)
            for (int i = 0; i < n; ++i) out.u(i, j) = w(i, j) / norm;
    }

    // sort singular values descending, carrying U and V columns along
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return out.sigma[x] > out.sigma[y]; });
    SvdResult sorted;
    sorted.sigma.assign(n, 0.0);
    sorted.u = Mat(n, n);
    sorted.v = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        sorted.sigma[j] = out.sigma[order[j]];
        for (int i = 0; i < n; ++i) {
            sorted.u(i, j) = out.u(i, order[j]);
            sorted.v(i, j) = out.v(i, order[j]);
        }
    }
    complete_basis(sorted.u, sorted.sigma);
    return sorted;
}

Mat qr_orthonormal(const Mat& m) {
    if (!m.square()) throw InputError("qr_orthonormal expects a square matrix");
    const int n = m.rows;
    Mat r = m;
    Mat q = Mat::identity(n);

    // Householder reflections applied to r, accumulated into q.
    for (int k = 0; k < n - 1; ++k) {
        double norm = 0.0;
        for (int i = k; i < n; ++i) norm += r(i, k) * r(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = r(k, k) >= 0.0 ? -norm : norm;
        std::vector<double> u(n, 0.0);
        u[k] = r(k, k) - alpha;
        for (int i = k + 1; i < n; ++i) u[i] = r(i, k);
        double unorm2 = 0.0;
        for (int i = k; i < n; ++i) unorm2 += u[i] * u[i];
        if (unorm2 == 0.0) continue;

        for (int j = 0; j < n; ++j) {           // r <- H r
            double dot = 0.0;
            for (int i = k; i < n; ++i) dot += u[i] * r(i, j);
            const double f = 2.0 * dot / unorm2;
            for (int i = k; i < n; ++i) r(i, j) -= f * u[i];
        }
        for (int j = 0; j < n; ++j) {           // q <- q H
            double dot = 0.0;
            for (int i = k; i < n; ++i) dot += q(j, i) * u[i];
            const double f = 2.0 * dot / unorm2;
            for (int i = k; i < n; ++i) q(j, i) -= f * u[i];
        }
    }

    // sign-correct so the implied R diagonal is nonnegative
    for (int j = 0; j < n; ++j) {
        if (r(j, j) < 0.0)
            for (int i = 0; i < n; ++i) q(i, j) = -q(i, j);
    }
    return q;
}

bool cholesky(const Mat& a, Mat& l) {
    if (!a.square()) throw InputError("cholesky expects a square matrix");
    const int n = a.rows;
    l = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) return false;
                l(i, j) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const Mat& l, std::span<const double> b) {
    const int n = l.rows;
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

}  // namespace ifsem
