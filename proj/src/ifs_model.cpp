// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/ifs_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ifsem {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_simplex(const std::vector<double>& v, const char* name, double tol) {
    double sum = 0.0;
    for (double x : v) {
        if (x < 0.0) throw InputError(std::string(name) + " has a negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol) throw InputError(std::string(name) + " does not sum to 1");
}
}  // namespace

void IfsModel::validate(double rotation_tol, double simplex_tol) const {
    if (dim < 1) throw InputError("model dimension must be >= 1");
    if (depth < 0) throw InputError("model depth must be >= 0");
    if (components.empty()) throw InputError("model needs at least one component");
    if (static_cast<int>(weights.size()) != k()) throw InputError("weight count != component count");
    if (static_cast<int>(depth_weights.size()) != depth + 1)
        throw InputError("depth weight count != depth + 1");
    for (const Similitude& f : components) {
        if (f.dim() != dim) throw InputError("component dimension mismatch");
        if (!is_valid_similitude(f, rotation_tol)) throw InputError("component is not a similitude");
    }
    if (post.dim() != dim || !is_valid_similitude(post, rotation_tol))
        throw InputError("post-transform is not a similitude");
    check_simplex(weights, "weights", simplex_tol);
    check_simplex(depth_weights, "depth weights", simplex_tol);
}

std::int64_t code_count(int k, int max_depth, std::int64_t table_limit) {
    if (k < 1 || max_depth < 0) throw InputError("code_count: need K >= 1 and depth >= 0");
    std::int64_t total = 0;
    std::int64_t block = 1;
    for (int d = 0; d <= max_depth; ++d) {
        total += block;
        if (d < max_depth) {
            if (block > table_limit / k)
                throw CapacityError("code table would exceed limit of " + std::to_string(table_limit));
            block *= k;
        }
    }
    if (block > table_limit / k)  // the K^(D+1) bound from the contract
        throw CapacityError("code table would exceed limit of " + std::to_string(table_limit));
    return total;
}

std::vector<Code> enumerate_codes(int k, int max_depth, std::int64_t table_limit) {
    const std::int64_t total = code_count(k, max_depth, table_limit);
    std::vector<Code> codes;
    codes.reserve(total);
    codes.emplace_back();
    std::int64_t block_start = 0;
    for (int d = 1; d <= max_depth; ++d) {
        const std::int64_t block_size = codes.size() - block_start;
        const std::int64_t next_start = codes.size();
        for (std::int64_t p = 0; p < block_size; ++p) {
            for (int digit = 1; digit <= k; ++digit) {
                Code c = codes[block_start + p];
                c.push_back(digit);
                codes.push_back(std::move(c));
            }
        }
        block_start = next_start;
    }
    return codes;
}

std::int64_t CodeTable::depth_offset(int d) const {
    std::int64_t off = 0;
    std::int64_t block = 1;
    for (int e = 0; e < d; ++e) {
        off += block;
        block *= k;
    }
    return off;
}

std::int64_t CodeTable::rows_to_depth(int d) const { return depth_offset(d + 1); }

Code CodeTable::code_at(std::int64_t row) const {
    const int d = depth_of[row];
    std::int64_t rank = row - depth_offset(d);
    Code c(d);
    for (int i = d - 1; i >= 0; --i) {
        c[i] = static_cast<int>(rank % k) + 1;
        rank /= k;
    }
    return c;
}

CodeTable build_code_table(const IfsModel& model, int max_depth, bool include_post,
                           std::int64_t table_limit) {
    if (max_depth < 0 || max_depth > model.depth)
        throw InputError("build_code_table: max_depth out of range");
    const int k = model.k();
    const std::int64_t total = code_count(k, max_depth, table_limit);

    CodeTable t;
    t.k = k;
    t.dim = model.dim;
    t.max_depth = max_depth;
    t.includes_post = include_post;
    t.depth_of.reserve(total);
    t.first_digit.reserve(total);
    t.inner.reserve(total);
    t.endpoint.reserve(total);
    t.log_prior.reserve(total);

    std::vector<double> log_w(k);
    for (int i = 0; i < k; ++i) log_w[i] = model.weights[i] > 0.0 ? std::log(model.weights[i]) : kNegInf;
    std::vector<double> log_v(max_depth + 1);
    for (int d = 0; d <= max_depth; ++d)
        log_v[d] = model.depth_weights[d] > 0.0 ? std::log(model.depth_weights[d]) : kNegInf;

    // weight_part[row] = sum of ln w over the code's digits
    std::vector<double> weight_part;
    weight_part.reserve(total);

    auto push_row = [&](int depth, int first, Similitude inner, double wpart) {
        const Similitude composed = include_post ? compose(model.post, inner) : inner;
        t.endpoint.push_back({composed.translation, composed.scale});
        t.inner.push_back(std::move(inner));
        t.depth_of.push_back(depth);
        t.first_digit.push_back(first);
        t.log_prior.push_back(log_v[depth] + wpart);
        weight_part.push_back(wpart);
    };

    push_row(0, 0, Similitude::identity(model.dim), 0.0);

    std::int64_t block_start = 0;
    for (int d = 1; d <= max_depth; ++d) {
        const std::int64_t block_size = t.size() - block_start;
        const std::int64_t next_start = t.size();
        for (std::int64_t p = 0; p < block_size; ++p) {
            const std::int64_t parent = block_start + p;
            for (int digit = 1; digit <= k; ++digit) {
                Similitude inner = compose(t.inner[parent], model.components[digit - 1]);
                if (d % 16 == 0) inner.rotation = optimal_rotation(inner.rotation);
                const int first = d == 1 ? digit : t.first_digit[parent];
                push_row(d, first, std::move(inner), weight_part[parent] + log_w[digit - 1]);
            }
        }
        block_start = next_start;
    }
    return t;
}

double code_log_prior(const IfsModel& model, const Code& code) {
    if (static_cast<int>(code.size()) > model.depth) throw InputError("code longer than model depth");
    const double v = model.depth_weights[code.size()];
    double lp = v > 0.0 ? std::log(v) : kNegInf;
    for (int digit : code) {
        if (digit < 1 || digit > model.k()) throw InputError("code digit out of range");
        const double w = model.weights[digit - 1];
        lp += w > 0.0 ? std::log(w) : kNegInf;
    }
    return lp;
}

FlatDensityTable::FlatDensityTable(const CodeTable& table)
    : dim(table.dim), m(table.size()) {
    mu.resize(m * dim);
    coeff.resize(m);
    inv_two_sigma2.resize(m);
    const double norm0 = -0.5 * dim * std::log(2.0 * M_PI);
    for (std::int64_t j = 0; j < m; ++j) {
        const SphericalGaussian& g = table.endpoint[j];
        std::copy(g.mean.begin(), g.mean.end(), mu.begin() + j * dim);
        coeff[j] = table.log_prior[j] == kNegInf
                       ? kNegInf
                       : table.log_prior[j] + norm0 - dim * std::log(g.sigma);
        inv_two_sigma2[j] = 1.0 / (2.0 * g.sigma * g.sigma);
    }
}

double log_density(const FlatDensityTable& flat, std::span<const double> x) {
    if (static_cast<int>(x.size()) != flat.dim) throw InputError("log_density: dimension mismatch");
    const int h = flat.dim;
    double best = kNegInf;
    double sum = 0.0;  // streaming log-sum-exp
    const double* mu = flat.mu.data();
    for (std::int64_t j = 0; j < flat.m; ++j, mu += h) {
        if (flat.coeff[j] == kNegInf) continue;
        double d2 = 0.0;
        for (int c = 0; c < h; ++c) {
            const double t = x[c] - mu[c];
            d2 += t * t;
        }
        const double l = flat.coeff[j] - flat.inv_two_sigma2[j] * d2;
        if (l <= best) {
            sum += std::exp(l - best);
        } else {
            sum = sum * std::exp(best - l) + 1.0;
            best = l;
        }
    }
    if (best == kNegInf) return kNegInf;
    return best + std::log(sum);
}

double log_density(const CodeTable& table, std::span<const double> x) {
    return log_density(FlatDensityTable(table), x);
}

double log_density(const IfsModel& model, std::span<const double> x) {
    return log_density(build_code_table(model, model.depth, true), x);
}

double mean_log_density(const CodeTable& table, const PointMatrix& points, int workers) {
    const std::int64_t n = static_cast<std::int64_t>(points.size());
    if (n == 0) throw InputError("mean_log_density: empty point set");
    const FlatDensityTable flat(table);
    std::vector<double> ll(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(workers, 1))
#endif
    for (std::int64_t i = 0; i < n; ++i) ll[i] = log_density(flat, points.row(i));
    double sum = 0.0;
    for (double v : ll) sum += v;
    return sum / static_cast<double>(n);
}

PointMatrix sample(const IfsModel& model, std::size_t n, Rng& rng) {
    const int h = model.dim;
    PointMatrix out(h);
    out.values.reserve(n * h);
    std::vector<double> z(h), tmp(h);
    std::vector<int> digits;
    for (std::size_t i = 0; i < n; ++i) {
        const int d = static_cast<int>(rng.categorical(model.depth_weights));
        digits.resize(d);
        for (int j = 0; j < d; ++j) digits[j] = static_cast<int>(rng.categorical(model.weights));
        for (int j = 0; j < h; ++j) z[j] = rng.normal();
        // innermost map first: f_{c1}( ... f_{cd}(z) ... ), then the post
        for (int j = d - 1; j >= 0; --j) {
            apply_in_place(model.components[digits[j]], z, tmp);
            std::swap(z, tmp);
        }
        apply_in_place(model.post, z, tmp);
        out.values.insert(out.values.end(), tmp.begin(), tmp.end());
    }
    return out;
}

PointMatrix sample_attractor(const IfsModel& model, std::size_t n, std::size_t burn_in, Rng& rng) {
    const int h = model.dim;
    PointMatrix out(h);
    out.values.reserve(n * h);
    std::vector<double> x(h, 0.0), tmp(h);
    for (std::size_t step = 0; step < burn_in + n; ++step) {
        const std::size_t c = rng.categorical(model.weights);
        apply_in_place(model.components[c], x, tmp);
        std::swap(x, tmp);
        if (step >= burn_in) {
            apply_in_place(model.post, x, tmp);
            out.values.insert(out.values.end(), tmp.begin(), tmp.end());
        }
    }
    return out;
}

double mean_depth(const IfsModel& model) {
    double s = 0.0;
    for (int d = 0; d <= model.depth; ++d) s += d * model.depth_weights[d];
    return s;
}

}  // namespace ifsem
