// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <vector>

#include "ifsem/core.hpp"
#include "ifsem/geometry.hpp"
#include "ifsem/rng.hpp"

namespace ifsem {

/// Sequence of component indices in [1, K], up to length D. The empty code
/// selects the bare base distribution (plus post-transform).
using Code = std::vector<int>;

/// IFS probability model: K similitude components with mixture weights,
/// depth weights over expansion levels 0..D, and one post-transform.
struct IfsModel {
    int dim = 0;
    int depth = 0;                         // maximum expansion depth D
    std::vector<Similitude> components;    // K maps
    std::vector<double> weights;           // K-simplex
    std::vector<double> depth_weights;     // (D+1)-simplex over depths 0..D
    Similitude post;

    int k() const { return static_cast<int>(components.size()); }

    /// Throws InputError if any structural or simplex invariant is broken.
    void validate(double rotation_tol = 1e-9, double simplex_tol = 1e-12) const;
};

constexpr std::int64_t kDefaultTableLimit = 1'000'000;

/// Number of codes with length 0..max_depth; throws CapacityError when
/// K^(max_depth+1) exceeds the table limit.
std::int64_t code_count(int k, int max_depth, std::int64_t table_limit = kDefaultTableLimit);

/// All codes of length 0..max_depth in canonical order: by length, then
/// lexicographic. The first entry is the empty code.
std::vector<Code> enumerate_codes(int k, int max_depth, std::int64_t table_limit = kDefaultTableLimit);

/// Precomputed per-code data, rows in canonical code order. A table built to
/// depth d is a strict prefix of the table built to depth d+1.
struct CodeTable {
    int k = 0;
    int dim = 0;
    int max_depth = 0;
    bool includes_post = false;

    std::vector<int> depth_of;              // |code| per row
    std::vector<int> first_digit;           // leading component, 0 for the empty code
    std::vector<Similitude> inner;          // composed tail, post excluded
    std::vector<SphericalGaussian> endpoint;
    std::vector<double> log_prior;          // ln v_|c| + sum ln w_c_i

    std::int64_t size() const { return static_cast<std::int64_t>(depth_of.size()); }
    /// Rows with depth <= d (a prefix, by canonical order).
    std::int64_t rows_to_depth(int d) const;
    /// First row of the length-d block.
    std::int64_t depth_offset(int d) const;
    Code code_at(std::int64_t row) const;
};

CodeTable build_code_table(const IfsModel& model, int max_depth, bool include_post,
                           std::int64_t table_limit = kDefaultTableLimit);

double code_log_prior(const IfsModel& model, const Code& code);

/// Per-code constants laid out for the density inner loop:
/// log term for code j at x is coeff[j] - inv_two_sigma2[j] * ||x - mu_j||^2.
struct FlatDensityTable {
    int dim = 0;
    std::int64_t m = 0;
    std::vector<double> mu;              // m x dim, row-major
    std::vector<double> coeff;           // log prior + Gaussian normalizer, -inf when prior is 0
    std::vector<double> inv_two_sigma2;

    explicit FlatDensityTable(const CodeTable& table);
};

/// Log p(x) under the finite-depth mixture; log-sum-exp over all codes.
double log_density(const FlatDensityTable& flat, std::span<const double> x);
double log_density(const CodeTable& table, std::span<const double> x);
double log_density(const IfsModel& model, std::span<const double> x);

/// Mean log density over all points; rows evaluated independently so the
/// result does not depend on the worker count.
double mean_log_density(const CodeTable& table, const PointMatrix& points, int workers = 1);

/// Generative sampling at finite depth: depth ~ v, digits iid ~ w, base draw
/// from the standard normal, all maps applied in code order.
PointMatrix sample(const IfsModel& model, std::size_t n, Rng& rng);

/// Chaos game along one chain: repeatedly apply a component drawn from w,
/// discard `burn_in` initial steps, emit post-transformed positions.
PointMatrix sample_attractor(const IfsModel& model, std::size_t n, std::size_t burn_in, Rng& rng);

constexpr std::size_t kDefaultBurnIn = 32;

double mean_depth(const IfsModel& model);

}  // namespace ifsem
