// Apache License, Version 2.0, refer to LICENSE.txt
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ifsem/data.hpp"
#include "ifsem/ifs_model.hpp"
#include "ifsem/model_io.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace ifsem;
using test::random_model;

namespace {

IfsModel single_map_model(double scale, std::vector<double> t, int depth,
                          std::vector<double> depth_weights) {
    const int h = static_cast<int>(t.size());
    IfsModel m;
    m.dim = h;
    m.depth = depth;
    m.components.emplace_back(scale, Mat::identity(h), std::move(t));
    m.weights = {1.0};
    m.depth_weights = std::move(depth_weights);
    m.post = Similitude::identity(h);
    return m;
}

}  // namespace

TEST_CASE("enumerate_codes counts and canonical order") {
    CHECK(enumerate_codes(3, 2).size() == 13);
    CHECK(enumerate_codes(2, 0).size() == 1);
    CHECK(enumerate_codes(2, 0).front().empty());
    CHECK(enumerate_codes(4, 5).size() == 1365);
    CHECK(enumerate_codes(1, 4).size() == 5);

    const auto codes = enumerate_codes(2, 2);
    CHECK(codes[0] == Code{});
    CHECK(codes[1] == Code{1});
    CHECK(codes[2] == Code{2});
    CHECK(codes[3] == Code{1, 1});
    CHECK(codes[4] == Code{1, 2});
    CHECK(codes[5] == Code{2, 1});
    CHECK(codes[6] == Code{2, 2});

    CHECK_THROWS_AS(enumerate_codes(10, 7), CapacityError);
    CHECK_THROWS_AS(code_count(2, 25), CapacityError);
}

TEST_CASE("build_code_table endpoints") {
    Rng rng(31);
    const IfsModel m = random_model(2, 3, 2, rng);
    const CodeTable bare = build_code_table(m, 3, false);
    CHECK(bare.endpoint[0].sigma == doctest::Approx(1.0));
    CHECK(bare.endpoint[0].mean == std::vector<double>{0, 0});
    CHECK(bare.inner[0].scale == doctest::Approx(1.0));

    const IfsModel halving = single_map_model(0.5, {0, 0}, 2, {0.2, 0.3, 0.5});
    const CodeTable t = build_code_table(halving, 2, false);
    // rows: {}, {1}, {1,1}
    CHECK(t.size() == 3);
    CHECK(t.endpoint[2].sigma == doctest::Approx(0.25));
    CHECK(t.endpoint[2].mean[0] == doctest::Approx(0.0));
}

TEST_CASE("code table matches per-code recomposition oracle") {
    Rng rng(32);
    for (int trial = 0; trial < 5; ++trial) {
        const IfsModel m = random_model(3, 3, 2 + static_cast<int>(rng.below(2)), rng);
        for (const bool with_post : {false, true}) {
            const CodeTable t = build_code_table(m, 3, with_post);
            const auto codes = enumerate_codes(3, 3);
            REQUIRE(t.size() == static_cast<std::int64_t>(codes.size()));
            for (std::size_t j = 0; j < codes.size(); ++j) {
                CHECK(t.code_at(j) == codes[j]);
                Similitude fold = with_post ? m.post : Similitude::identity(m.dim);
                for (int digit : codes[j]) fold = compose(fold, m.components[digit - 1]);
                const SphericalGaussian expect =
                    transform_gaussian(fold, SphericalGaussian::standard(m.dim));
                CHECK(t.endpoint[j].sigma == doctest::Approx(expect.sigma).epsilon(1e-12));
                for (int c = 0; c < m.dim; ++c)
                    CHECK(t.endpoint[j].mean[c] == doctest::Approx(expect.mean[c]).epsilon(1e-12));
                CHECK(t.log_prior[j] == doctest::Approx(code_log_prior(m, codes[j])).epsilon(1e-12));
                CHECK(t.depth_of[j] == static_cast<int>(codes[j].size()));
                CHECK(t.first_digit[j] == (codes[j].empty() ? 0 : codes[j].front()));
            }
        }
    }
}

TEST_CASE("code_log_prior") {
    IfsModel m = single_map_model(0.5, {0}, 0, {1.0});
    CHECK(code_log_prior(m, {}) == doctest::Approx(0.0));

    IfsModel m2;
    m2.dim = 1;
    m2.depth = 2;
    m2.components.emplace_back(0.5, Mat::identity(1), std::vector<double>{0.0});
    m2.components.emplace_back(0.5, Mat::identity(1), std::vector<double>{1.0});
    m2.weights = {0.5, 0.5};
    m2.depth_weights = {0.25, 0.5, 0.25};
    m2.post = Similitude::identity(1);
    CHECK(code_log_prior(m2, {1, 2}) == doctest::Approx(std::log(1.0 / 16)).epsilon(1e-12));

    Rng rng(33);
    const IfsModel m3 = random_model(3, 3, 2, rng);
    const CodeTable t = build_code_table(m3, 3, true);
    double total = 0.0;
    for (std::int64_t j = 0; j < t.size(); ++j) total += std::exp(t.log_prior[j]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("log_density degenerates to the standard normal with v0 = 1") {
    IfsModel m = single_map_model(0.5, {3, -1}, 1, {1.0, 0.0});
    const SphericalGaussian n0 = SphericalGaussian::standard(2);
    Rng rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
        CHECK(log_density(m, x) == doctest::Approx(log_density(n0, x)).epsilon(1e-12));
    }
}

TEST_CASE("log_density two-code example") {
    const IfsModel m = single_map_model(0.5, {0}, 1, {0.5, 0.5});
    const double phi0 = 1.0 / std::sqrt(2.0 * M_PI);
    const double expected = std::log(0.5 * phi0 + 0.5 * 2.0 * phi0);
    CHECK(expected == doctest::Approx(std::log(0.59841)).epsilon(1e-4));
    CHECK(log_density(m, std::vector<double>{0.0}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(log_density(m, std::vector<double>{0.0}) ==
          doctest::Approx(std::log(oracle::mixture_density_bruteforce(m, std::vector<double>{0.0})))
              .epsilon(1e-12));
}

TEST_CASE("log_density matches the brute-force mixture on random models") {
    Rng rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 1 + static_cast<int>(rng.below(3));
        const int d = static_cast<int>(rng.below(4));
        const int h = 1 + static_cast<int>(rng.below(3));
        const IfsModel m = random_model(k, d, h, rng);
        const CodeTable t = build_code_table(m, d, true);
        const FlatDensityTable flat(t);
        for (int p = 0; p < 20; ++p) {
            std::vector<double> x(h);
            for (double& v : x) v = rng.uniform(-3, 3);
            const double expect = oracle::mixture_density_bruteforce(m, x);
            CHECK(std::exp(log_density(flat, x)) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("log_density integrates to one over a wide box") {
    Rng rng(36);
    IfsModel m = random_model(2, 2, 2, rng);
    // keep the model inside the integration box
    m.post = Similitude(0.8, Mat::identity(2), {0.1, -0.2});
    const CodeTable t = build_code_table(m, 2, true);
    const FlatDensityTable flat(t);
    const int cells = 500;
    const double half = 10.0;
    const double step = 2.0 * half / cells;
    double integral = 0.0;
    std::vector<double> x(2);
    for (int i = 0; i < cells; ++i) {
        x[0] = -half + (i + 0.5) * step;
        for (int j = 0; j < cells; ++j) {
            x[1] = -half + (j + 0.5) * step;
            integral += std::exp(log_density(flat, x)) * step * step;
        }
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sample basics") {
    Rng rng(37);
    const IfsModel m = single_map_model(0.5, {1, 0}, 1, {1.0, 0.0});
    CHECK(sample(m, 0, rng).size() == 0);

    const std::size_t n = 100000;
    const PointMatrix pts = sample(m, n, rng);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += pts.row(i)[0];
        my += pts.row(i)[1];
    }
    const double se = 1.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mx / n) < 3 * se);
    CHECK(std::abs(my / n) < 3 * se);
}

TEST_CASE("mean sample log-density is consistent with an independent estimate") {
    Rng rng(38);
    const IfsModel m = random_model(2, 2, 2, rng);
    const CodeTable t = build_code_table(m, 2, true);
    const FlatDensityTable flat(t);

    auto estimate = [&](std::size_t n) {
        const PointMatrix pts = sample(m, n, rng);
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ll = log_density(flat, pts.row(i));
            sum += ll;
            sq += ll * ll;
        }
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        return std::pair<double, double>(mean, std::sqrt(var / n));
    };

    const auto [m1, se1] = estimate(10000);
    const auto [m2, se2] = estimate(50000);
    CHECK(std::abs(m1 - m2) < 3 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("sample_attractor stays in the Sierpinski hull") {
    Rng rng(39);
    const IfsModel m = sierpinski_model(true);
    const PointMatrix pts = sample_attractor(m, 20000, kDefaultBurnIn, rng);
    const double r3 = std::sqrt(3.0);
    // barycentric coordinates w.r.t. (0,1), (-r3/2,-1/2), (r3/2,-1/2)
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto p = pts.row(i);
        const double l1 = (p[1] + 0.5) / 1.5;
        const double l3 = (p[0] + r3 / 2.0 - l1 * r3 / 2.0) / r3;
        const double l2 = 1.0 - l1 - l3;
        CHECK(l1 >= -1e-9);
        CHECK(l2 >= -1e-9);
        CHECK(l3 >= -1e-9);
    }
}

TEST_CASE("sample_attractor contracts to the fixed point for a single map") {
    Rng rng(40);
    IfsModel m = single_map_model(0.5, {0.3, -0.7}, 0, {1.0});
    const PointMatrix pts = sample_attractor(m, 100, 64, rng);
    const std::vector<double> fixed = {0.6, -1.4};  // t / (1 - s)
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(std::sqrt(squared_distance(pts.row(i), fixed)) < 1e-6);
}

TEST_CASE("sierpinski attractor mass avoids the central hole") {
    Rng rng(41);
    const IfsModel m = sierpinski_model(true);
    const PointMatrix pts = sample_attractor(m, 50000, kDefaultBurnIn, rng);
    const double r3 = std::sqrt(3.0);
    const std::vector<std::vector<double>> verts = {{0, 1}, {-r3 / 2, -0.5}, {r3 / 2, -0.5}};

    std::size_t in_hole = 0;
    std::vector<double> p(2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        p[0] = pts.row(i)[0];
        p[1] = pts.row(i)[1];
        for (int level = 0; level < 16; ++level) {
            // barycentric coordinates; the subtriangle at vertex k is lambda_k >= 1/2
            const double l1 = (p[1] + 0.5) / 1.5;
            const double l3 = (p[0] + r3 / 2.0 - l1 * r3 / 2.0) / r3;
            const double l2 = 1.0 - l1 - l3;
            const double lmax = std::max({l1, l2, l3});
            if (lmax < 0.5 - 1e-9) {
                ++in_hole;
                break;
            }
            const int k = lmax == l1 ? 0 : (lmax == l2 ? 1 : 2);
            // pull back through the chosen map: x -> 2x - v_k
            p[0] = 2.0 * p[0] - verts[k][0];
            p[1] = 2.0 * p[1] - verts[k][1];
        }
    }
    CHECK(static_cast<double>(in_hole) / pts.size() < 0.001);
}

TEST_CASE("mean_depth") {
    CHECK(mean_depth(single_map_model(0.5, {0}, 2, {1, 0, 0})) == doctest::Approx(0.0));
    CHECK(mean_depth(single_map_model(0.5, {0}, 1, {0.5, 0.5})) == doctest::Approx(0.5));
    IfsModel m = single_map_model(0.5, {0}, 6, std::vector<double>(7, 1.0 / 7));
    CHECK(mean_depth(m) == doctest::Approx(3.0));
}

TEST_CASE("sample histogram matches density cell masses (chi-square)") {
    Rng rng(42);
    IfsModel m;
    m.dim = 2;
    m.depth = 1;
    m.components.emplace_back(0.6, test::rot2(0.7), std::vector<double>{0.8, 0.1});
    m.components.emplace_back(0.5, test::rot2(-1.2), std::vector<double>{-0.6, -0.3});
    m.weights = {0.5, 0.5};
    m.depth_weights = {0.4, 0.6};
    m.post = Similitude(1.1, test::rot2(0.2), {0.2, -0.1});

    const CodeTable t = build_code_table(m, 1, true);
    const FlatDensityTable flat(t);

    const int grid = 6;
    const double half = 5.0;
    const double cell = 2.0 * half / grid;
    const int sub = 40;

    std::vector<double> expected(grid * grid, 0.0);
    std::vector<double> x(2);
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            double mass = 0.0;
            for (int a = 0; a < sub; ++a)
                for (int b = 0; b < sub; ++b) {
                    x[0] = -half + i * cell + (a + 0.5) * cell / sub;
                    x[1] = -half + j * cell + (b + 0.5) * cell / sub;
                    mass += std::exp(log_density(flat, x));
                }
            expected[i * grid + j] = mass * (cell / sub) * (cell / sub);
        }

    const std::size_t n = 100000;
    const PointMatrix pts = sample(m, n, rng);
    std::vector<double> observed(grid * grid, 0.0);
    double outside = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = pts.row(i);
        const int ci = static_cast<int>(std::floor((p[0] + half) / cell));
        const int cj = static_cast<int>(std::floor((p[1] + half) / cell));
        if (ci < 0 || ci >= grid || cj < 0 || cj >= grid)
            outside += 1.0;
        else
            observed[ci * grid + cj] += 1.0;
    }

    // buckets: cells with expected count >= 10, everything else pooled
    double chi2 = 0.0;
    int buckets = 0;
    double rest_observed = outside;
    for (double& e : expected) e *= n;
    double rest_expected = n;
    for (int c = 0; c < grid * grid; ++c) {
        if (expected[c] >= 10.0) {
            chi2 += (observed[c] - expected[c]) * (observed[c] - expected[c]) / expected[c];
            rest_expected -= expected[c];
            ++buckets;
        } else {
            rest_observed += observed[c];
        }
    }
    if (rest_expected > 5.0) {
        chi2 += (rest_observed - rest_expected) * (rest_observed - rest_expected) / rest_expected;
        ++buckets;
    }
    const double pvalue = oracle::chi_square_pvalue(chi2, buckets - 1);
    CHECK(pvalue >= 0.001);
}

TEST_CASE("table built to depth d is a prefix of depth d+1") {
    Rng rng(43);
    const IfsModel m = random_model(3, 4, 2, rng);
    const CodeTable small = build_code_table(m, 3, true);
    const CodeTable big = build_code_table(m, 4, true);
    REQUIRE(big.rows_to_depth(3) == small.size());
    for (std::int64_t j = 0; j < small.size(); ++j) {
        CHECK(small.depth_of[j] == big.depth_of[j]);
        CHECK(small.log_prior[j] == big.log_prior[j]);
        CHECK(small.endpoint[j].sigma == big.endpoint[j].sigma);
        CHECK(small.endpoint[j].mean == big.endpoint[j].mean);
        CHECK(small.inner[j].scale == big.inner[j].scale);
        CHECK(small.inner[j].translation == big.inner[j].translation);
    }
}

TEST_CASE("model JSON round-trip") {
    Rng rng(44);
    const IfsModel m = random_model(3, 4, 3, rng);
    const IfsModel back = ifs_model_from_json(ifs_model_to_json(m));
    CHECK(back.dim == m.dim);
    CHECK(back.depth == m.depth);
    CHECK(back.weights == m.weights);
    CHECK(back.depth_weights == m.depth_weights);
    for (int k = 0; k < m.k(); ++k) {
        CHECK(back.components[k].scale == m.components[k].scale);
        CHECK(back.components[k].translation == m.components[k].translation);
        CHECK(max_abs_diff(back.components[k].rotation, m.components[k].rotation) == 0.0);
    }
    CHECK(back.post.scale == m.post.scale);
}

TEST_CASE("model JSON validation") {
    Rng rng(45);
    IfsModel m = random_model(2, 2, 2, rng);

    // near-simplex weights are renormalized
    m.weights = {0.5 + 4e-7, 0.5 + 4e-7};
    std::string text = ifs_model_to_json(m);
    const IfsModel ok = ifs_model_from_json(text);
    CHECK(ok.weights[0] + ok.weights[1] == doctest::Approx(1.0).epsilon(1e-15));

    // far from the simplex: rejected
    m.weights = {0.7, 0.5};
    CHECK_THROWS_AS(ifs_model_from_json(ifs_model_to_json(m)), InputError);
    m.weights = {0.5, 0.5};

    // broken rotation: rejected
    IfsModel scaled = m;
    scaled.components[0].rotation(0, 0) *= 1.001;
    scaled.components[0].rotation(1, 1) *= 1.001;
    CHECK_THROWS_AS(ifs_model_from_json(ifs_model_to_json(scaled)), InputError);
}
