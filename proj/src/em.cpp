// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "ifsem/log.hpp"

namespace ifsem {

namespace {

constexpr double kStarvationFloor = 1e-300;

// P columns whose code starts with digit k, aligned to the table's rows of
// depth <= max_depth - 1 (the code tails, in canonical order).
std::vector<std::int64_t> component_columns(const CodeTable& table, int k) {
    const std::int64_t tails = table.rows_to_depth(table.max_depth - 1);
    std::vector<std::int64_t> cols(tails);
    std::int64_t block = 1;  // K^d
    for (int d = 0; d < table.max_depth; ++d) {
        const std::int64_t tail_off = table.depth_offset(d);
        const std::int64_t full_off = table.depth_offset(d + 1);
        for (std::int64_t r = 0; r < block; ++r)
            cols[tail_off + r] = full_off + (k - 1) * block + r;
        block *= table.k;
    }
    return cols;
}

struct ColumnStats {
    std::vector<double> mass;    // sum_i P_ij
    std::vector<double> moment;  // sum_i P_ij x_i, |cols| x H
    std::vector<double> sqnorm;  // sum_i P_ij ||x_i||^2
};

ColumnStats column_stats(const Responsibilities& resp, const PointMatrix& batch,
                         std::span<const std::int64_t> cols) {
    const int h = batch.dim;
    const std::size_t nc = cols.size();
    ColumnStats s;
    s.mass.assign(nc, 0.0);
    s.moment.assign(nc * h, 0.0);
    s.sqnorm.assign(nc, 0.0);
    for (std::int64_t i = 0; i < resp.n; ++i) {
        const double* prow = resp.values.data() + i * resp.m;
        const auto x = batch.row(i);
        const double sq = squared_norm(x);
        for (std::size_t jj = 0; jj < nc; ++jj) {
            const double p = prow[cols[jj]];
            if (p == 0.0) continue;
            s.mass[jj] += p;
            s.sqnorm[jj] += p * sq;
            double* mom = s.moment.data() + jj * h;
            for (int c = 0; c < h; ++c) mom[c] += p * x[c];
        }
    }
    return s;
}

// Shared core of the component and post updates: a weighted similitude fit of
// batch points against the inner-code endpoints selected by `cols`.
ComponentUpdate similitude_update(const Responsibilities& resp, const PointMatrix& batch,
                                  const CodeTable& table, std::span<const std::int64_t> tail_rows,
                                  std::span<const std::int64_t> cols, const Similitude& fallback,
                                  double scale_floor) {
    const int h = batch.dim;
    const std::size_t nc = cols.size();
    const ColumnStats stats = column_stats(resp, batch, cols);

    std::vector<double> z(nc);
    for (std::size_t jj = 0; jj < nc; ++jj) {
        const double s = table.inner[tail_rows[jj]].scale;
        z[jj] = 1.0 / (s * s);
    }

    double p_z = 0.0, p_plain = 0.0;
    for (std::size_t jj = 0; jj < nc; ++jj) {
        p_z += z[jj] * stats.mass[jj];
        p_plain += stats.mass[jj];
    }
    if (p_z < kStarvationFloor) return {fallback, true};

    // weighted centroids of the points and of the inner translations
    std::vector<double> x_bar(h, 0.0), t_bar(h, 0.0);
    for (std::size_t jj = 0; jj < nc; ++jj) {
        const double* mom = stats.moment.data() + jj * h;
        const std::vector<double>& t = table.inner[tail_rows[jj]].translation;
        for (int c = 0; c < h; ++c) {
            x_bar[c] += z[jj] * mom[c];
            t_bar[c] += z[jj] * stats.mass[jj] * t[c];
        }
    }
    for (int c = 0; c < h; ++c) {
        x_bar[c] /= p_z;
        t_bar[c] /= p_z;
    }

    Mat a_mat(h, h);
    double a_coef = 0.0;
    const double x_bar_sq = squared_norm(x_bar);
    for (std::size_t jj = 0; jj < nc; ++jj) {
        if (stats.mass[jj] == 0.0) continue;
        const double* mom = stats.moment.data() + jj * h;
        const std::vector<double>& t = table.inner[tail_rows[jj]].translation;
        for (int r = 0; r < h; ++r) {
            const double left = mom[r] - stats.mass[jj] * x_bar[r];
            for (int c = 0; c < h; ++c) a_mat(r, c) += z[jj] * left * (t[c] - t_bar[c]);
        }
        double dot = 0.0;
        for (int c = 0; c < h; ++c) dot += mom[c] * x_bar[c];
        a_coef += z[jj] * (stats.sqnorm[jj] - 2.0 * dot + stats.mass[jj] * x_bar_sq);
    }

    // A vanishes exactly when every selected inner translation coincides
    // (e.g. depth 1, single empty tail); then the objective is flat in R and
    // keeping the previous rotation is both optimal and stable. A merely
    // rank-deficient A still has a well-defined maximizer: the SVD rotation
    // is optimal because null directions contribute nothing to tr(A^T R).
    const SvdResult svd = jacobi_svd(a_mat);
    const Mat rot = svd.sigma.front() <= kStarvationFloor ? fallback.rotation : optimal_rotation(svd);

    const double b_coef = trace(transpose(a_mat) * rot);
    const double scale = solve_scale(a_coef, b_coef, p_plain, h, scale_floor);

    std::vector<double> translation = mat_vec(rot, t_bar);
    for (int c = 0; c < h; ++c) translation[c] = x_bar[c] - scale * translation[c];

    return {Similitude(scale, rot, std::move(translation)), false};
}

std::vector<double> column_sums(const Responsibilities& resp) {
    std::vector<double> g(resp.m, 0.0);
    for (std::int64_t i = 0; i < resp.n; ++i) {
        const double* prow = resp.values.data() + i * resp.m;
        for (std::int64_t j = 0; j < resp.m; ++j) g[j] += prow[j];
    }
    return g;
}

}  // namespace

std::vector<double> update_depth_weights(const Responsibilities& resp, const CodeTable& table) {
    const std::vector<double> g = column_sums(resp);
    std::vector<double> v(table.max_depth + 1, 0.0);
    for (std::int64_t j = 0; j < table.size(); ++j) v[table.depth_of[j]] += g[j];
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= total;
    return v;
}

std::vector<double> update_component_weights(const Responsibilities& resp, const CodeTable& table,
                                             const std::vector<double>& old_weights, bool* kept_old) {
    const std::vector<double> g = column_sums(resp);
    std::vector<double> w(table.k, 0.0);
    for (std::int64_t j = 0; j < table.size(); ++j)
        if (table.first_digit[j] > 0) w[table.first_digit[j] - 1] += g[j];
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total < kStarvationFloor) {
        if (kept_old) *kept_old = true;
        return old_weights;
    }
    if (kept_old) *kept_old = false;
    for (double& x : w) x /= total;
    return w;
}

double solve_scale(double a, double b, double p, int dim, double scale_floor) {
    if (a <= 0.0) return scale_floor;
    const double disc = std::sqrt(b * b + 4.0 * p * dim * a);
    const double s = b > 0.0 ? 2.0 * a / (b + disc) : (disc - b) / (2.0 * p * dim);
    return std::max(s, scale_floor);
}

ComponentUpdate update_component(int k, const Responsibilities& resp, const PointMatrix& de_posted,
                                 const CodeTable& table, const IfsModel& old_model,
                                 double scale_floor) {
    if (table.max_depth < 1) return {old_model.components[k - 1], true};
    const std::vector<std::int64_t> cols = component_columns(table, k);
    std::vector<std::int64_t> tails(cols.size());
    std::iota(tails.begin(), tails.end(), 0);
    return similitude_update(resp, de_posted, table, tails, cols, old_model.components[k - 1],
                             scale_floor);
}

ComponentUpdate update_post(const Responsibilities& resp, const PointMatrix& batch,
                            const CodeTable& table, const IfsModel& old_model, double scale_floor) {
    std::vector<std::int64_t> all(table.size());
    std::iota(all.begin(), all.end(), 0);
    return similitude_update(resp, batch, table, all, all, old_model.post, scale_floor);
}

IfsModel em_iteration(const IfsModel& model, const PointMatrix& batch, const EmOptions& opts,
                      IterationStats* stats) {
    if (batch.empty()) throw InputError("em_iteration: batch must be nonempty");
    const CodeTable table = build_code_table(model, model.depth, true, opts.table_limit);
    const Responsibilities resp = e_step(table, batch, opts.workers);

    IfsModel next = model;
    next.depth_weights = update_depth_weights(resp, table);

    bool kept_weights = false;
    next.weights = update_component_weights(resp, table, model.weights, &kept_weights);

    const PointMatrix de_posted = apply(invert(model.post), batch);
    std::vector<int> starved;
    for (int k = 1; k <= model.k(); ++k) {
        ComponentUpdate up = update_component(k, resp, de_posted, table, model, opts.scale_floor);
        if (up.starved)
            starved.push_back(k - 1);
        else
            next.components[k - 1] = std::move(up.sim);
    }

    // The post-transform aligns the constellation of the components just
    // computed; reading the old components here would correct the same
    // discrepancy twice and makes the post/component scale product oscillate
    // instead of converging.
    const CodeTable post_table = build_code_table(next, model.depth, false, opts.table_limit);
    ComponentUpdate post_up = update_post(resp, batch, post_table, model, opts.scale_floor);
    if (!post_up.starved) next.post = std::move(post_up.sim);

    if (stats) {
        stats->starved = std::move(starved);
        stats->kept_weights = kept_weights;
    }
    return next;
}

IfsModel init_random(int k, int depth, int dim, Rng& rng) {
    IfsModel model;
    model.dim = dim;
    model.depth = depth;
    model.weights.assign(k, 1.0 / k);
    model.depth_weights.assign(depth + 1, 1.0 / (depth + 1));
    model.post = Similitude::identity(dim);
    model.components.reserve(k);
    for (int i = 0; i < k; ++i) {
        // fixed point uniform in the unit ball
        std::vector<double> p(dim);
        double norm = 0.0;
        for (double& c : p) {
            c = rng.normal();
            norm += c * c;
        }
        norm = std::sqrt(norm);
        const double radius = std::pow(rng.uniform01(), 1.0 / dim);
        for (double& c : p) c = norm > 0.0 ? c / norm * radius : 0.0;

        const double s = 0.5;
        Mat r = random_rotation(dim, rng);
        std::vector<double> t = mat_vec(r, p);
        for (int c = 0; c < dim; ++c) t[c] = p[c] - s * t[c];
        model.components.emplace_back(s, std::move(r), std::move(t));
    }
    return model;
}

bool has_converged(const IfsModel& model, double threshold) {
    return model.depth_weights.back() >= threshold;
}

namespace {

PointMatrix gather_rows(const PointMatrix& data, const std::vector<std::size_t>& idx) {
    PointMatrix out(data.dim, idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto src = data.row(idx[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

IfsModel with_depth(IfsModel model, int depth) {
    if (model.depth == depth) return model;
    model.depth = depth;
    model.depth_weights.assign(depth + 1, 1.0 / (depth + 1));
    return model;
}

FitResult train_loop(IfsModel model, const PointMatrix& data, const TrainConfig& config, Rng rng,
                     const PointMatrix* test) {
    const EmOptions opts{config.scale_floor, config.workers, config.table_limit};
    const std::size_t batch_size =
        std::min<std::size_t>(std::max(config.minibatch, 1), data.size());
    FitResult result{std::move(model), {}};
    result.history.reserve(config.iterations);
    for (int it = 0; it < config.iterations; ++it) {
        const auto start = std::chrono::steady_clock::now();
        const PointMatrix batch = gather_rows(data, sample_indices(data.size(), batch_size, rng));
        IterationStats stats;
        result.model = em_iteration(result.model, batch, opts, &stats);

        IterationRecord rec;
        rec.iter = it;
        rec.mean_depth = mean_depth(result.model);
        rec.depth_weights = result.model.depth_weights;
        rec.starved = std::move(stats.starved);
        rec.kept_weights = stats.kept_weights;
        if (test != nullptr && !test->empty()) {
            const CodeTable t = build_code_table(result.model, result.model.depth, true,
                                                 config.table_limit);
            rec.mean_ll_test = mean_log_density(t, *test, config.workers);
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(std::move(rec));
    }
    return result;
}

}  // namespace

IfsModel pre_select(const PointMatrix& data, const TrainConfig& config, const Rng& rng,
                    std::vector<double>* pool_mean_depths) {
    if (config.pool_size < 1) throw InputError("pre_select: pool_size must be >= 1");
    if (pool_mean_depths) pool_mean_depths->clear();
    IfsModel best;
    double best_depth = -1.0;
    for (int c = 0; c < config.pool_size; ++c) {
        Rng stream = rng.spawn(c);
        IfsModel candidate = init_random(config.k, config.pre_depth, data.dim, stream);
        TrainConfig pre = config;
        pre.iterations = config.pre_iterations;
        pre.minibatch = config.pre_minibatch;
        candidate = train_loop(std::move(candidate), data, pre, stream, nullptr).model;
        const double md = mean_depth(candidate);
        log_debug("pre_select candidate " + std::to_string(c) + " mean_depth " + std::to_string(md));
        if (pool_mean_depths) pool_mean_depths->push_back(md);
        if (md > best_depth) {
            best_depth = md;
            best = std::move(candidate);
        }
    }
    return best;
}

FitResult fit_from(IfsModel initial, const PointMatrix& data, const TrainConfig& config,
                   const Rng& rng, const PointMatrix* test) {
    if (data.empty()) throw InputError("fit: data must be nonempty");
    return train_loop(with_depth(std::move(initial), config.depth), data, config, rng.spawn(1),
                      test);
}

FitResult fit(const PointMatrix& data, const TrainConfig& config, const Rng& rng,
              const PointMatrix* test) {
    if (data.empty()) throw InputError("fit: data must be nonempty");
    IfsModel initial;
    if (config.pool_size == 1 && config.pre_iterations == 0) {
        Rng stream = rng.spawn(0);
        initial = init_random(config.k, config.depth, data.dim, stream);
    } else {
        initial = pre_select(data, config, rng.spawn(0));
    }
    return fit_from(std::move(initial), data, config, rng, test);
}

FitResult fit_restarts(const PointMatrix& data, const TrainConfig& config, const Rng& rng,
                       const PointMatrix* test) {
    const PointMatrix& score_set = (test != nullptr && !test->empty()) ? *test : data;
    FitResult best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(config.restarts, 1); ++r) {
        FitResult run = fit(data, config, rng.spawn(1000 + r), test);
        const CodeTable t = build_code_table(run.model, run.model.depth, true, config.table_limit);
        const double score = mean_log_density(t, score_set, config.workers);
        log_info("restart " + std::to_string(r) + " mean_ll " + std::to_string(score));
        if (score > best_score) {
            best_score = score;
            best = std::move(run);
        }
    }
    return best;
}

}  // namespace ifsem
