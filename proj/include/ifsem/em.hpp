// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ifsem/core.hpp"
#include "ifsem/estep.hpp"
#include "ifsem/ifs_model.hpp"
#include "ifsem/rng.hpp"

namespace ifsem {

/// Training knobs. Defaults follow the 2D experiment protocol.
struct TrainConfig {
    int k = 3;
    int depth = 6;
    int iterations = 300;
    int minibatch = 500;
    int pool_size = 10;        // pre-selection candidates
    int pre_iterations = 100;
    int pre_depth = 3;
    int pre_minibatch = 500;
    std::uint64_t seed = 1;
    double scale_floor = 1e-6;
    double convergence_threshold = 0.95;
    int restarts = 1;
    int workers = 1;
    std::int64_t table_limit = kDefaultTableLimit;
};

struct IterationRecord {
    int iter = 0;
    std::optional<double> mean_ll_test;
    double mean_depth = 0.0;
    std::vector<double> depth_weights;
    double seconds = 0.0;            // measured wall clock, in-memory only by default
    std::vector<int> starved;        // 0-based indices of components left unchanged
    bool kept_weights = false;       // w update skipped for lack of depth>=1 mass
};

using TrainHistory = std::vector<IterationRecord>;

struct FitResult {
    IfsModel model;
    TrainHistory history;
};

struct EmOptions {
    double scale_floor = 1e-6;
    int workers = 1;
    std::int64_t table_limit = kDefaultTableLimit;
};

struct IterationStats {
    std::vector<int> starved;
    bool kept_weights = false;
};

/// Depth weights from responsibility mass per code length, normalized.
std::vector<double> update_depth_weights(const Responsibilities& resp, const CodeTable& table);

/// Component weights from the mass of columns sharing a leading digit; the
/// empty-code column carries no leading digit and is excluded. Falls back to
/// old_weights (setting *kept_old) when no depth>=1 mass exists.
std::vector<double> update_component_weights(const Responsibilities& resp, const CodeTable& table,
                                             const std::vector<double>& old_weights,
                                             bool* kept_old = nullptr);

/// Positive root of p*dim*s^2 + b*s - a = 0, clamped below at scale_floor.
/// Returns scale_floor outright when a is zero.
double solve_scale(double a, double b, double p, int dim, double scale_floor);

struct ComponentUpdate {
    Similitude sim;
    bool starved = false;
};

/// Closed-form update of component k from the responsibility columns whose
/// codes start with k. `de_posted` must hold the batch pulled back through
/// the old post-transform; `table` is read for its post-free inner rows of
/// depth <= D-1.
ComponentUpdate update_component(int k, const Responsibilities& resp, const PointMatrix& de_posted,
                                 const CodeTable& table, const IfsModel& old_model,
                                 double scale_floor);

/// Same pattern over the full responsibility matrix and the raw batch.
ComponentUpdate update_post(const Responsibilities& resp, const PointMatrix& batch,
                            const CodeTable& table, const IfsModel& old_model, double scale_floor);

/// One full EM iteration: E-step, then all closed-form updates computed from
/// the old model and applied together.
IfsModel em_iteration(const IfsModel& model, const PointMatrix& batch, const EmOptions& opts = {},
                      IterationStats* stats = nullptr);

/// Random model: fixed points uniform in the unit ball, scale 1/2, uniform
/// rotation, uniform weights and depth weights, identity post-transform.
IfsModel init_random(int k, int depth, int dim, Rng& rng);

/// Trains pool_size random candidates at pre_depth for pre_iterations and
/// returns the one with the highest mean depth (ties: lowest index).
/// pool_mean_depths, when given, receives one mean depth per candidate.
IfsModel pre_select(const PointMatrix& data, const TrainConfig& config, const Rng& rng,
                    std::vector<double>* pool_mean_depths = nullptr);

/// The deepest level holds at least `threshold` of the depth-weight mass.
bool has_converged(const IfsModel& model, double threshold = 0.95);

/// Full training run: initialization (pre-selection unless disabled), then
/// `iterations` EM steps on fresh minibatches. Deterministic given the rng.
FitResult fit(const PointMatrix& data, const TrainConfig& config, const Rng& rng,
              const PointMatrix* test = nullptr);

/// Same model as `fit`, pre-pinned to the given initial model.
FitResult fit_from(IfsModel initial, const PointMatrix& data, const TrainConfig& config,
                   const Rng& rng, const PointMatrix* test = nullptr);

/// config.restarts independent runs; keeps the one whose final model scores
/// the highest mean log-likelihood on `test` (or on `data` if no test set).
FitResult fit_restarts(const PointMatrix& data, const TrainConfig& config, const Rng& rng,
                       const PointMatrix* test = nullptr);

}  // namespace ifsem
