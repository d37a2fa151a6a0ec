// Apache License, Version 2.0, refer to LICENSE.txt
//
// ifsem: fit iterated-function-system probability models to point clouds,
// sample them, and compare against mixture-of-Gaussians baselines.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifsem/data.hpp"
#include "ifsem/em.hpp"
#include "ifsem/estep.hpp"
#include "ifsem/ifs_model.hpp"
#include "ifsem/log.hpp"
#include "ifsem/model_io.hpp"
#include "ifsem/mog.hpp"
#include "ifsem/render.hpp"

namespace {

using namespace ifsem;

void validate_writable(const std::string& path) {
    std::ofstream probe(path, std::ios::app);
    if (!probe) throw InputError("cannot write to '" + path + "'");
}

struct IfsPipelineResult {
    IfsModel model;  // in original data coordinates
    TrainHistory history;
};

// Shared fit pipeline: optional normalization, restarted training, and
// denormalization of the learned post-transform so the returned model (and
// the recorded test likelihoods) live in the original data frame.
IfsPipelineResult run_ifs_pipeline(const Dataset& train, const Dataset* test,
                                   const TrainConfig& config, const Rng& rng, bool do_normalize) {
    Similitude denorm = Similitude::identity(train.dim());
    Dataset train_n = train;
    Dataset test_n;
    if (do_normalize) {
        auto [normalized, record] = normalize(train);
        train_n = std::move(normalized);
        denorm = std::move(record);
        if (test != nullptr && test->size() > 0) {
            test_n.points = apply(invert(denorm), test->points);
        }
    } else if (test != nullptr) {
        test_n = *test;
    }

    const PointMatrix* test_points = test_n.points.empty() ? nullptr : &test_n.points;
    FitResult run = fit_restarts(train_n.points, config, rng, test_points);

    IfsPipelineResult out;
    out.history = std::move(run.history);
    out.model = std::move(run.model);
    out.model.post = compose(denorm, out.model.post);
    // shift recorded test likelihoods into the original frame
    const double jacobian = train.dim() * std::log(denorm.scale);
    for (IterationRecord& rec : out.history)
        if (rec.mean_ll_test.has_value()) rec.mean_ll_test = *rec.mean_ll_test - jacobian;
    return out;
}

double eval_model_file(const std::string& model_path, const PointMatrix& points, int workers) {
    if (is_mog_model_file(model_path)) {
        const MogModel m = load_mog_model(model_path);
        if (m.dim != points.dim) throw InputError("model and data dimensions differ");
        return mog_mean_log_density(m, points);
    }
    const IfsModel m = load_ifs_model(model_path);
    if (m.dim != points.dim) throw InputError("model and data dimensions differ");
    return mean_log_density(build_code_table(m, m.depth, true), points, workers);
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string source, out, model_path;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::size_t burn_in = kDefaultBurnIn;
};

int cmd_generate(const GenerateArgs& a) {
    validate_writable(a.out);
    Rng rng(a.seed);
    GenerateParams params;
    IfsModel model;
    if (a.source == "from-ifs") {
        if (a.model_path.empty()) throw InputError("--source from-ifs requires --model");
        model = load_ifs_model(a.model_path);
        params.model = &model;
    }
    params.burn_in = a.burn_in;
    const Dataset d = generate(a.source, a.n, rng, params);
    write_csv(a.out, d.points);
    std::cout << d.size() << " points -> " << a.out << "\n";
    return 0;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    std::string data, out = "model.json", history;
    TrainConfig config;
    double holdout = 0.2;
    bool no_normalize = false;
    bool timings = false;
};

int cmd_fit(const FitArgs& a) {
    const std::string history_path =
        a.history.empty() ? a.out + ".history.jsonl" : a.history;
    validate_writable(a.out);
    validate_writable(history_path);

    const Dataset data = load_csv(a.data);
    Rng rng(a.config.seed);
    auto [train, test] = split(data, a.holdout, rng);
    if (train.size() == 0) throw InputError("holdout fraction leaves no training data");

    const IfsPipelineResult result =
        run_ifs_pipeline(train, &test, a.config, rng.spawn(1), !a.no_normalize);

    save_ifs_model(a.out, result.model);
    save_history(history_path, result.history, a.timings);

    const bool converged = has_converged(result.model, a.config.convergence_threshold);
    std::cout << "converged: " << (converged ? "true" : "false")
              << " (deepest weight " << result.model.depth_weights.back() << ", threshold "
              << a.config.convergence_threshold << ")\n";
    if (!result.history.empty() && result.history.back().mean_ll_test.has_value())
        std::cout << "mean_ll_test: " << *result.history.back().mean_ll_test << "\n";
    return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
    std::string model, data;
    int workers = 1;
};

int cmd_eval(const EvalArgs& a) {
    const Dataset d = load_csv(a.data);
    const double ll = eval_model_file(a.model, d.points, a.workers);
    nlohmann::json j{{"mean_ll", ll}, {"n", d.size()}};
    std::cout << j.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
    std::string model, out;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    bool attractor = false;
    std::size_t burn_in = kDefaultBurnIn;
};

int cmd_sample(const SampleArgs& a) {
    validate_writable(a.out);
    const IfsModel m = load_ifs_model(a.model);
    Rng rng(a.seed);
    const PointMatrix points =
        a.attractor ? sample_attractor(m, a.n, a.burn_in, rng) : sample(m, a.n, rng);
    write_csv(a.out, points);
    std::cout << points.size() << " points -> " << a.out << "\n";
    return 0;
}

// ------------------------------------------------------------------ render

struct RenderArgs {
    std::string data, out, model_path;
    std::vector<int> dims;
    int resolution = 512;
};

int cmd_render(const RenderArgs& a) {
    validate_writable(a.out);
    const Dataset d = load_csv(a.data);

    PointMatrix points;
    if (a.dims.empty()) {
        if (d.dim() != 2)
            throw InputError("render expects 2D data, got H=" + std::to_string(d.dim()) +
                             "; use --dims to project a coordinate pair");
        points = d.points;
    } else {
        // scatter projection of one coordinate pair, for H > 2 data
        if (a.dims.size() != 2) throw InputError("--dims takes exactly two coordinate indices");
        for (int c : a.dims)
            if (c < 0 || c >= d.dim()) throw InputError("--dims index out of range for H=" +
                                                        std::to_string(d.dim()));
        points = PointMatrix(2, d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            points.row(i)[0] = d.points.row(i)[a.dims[0]];
            points.row(i)[1] = d.points.row(i)[a.dims[1]];
        }
    }

    IfsModel model;
    const IfsModel* model_ptr = nullptr;
    if (!a.model_path.empty()) {
        if (!a.dims.empty()) throw InputError("--model overlay is only defined for 2D data");
        model = load_ifs_model(a.model_path);
        model_ptr = &model;
    }
    write_ppm(a.out, render_scatter(points, a.resolution, model_ptr));
    std::cout << a.resolution << "x" << a.resolution << " image -> " << a.out << "\n";
    return 0;
}

// ----------------------------------------------------------------- fit-mog

struct FitMogArgs {
    std::string data, out = "mog.json", mode = "spherical";
    int k = 3;
    int iterations = 100;
    std::uint64_t seed = 1;
    double holdout = 0.0;
};

int cmd_fit_mog(const FitMogArgs& a) {
    validate_writable(a.out);
    const Dataset data = load_csv(a.data);
    Rng rng(a.seed);
    auto [train, test] = split(data, a.holdout, rng);
    if (train.size() == 0) throw InputError("holdout fraction leaves no training data");

    Rng fit_rng = rng.spawn(1);
    const MogMode mode = a.mode == "full" ? MogMode::kFull : MogMode::kSpherical;
    const MogFitResult result = fit_mog(train.points, a.k, mode, a.iterations, fit_rng);
    save_mog_model(a.out, result.model);

    nlohmann::json j{{"mean_ll_train",
                      result.train_ll.empty() ? mog_mean_log_density(result.model, train.points)
                                              : result.train_ll.back()}};
    if (test.size() > 0) j["mean_ll_test"] = mog_mean_log_density(result.model, test.points);
    std::cout << j.dump() << "\n";
    return 0;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
    std::string data, out;
    int repeats = 20;
    int k = 4;
    int depth = 5;
    int iterations = 100;
    int minibatch = 10000;
    double holdout = 0.2;
    std::uint64_t seed = 1;
    int workers = 1;
};

int cmd_compare(const CompareArgs& a) {
    if (a.repeats < 1) throw InputError("compare needs at least one repeat");
    if (!a.out.empty()) validate_writable(a.out);
    const Dataset data = load_csv(a.data);
    const Rng root(a.seed);

    std::map<std::string, std::vector<double>> runs;
    for (int r = 0; r < a.repeats; ++r) {
        Rng rep = root.spawn(r);
        auto [train, test] = split(data, a.holdout, rep);
        if (train.size() == 0 || test.size() == 0)
            throw InputError("compare needs nonempty train and test splits");

        TrainConfig config;
        config.k = a.k;
        config.depth = a.depth;
        config.iterations = a.iterations;
        config.minibatch = a.minibatch;
        config.pool_size = 1;      // plain random initialization
        config.pre_iterations = 0;
        config.workers = a.workers;

        const IfsPipelineResult ifs = run_ifs_pipeline(train, nullptr, config, rep.spawn(1), true);
        const CodeTable table = build_code_table(ifs.model, ifs.model.depth, true);
        runs["ifs"].push_back(mean_log_density(table, test.points, a.workers));

        Rng iso_rng = rep.spawn(2);
        const MogFitResult iso =
            fit_mog(train.points, a.k, MogMode::kSpherical, a.iterations, iso_rng);
        runs["iso"].push_back(mog_mean_log_density(iso.model, test.points));

        Rng mog_rng = rep.spawn(3);
        const MogFitResult mog = fit_mog(train.points, a.k, MogMode::kFull, a.iterations, mog_rng);
        runs["mog"].push_back(mog_mean_log_density(mog.model, test.points));

        log_info("repeat " + std::to_string(r) + ": ifs " + std::to_string(runs["ifs"].back()) +
                 ", iso " + std::to_string(runs["iso"].back()) + ", mog " +
                 std::to_string(runs["mog"].back()));
    }

    const std::string doc = write_metrics(runs);
    if (!a.out.empty()) {
        std::ofstream out(a.out, std::ios::binary);
        out << doc;
    }
    std::cout << doc;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IFS probability models for point clouds: train, evaluate, sample, render"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* c_gen = app.add_subcommand("generate", "Write a synthetic dataset CSV");
    c_gen->add_option("--source", gen.source, "Dataset family")
        ->required()
        ->check(CLI::IsMember(kGeneratorNames));
    c_gen->add_option("--n", gen.n, "Number of points");
    c_gen->add_option("--seed", gen.seed, "Random seed");
    c_gen->add_option("--out", gen.out, "Output CSV path")->required();
    c_gen->add_option("--model", gen.model_path, "Model JSON for --source from-ifs")
        ->check(CLI::ExistingFile);
    c_gen->add_option("--burn-in", gen.burn_in, "Chaos-game burn-in steps");

    FitArgs fita;
    CLI::App* c_fit = app.add_subcommand("fit", "Fit an IFS model to CSV data");
    c_fit->add_option("--data", fita.data, "Training CSV")->required()->check(CLI::ExistingFile);
    c_fit->add_option("--out", fita.out, "Model JSON output path");
    c_fit->add_option("--history", fita.history, "History JSONL path (default <out>.history.jsonl)");
    c_fit->add_option("--k", fita.config.k, "Component count");
    c_fit->add_option("--depth", fita.config.depth, "Maximum code depth D");
    c_fit->add_option("--iters", fita.config.iterations, "Training iterations");
    c_fit->add_option("--minibatch", fita.config.minibatch, "Minibatch size N'");
    c_fit->add_option("--pool", fita.config.pool_size, "Pre-selection pool size");
    c_fit->add_option("--pre-iters", fita.config.pre_iterations, "Pre-selection iterations");
    c_fit->add_option("--pre-depth", fita.config.pre_depth, "Pre-selection depth");
    c_fit->add_option("--pre-minibatch", fita.config.pre_minibatch, "Pre-selection minibatch");
    c_fit->add_option("--seed", fita.config.seed, "Random seed");
    c_fit->add_option("--restarts", fita.config.restarts, "Independent restarts, best kept");
    c_fit->add_option("--holdout", fita.holdout, "Held-out fraction for model selection");
    c_fit->add_option("--workers", fita.config.workers, "Worker threads for the E-step");
    c_fit->add_flag("--no-normalize", fita.no_normalize, "Fit in raw data coordinates");
    c_fit->add_flag("--timings", fita.timings, "Record wall-clock seconds in the history file");

    EvalArgs eva;
    CLI::App* c_eval = app.add_subcommand("eval", "Mean log-likelihood of a model on CSV data");
    c_eval->add_option("--model", eva.model, "Model JSON (IFS or MOG)")
        ->required()
        ->check(CLI::ExistingFile);
    c_eval->add_option("--data", eva.data, "Evaluation CSV")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--workers", eva.workers, "Worker threads");

    SampleArgs sam;
    CLI::App* c_sample = app.add_subcommand("sample", "Draw points from a model");
    c_sample->add_option("--model", sam.model, "Model JSON")->required()->check(CLI::ExistingFile);
    c_sample->add_option("--n", sam.n, "Number of points");
    c_sample->add_option("--seed", sam.seed, "Random seed");
    c_sample->add_option("--out", sam.out, "Output CSV path")->required();
    c_sample->add_flag("--attractor", sam.attractor, "Chaos-game sampling at infinite depth");
    c_sample->add_option("--burn-in", sam.burn_in, "Chaos-game burn-in steps");

    RenderArgs ren;
    CLI::App* c_render = app.add_subcommand("render", "Rasterize a 2D dataset to PPM");
    c_render->add_option("--data", ren.data, "Points CSV")->required()->check(CLI::ExistingFile);
    c_render->add_option("--out", ren.out, "Output PPM path")->required();
    c_render->add_option("--model", ren.model_path, "Model JSON for frame overlay")
        ->check(CLI::ExistingFile);
    c_render->add_option("--resolution", ren.resolution, "Image size in pixels");
    c_render->add_option("--dims", ren.dims, "Two coordinate indices to project (for H > 2 data)")
        ->expected(2);

    FitMogArgs mog;
    CLI::App* c_mog = app.add_subcommand("fit-mog", "Fit a mixture-of-Gaussians baseline");
    c_mog->add_option("--data", mog.data, "Training CSV")->required()->check(CLI::ExistingFile);
    c_mog->add_option("--out", mog.out, "Model JSON output path");
    c_mog->add_option("--k", mog.k, "Component count");
    c_mog->add_option("--mode", mog.mode, "Covariance mode")
        ->check(CLI::IsMember({"spherical", "full"}));
    c_mog->add_option("--iters", mog.iterations, "EM iterations (full batch)");
    c_mog->add_option("--seed", mog.seed, "Random seed");
    c_mog->add_option("--holdout", mog.holdout, "Held-out fraction to report test likelihood");

    CompareArgs cmp;
    CLI::App* c_cmp = app.add_subcommand("compare", "IFS vs spherical and full MOG baselines");
    c_cmp->add_option("--data", cmp.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    c_cmp->add_option("--out", cmp.out, "Metrics JSON output path");
    c_cmp->add_option("--repeats", cmp.repeats, "Runs per method");
    c_cmp->add_option("--k", cmp.k, "Component count for all methods");
    c_cmp->add_option("--depth", cmp.depth, "IFS depth D");
    c_cmp->add_option("--iters", cmp.iterations, "Training iterations per method");
    c_cmp->add_option("--minibatch", cmp.minibatch, "IFS minibatch size");
    c_cmp->add_option("--holdout", cmp.holdout, "Held-out fraction");
    c_cmp->add_option("--seed", cmp.seed, "Random seed");
    c_cmp->add_option("--workers", cmp.workers, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(c_gen)) return cmd_generate(gen);
        if (app.got_subcommand(c_fit)) return cmd_fit(fita);
        if (app.got_subcommand(c_eval)) return cmd_eval(eva);
        if (app.got_subcommand(c_sample)) return cmd_sample(sam);
        if (app.got_subcommand(c_render)) return cmd_render(ren);
        if (app.got_subcommand(c_mog)) return cmd_fit_mog(mog);
        if (app.got_subcommand(c_cmp)) return cmd_compare(cmp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
