// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>
#include <vector>

#include "ifsem/core.hpp"
#include "ifsem/geometry.hpp"
#include "ifsem/ifs_model.hpp"
#include "ifsem/rng.hpp"

namespace ifsem {

struct Dataset {
    PointMatrix points;
    std::string name;
    std::string provenance;

    std::size_t size() const { return points.size(); }
    int dim() const { return points.dim; }
};

extern const std::vector<std::string> kGeneratorNames;  // excludes from-ifs parameters

struct GenerateParams {
    const IfsModel* model = nullptr;  // required for from-ifs
    std::size_t burn_in = kDefaultBurnIn;
};

/// Synthetic sources: sierpinski, sierpinski-nonuniform, koch, square,
/// circle, from-ifs. Unknown names raise InputError listing the options.
Dataset generate(const std::string& source, std::size_t n, Rng& rng, const GenerateParams& params = {});

/// The 2D generator models behind the chaos-game sources.
IfsModel sierpinski_model(bool uniform_weights = true);
IfsModel koch_model();

Dataset load_csv(const std::string& path);
void write_csv(const std::string& path, const PointMatrix& points);

/// Uniform partition without replacement; |test| = round(fraction * N).
std::pair<Dataset, Dataset> split(const Dataset& data, double holdout_fraction, Rng& rng);

/// Centers the data and scales it to unit RMS radius. Returns the normalized
/// dataset and the similitude mapping normalized coordinates back to the
/// original frame.
std::pair<Dataset, Similitude> normalize(const Dataset& data);

}  // namespace ifsem
