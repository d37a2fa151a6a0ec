// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ifsem/core.hpp"
#include "ifsem/ifs_model.hpp"

namespace ifsem {

/// 8-bit RGB raster, row-major from the top-left pixel.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* pixel(int x, int y) const {
        return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
};

/// Density scatter of a 2D point cloud: per-pixel counts over the bounding
/// box with a 5% margin, log tone-mapped. With a model, the post-transformed
/// bi-unit square is drawn in red and its image under each component in blue.
RasterImage render_scatter(const PointMatrix& points, int resolution,
                           const IfsModel* model = nullptr);

void write_ppm(const std::string& path, const RasterImage& image);

struct MethodSummary {
    std::vector<double> runs;
    double mean = 0.0;
    double stderr_ = 0.0;   // sample standard error, 0 for a single run
    double min = 0.0;
    double max = 0.0;
};

MethodSummary summarize_runs(const std::vector<double>& runs);

/// Metrics document: {"method": {runs, mean, stderr, min, max}, ...}.
std::string write_metrics(const std::map<std::string, std::vector<double>>& runs_by_method);

}  // namespace ifsem
