// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ifsem/geometry.hpp"

namespace ifsem {

namespace {

struct Frame {
    double x0, y0;        // lower-left corner of the rendered region
    double wx, wy;        // region extents
    int res;

    // pixel column/row for a point; pixel (0,0) is the top-left
    int px(double x) const {
        return std::clamp(static_cast<int>(std::floor((x - x0) / wx * res)), 0, res - 1);
    }
    int py(double y) const {
        return std::clamp(res - 1 - static_cast<int>(std::floor((y - y0) / wy * res)), 0, res - 1);
    }

    // continuous pixel coordinates, unclamped (for line endpoints)
    double fx(double x) const { return (x - x0) / wx * res - 0.5; }
    double fy(double y) const { return res - 0.5 - (y - y0) / wy * res; }
};

// Liang-Barsky clip of the segment to [lo, hi]^2; false when fully outside.
bool clip_segment(double& x0, double& y0, double& x1, double& y1, double lo, double hi) {
    double t0 = 0.0, t1 = 1.0;
    const double dx = x1 - x0, dy = y1 - y0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x0 - lo, hi - x0, y0 - lo, hi - y0};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0) {
            if (r > t1) return false;
            t0 = std::max(t0, r);
        } else {
            if (r < t0) return false;
            t1 = std::min(t1, r);
        }
    }
    const double nx0 = x0 + t0 * dx, ny0 = y0 + t0 * dy;
    x1 = x0 + t1 * dx;
    y1 = y0 + t1 * dy;
    x0 = nx0;
    y0 = ny0;
    return true;
}

void draw_line(RasterImage& img, double fx0, double fy0, double fx1, double fy1, std::uint8_t r,
               std::uint8_t g, std::uint8_t b) {
    if (!clip_segment(fx0, fy0, fx1, fy1, 0.0, img.width - 1.0)) return;
    int x0 = static_cast<int>(std::lround(fx0)), y0 = static_cast<int>(std::lround(fy0));
    const int x1 = static_cast<int>(std::lround(fx1)), y1 = static_cast<int>(std::lround(fy1));
    // integer midpoint walk over the clipped segment
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        std::uint8_t* p = img.pixel(x0, y0);
        p[0] = r;
        p[1] = g;
        p[2] = b;
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_square_image(RasterImage& img, const Frame& frame, const Similitude& map, std::uint8_t r,
                       std::uint8_t g, std::uint8_t b) {
    const std::vector<std::vector<double>> corners = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (int e = 0; e < 4; ++e) {
        const auto a = apply(map, corners[e]);
        const auto c = apply(map, corners[(e + 1) % 4]);
        draw_line(img, frame.fx(a[0]), frame.fy(a[1]), frame.fx(c[0]), frame.fy(c[1]), r, g, b);
    }
}

}  // namespace

RasterImage render_scatter(const PointMatrix& points, int resolution, const IfsModel* model) {
    if (points.dim != 2 && !points.empty()) throw InputError("render_scatter: points must be 2D");
    if (resolution < 1) throw InputError("render_scatter: resolution must be >= 1");

    RasterImage img;
    img.width = img.height = resolution;
    img.rgb.assign(static_cast<std::size_t>(resolution) * resolution * 3, 0);
    if (points.empty()) return img;

    double xmin = points.values[0], xmax = xmin, ymin = points.values[1], ymax = ymin;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto p = points.row(i);
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
    }
    double ex = xmax - xmin, ey = ymax - ymin;
    if (ex <= 0.0) ex = 1.0;
    if (ey <= 0.0) ey = 1.0;
    const Frame frame{xmin - 0.05 * ex, ymin - 0.05 * ey, 1.1 * ex, 1.1 * ey, resolution};

    std::vector<std::uint32_t> counts(static_cast<std::size_t>(resolution) * resolution, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto p = points.row(i);
        counts[static_cast<std::size_t>(frame.py(p[1])) * resolution + frame.px(p[0])] += 1;
    }
    const std::uint32_t cmax = *std::max_element(counts.begin(), counts.end());

    // tone map on max-normalized counts so duplicating the dataset leaves
    // the image unchanged: 255 * log(1 + 255 c/cmax) / log(256)
    if (cmax > 0) {
        const double gain = 255.0;
        const double denom = std::log1p(gain);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] == 0) continue;
            const double t = std::log1p(gain * counts[i] / cmax) / denom;
            const auto v = static_cast<std::uint8_t>(std::lround(255.0 * t));
            img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = v;
        }
    }

    if (model != nullptr) {
        if (model->dim != 2) throw InputError("render_scatter: model must be 2D");
        for (const Similitude& f : model->components)
            draw_square_image(img, frame, compose(model->post, f), 0, 0, 255);
        draw_square_image(img, frame, model->post, 255, 0, 0);  // red frame on top
    }
    return img;
}

void write_ppm(const std::string& path, const RasterImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()),
              static_cast<std::streamsize>(image.rgb.size()));
}

MethodSummary summarize_runs(const std::vector<double>& runs) {
    if (runs.empty()) throw InputError("summarize_runs: need at least one run");
    MethodSummary s;
    s.runs = runs;
    double sum = 0.0;
    for (double v : runs) sum += v;
    s.mean = sum / runs.size();
    s.min = *std::min_element(runs.begin(), runs.end());
    s.max = *std::max_element(runs.begin(), runs.end());
    if (runs.size() > 1) {
        double sq = 0.0;
        for (double v : runs) sq += (v - s.mean) * (v - s.mean);
        s.stderr_ = std::sqrt(sq / (runs.size() - 1)) / std::sqrt(static_cast<double>(runs.size()));
    }
    return s;
}

std::string write_metrics(const std::map<std::string, std::vector<double>>& runs_by_method) {
    nlohmann::json j;
    for (const auto& [method, runs] : runs_by_method) {
        const MethodSummary s = summarize_runs(runs);
        j[method] = {{"runs", s.runs}, {"mean", s.mean},   {"stderr", s.stderr_},
                     {"min", s.min},   {"max", s.max}};
    }
    return j.dump(2) + "\n";
}

}  // namespace ifsem
