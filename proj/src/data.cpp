// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/data.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace ifsem {

const std::vector<std::string> kGeneratorNames = {"sierpinski", "sierpinski-nonuniform",
                                                  "koch",       "square",
                                                  "circle",     "from-ifs"};

namespace {

Mat rotation2d(double radians) {
    Mat r(2, 2);
    r(0, 0) = std::cos(radians);
    r(0, 1) = -std::sin(radians);
    r(1, 0) = std::sin(radians);
    r(1, 1) = std::cos(radians);
    return r;
}

Similitude map_with_fixed_point(double scale, const Mat& rotation, std::span<const double> fixed) {
    std::vector<double> t = mat_vec(rotation, fixed);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = fixed[i] - scale * t[i];
    return Similitude(scale, rotation, std::move(t));
}

}  // namespace

IfsModel sierpinski_model(bool uniform_weights) {
    const double r3 = std::sqrt(3.0);
    const std::vector<std::vector<double>> vertices = {
        {0.0, 1.0}, {-r3 / 2.0, -0.5}, {r3 / 2.0, -0.5}};
    IfsModel m;
    m.dim = 2;
    m.depth = 0;  // generator model; depth weights are unused by the chaos game
    m.depth_weights = {1.0};
    m.post = Similitude::identity(2);
    for (const auto& v : vertices)
        m.components.push_back(map_with_fixed_point(0.5, Mat::identity(2), v));
    m.weights = uniform_weights ? std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}
                                : std::vector<double>{0.5, 0.3, 0.2};
    return m;
}

IfsModel koch_model() {
    const double r3 = std::sqrt(3.0);
    IfsModel m;
    m.dim = 2;
    m.depth = 0;
    m.depth_weights = {1.0};
    m.weights.assign(4, 0.25);
    m.post = Similitude::identity(2);
    const double s = 1.0 / 3.0;
    m.components.emplace_back(s, Mat::identity(2), std::vector<double>{0.0, 0.0});
    m.components.emplace_back(s, rotation2d(M_PI / 3.0), std::vector<double>{1.0 / 3.0, 0.0});
    m.components.emplace_back(s, rotation2d(-M_PI / 3.0), std::vector<double>{0.5, r3 / 6.0});
    m.components.emplace_back(s, Mat::identity(2), std::vector<double>{2.0 / 3.0, 0.0});
    return m;
}

Dataset generate(const std::string& source, std::size_t n, Rng& rng, const GenerateParams& params) {
    Dataset d;
    d.name = source;
    if (source == "sierpinski" || source == "sierpinski-nonuniform") {
        const IfsModel m = sierpinski_model(source == "sierpinski");
        d.points = sample_attractor(m, n, params.burn_in, rng);
        d.provenance = "chaos game, 3 maps, s=1/2";
    } else if (source == "koch") {
        d.points = sample_attractor(koch_model(), n, params.burn_in, rng);
        d.provenance = "chaos game, 4 maps, s=1/3";
    } else if (source == "square") {
        d.points = PointMatrix(2, n);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = d.points.row(i);
            row[0] = rng.uniform(-1.0, 1.0);
            row[1] = rng.uniform(-1.0, 1.0);
        }
        d.provenance = "uniform on [-1,1]^2";
    } else if (source == "circle") {
        d.points = PointMatrix(2, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double theta = rng.uniform(0.0, 2.0 * M_PI);
            auto row = d.points.row(i);
            row[0] = std::cos(theta);
            row[1] = std::sin(theta);
        }
        d.provenance = "uniform on the unit circle";
    } else if (source == "from-ifs") {
        if (params.model == nullptr) throw InputError("from-ifs generation requires a model");
        d.points = sample_attractor(*params.model, n, params.burn_in, rng);
        d.provenance = "chaos game on supplied model";
    } else {
        std::string names;
        for (const auto& s : kGeneratorNames) names += (names.empty() ? "" : ", ") + s;
        throw InputError("unknown source '" + source + "'; valid sources: " + names);
    }
    return d;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");

    Dataset d;
    d.name = path;
    d.provenance = path;
    std::string line;
    std::size_t lineno = 0;
    int columns = -1;
    std::vector<double> row;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break;  // trailing newline

        row.clear();
        bool numeric = true;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            const char* begin = cell.c_str();
            char* end = nullptr;
            const double value = std::strtod(begin, &end);
            // require full consumption modulo surrounding whitespace
            const char* tail = end;
            while (tail && *tail != '\0' && std::isspace(static_cast<unsigned char>(*tail))) ++tail;
            if (end == begin || (tail && *tail != '\0')) {
                numeric = false;
            } else {
                row.push_back(value);
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }

        if (!numeric) {
            if (lineno == 1) continue;  // header row
            throw ParseError("non-numeric cell at line " + std::to_string(lineno) + " of " + path);
        }
        if (columns == -1) {
            columns = static_cast<int>(row.size());
            d.points.dim = columns;
        } else if (static_cast<int>(row.size()) != columns) {
            throw ParseError("row with " + std::to_string(row.size()) + " columns at line " +
                             std::to_string(lineno) + " of " + path + ", expected " +
                             std::to_string(columns));
        }
        d.points.values.insert(d.points.values.end(), row.begin(), row.end());
    }
    if (columns == -1) throw ParseError("no data rows in " + path);
    return d;
}

void write_csv(const std::string& path, const PointMatrix& points) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (out == nullptr) throw InputError("cannot write '" + path + "'");
    const int h = points.dim;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = points.row(i);
        for (int c = 0; c < h; ++c) std::fprintf(out, "%.17g%c", row[c], c + 1 == h ? '\n' : ',');
    }
    std::fclose(out);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double holdout_fraction, Rng& rng) {
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
        throw InputError("holdout fraction must be in [0, 1)");
    const std::size_t n = data.size();
    const std::size_t n_test = static_cast<std::size_t>(std::llround(holdout_fraction * n));
    std::vector<std::size_t> idx = sample_indices(n, n, rng);

    Dataset test{PointMatrix(data.dim()), data.name + "/test", data.provenance};
    Dataset train{PointMatrix(data.dim()), data.name + "/train", data.provenance};
    for (std::size_t i = 0; i < n; ++i)
        (i < n_test ? test : train).points.push_back(data.points.row(idx[i]));
    return {std::move(train), std::move(test)};
}

std::pair<Dataset, Similitude> normalize(const Dataset& data) {
    const std::size_t n = data.size();
    const int h = data.dim();
    if (n < 2) throw InputError("normalize: need at least two points");

    std::vector<double> mean(h, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.points.row(i);
        for (int c = 0; c < h; ++c) mean[c] += x[c];
    }
    for (double& m : mean) m /= static_cast<double>(n);

    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq += squared_distance(data.points.row(i), mean);
    const double rms = std::sqrt(sq / (static_cast<double>(n) * h));
    if (rms <= 0.0) throw InputError("normalize: data has zero spread");

    Dataset out{PointMatrix(h, n), data.name, data.provenance + " (normalized)"};
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = data.points.row(i);
        auto dst = out.points.row(i);
        for (int c = 0; c < h; ++c) dst[c] = (src[c] - mean[c]) / rms;
    }
    return {std::move(out), Similitude(rms, Mat::identity(h), std::move(mean))};
}

}  // namespace ifsem
