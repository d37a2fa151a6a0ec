// Apache License, Version 2.0, refer to LICENSE.txt
#include "ifsem/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace ifsem {

using nlohmann::json;

namespace {

json similitude_to_json(const Similitude& f) {
    return json{{"s", f.scale}, {"r", f.rotation.a}, {"t", f.translation}};
}

Similitude similitude_from_json(const json& j, int h) {
    const double s = j.at("s").get<double>();
    const auto r_flat = j.at("r").get<std::vector<double>>();
    auto t = j.at("t").get<std::vector<double>>();
    if (static_cast<int>(t.size()) != h || static_cast<int>(r_flat.size()) != h * h)
        throw InputError("similitude fields do not match dimension");
    if (!(s > 0.0)) throw InputError("similitude scale must be positive");
    Mat r(h, h);
    r.a = r_flat;
    if (orthogonality_error(r) > 1e-6 || std::abs(determinant(r) - 1.0) > 1e-6)
        throw InputError("rotation matrix fails orthogonality/determinant check");
    return Similitude(s, std::move(r), std::move(t));
}

// Renormalizes a near-simplex vector in place; throws when it is further
// than tol from the simplex. Vectors already normalized to machine precision
// are left untouched so load/save round-trips are exact.
void snap_to_simplex(std::vector<double>& v, const char* name, double tol = 1e-6) {
    double sum = 0.0;
    for (double& x : v) {
        if (x < -tol) throw InputError(std::string(name) + " has a negative entry");
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol) throw InputError(std::string(name) + " does not sum to 1");
    if (std::abs(sum - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) return;
    for (double& x : v) x /= sum;
}

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

}  // namespace

std::string ifs_model_to_json(const IfsModel& model) {
    json j;
    j["h"] = model.dim;
    j["k"] = model.k();
    j["d"] = model.depth;
    j["components"] = json::array();
    for (const Similitude& f : model.components) j["components"].push_back(similitude_to_json(f));
    j["w"] = model.weights;
    j["v"] = model.depth_weights;
    j["post"] = similitude_to_json(model.post);
    return j.dump(2) + "\n";
}

void save_ifs_model(const std::string& path, const IfsModel& model) {
    write_file(path, ifs_model_to_json(model));
}

IfsModel ifs_model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
    IfsModel m;
    try {
        m.dim = j.at("h").get<int>();
        m.depth = j.at("d").get<int>();
        const int k = j.at("k").get<int>();
        if (m.dim < 1 || m.depth < 0 || k < 1) throw InputError("invalid model shape fields");
        for (const json& c : j.at("components")) m.components.push_back(similitude_from_json(c, m.dim));
        if (m.k() != k) throw InputError("component count does not match k");
        m.weights = j.at("w").get<std::vector<double>>();
        m.depth_weights = j.at("v").get<std::vector<double>>();
        if (static_cast<int>(m.weights.size()) != k) throw InputError("w length does not match k");
        if (static_cast<int>(m.depth_weights.size()) != m.depth + 1)
            throw InputError("v length does not match d + 1");
        m.post = similitude_from_json(j.at("post"), m.dim);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model JSON missing fields: ") + e.what());
    }
    snap_to_simplex(m.weights, "w");
    snap_to_simplex(m.depth_weights, "v");
    return m;
}

IfsModel load_ifs_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ifs_model_from_json(text);
}

std::string mog_model_to_json(const MogModel& model) {
    json j;
    j["k"] = model.k();
    j["h"] = model.dim;
    j["mode"] = model.mode == MogMode::kSpherical ? "spherical" : "full";
    j["means"] = model.means;
    if (model.mode == MogMode::kSpherical) {
        j["covariances"] = model.variances;
    } else {
        j["covariances"] = json::array();
        for (const Mat& c : model.covariances) j["covariances"].push_back(c.a);
    }
    j["weights"] = model.weights;
    return j.dump(2) + "\n";
}

void save_mog_model(const std::string& path, const MogModel& model) {
    write_file(path, mog_model_to_json(model));
}

MogModel mog_model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
    MogModel m;
    try {
        m.dim = j.at("h").get<int>();
        const int k = j.at("k").get<int>();
        const std::string mode = j.at("mode").get<std::string>();
        if (mode != "spherical" && mode != "full") throw InputError("unknown mog mode " + mode);
        m.mode = mode == "spherical" ? MogMode::kSpherical : MogMode::kFull;
        m.means = j.at("means").get<std::vector<std::vector<double>>>();
        if (static_cast<int>(m.means.size()) != k) throw InputError("mean count does not match k");
        for (const auto& mean : m.means)
            if (static_cast<int>(mean.size()) != m.dim) throw InputError("mean dimension mismatch");
        if (m.mode == MogMode::kSpherical) {
            m.variances = j.at("covariances").get<std::vector<double>>();
            for (double v : m.variances)
                if (!(v > 0.0)) throw InputError("variance must be positive");
        } else {
            for (const json& c : j.at("covariances")) {
                Mat cov(m.dim, m.dim);
                cov.a = c.get<std::vector<double>>();
                if (static_cast<int>(cov.a.size()) != m.dim * m.dim)
                    throw InputError("covariance size mismatch");
                m.covariances.push_back(std::move(cov));
            }
            if (static_cast<int>(m.covariances.size()) != k)
                throw InputError("covariance count does not match k");
        }
        m.weights = j.at("weights").get<std::vector<double>>();
        if (static_cast<int>(m.weights.size()) != k) throw InputError("weight count mismatch");
    } catch (const json::exception& e) {
        throw ParseError(std::string("model JSON missing fields: ") + e.what());
    }
    snap_to_simplex(m.weights, "weights");
    return m;
}

MogModel load_mog_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return mog_model_from_json(text);
}

bool is_mog_model_file(const std::string& path) {
    const json j = parse_file(path);
    return j.is_object() && j.contains("mode");
}

void save_history(const std::string& path, const TrainHistory& history, bool include_timings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    for (const IterationRecord& rec : history) {
        json j;
        j["iter"] = rec.iter;
        j["mean_ll_test"] = rec.mean_ll_test.has_value() ? json(*rec.mean_ll_test) : json(nullptr);
        j["mean_depth"] = rec.mean_depth;
        j["v"] = rec.depth_weights;
        j["seconds"] = include_timings ? rec.seconds : 0.0;
        if (!rec.starved.empty()) j["starved"] = rec.starved;
        if (rec.kept_weights) j["kept_weights"] = true;
        out << j.dump() << "\n";
    }
}

}  // namespace ifsem
