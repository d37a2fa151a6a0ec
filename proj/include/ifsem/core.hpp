// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifsem {

// Bad caller input: dimension mismatches, unknown names, invalid files.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed data while reading a file; message carries the line number.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested code table would exceed the configured size limit.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dense N x H matrix of points, one point per row, row-major storage.
struct PointMatrix {
    int dim = 0;
    std::vector<double> values;

    PointMatrix() = default;
    explicit PointMatrix(int h) : dim(h) {}
    PointMatrix(int h, std::size_t n) : dim(h), values(n * h, 0.0) {}

    std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
    bool empty() const { return values.empty(); }

    std::span<double> row(std::size_t i) { return {values.data() + i * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * dim, static_cast<std::size_t>(dim)};
    }

    void push_back(std::span<const double> p) {
        if (static_cast<int>(p.size()) != dim) throw InputError("point dimension mismatch");
        values.insert(values.end(), p.begin(), p.end());
    }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

inline double squared_norm(std::span<const double> a) {
    double d = 0.0;
    for (double x : a) d += x * x;
    return d;
}

}  // namespace ifsem
