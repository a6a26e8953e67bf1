#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "semsteg/errors.hpp"

namespace semsteg {

// Dense row-major tensor of doubles. Value type, cheap to copy at desk scale.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::int64_t>(data.size()) != count(shape))
            throw ShapeError("data length does not match shape");
    }

    static std::int64_t count(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d <= 0) throw ShapeError("dimension must be positive");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) {
        auto n = count(s);
        return Tensor(std::move(s), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    }

    static Tensor full(std::vector<int> s, double v) {
        auto n = count(s);
        return Tensor(std::move(s), std::vector<double>(static_cast<std::size_t>(n), v));
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    double mean_square() const {
        double s = 0.0;
        for (double v : data) s += v * v;
        return data.empty() ? 0.0 : s / static_cast<double>(data.size());
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

inline void require_shape(const Tensor& t, const std::vector<int>& s, const char* what) {
    if (t.shape != s)
        throw ShapeError(std::string(what) + ": expected " + shape_str(s) + ", got " + shape_str(t.shape));
}

}  // namespace semsteg
