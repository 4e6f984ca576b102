#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "gqa/error.hpp"

namespace gqa {

inline std::string shape_string(const std::vector<size_t>& shape) {
    std::string s = "{";
    for (size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "}";
}

// Dense row-major tensor; rank 1 and 2 are the only ranks the ops use.
template <typename T>
struct Tensor {
    std::vector<size_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
        data.assign(count(shape), T(0));
    }
    Tensor(std::vector<size_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape))
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_string(shape));
    }

    static size_t count(const std::vector<size_t>& s) {
        return std::accumulate(s.begin(), s.end(), size_t(1), std::multiplies<>());
    }

    size_t size() const { return data.size(); }
    size_t rank() const { return shape.size(); }
    size_t rows() const { return shape.at(0); }
    size_t cols() const { return shape.at(1); }

    T& operator[](size_t i) { return data[i]; }
    const T& operator[](size_t i) const { return data[i]; }
    T& at(size_t i, size_t j) { return data[i * shape[1] + j]; }
    const T& at(size_t i, size_t j) const { return data[i * shape[1] + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (const T& v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.reserve(data.size());
        for (const T& v : data) out.data.push_back(static_cast<U>(v));
        return out;
    }
};

}  // namespace gqa
