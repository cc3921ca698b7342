#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmdqn {

// Dense row-major float32 tensor.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {}

    static Tensor zeros(std::vector<int> s) {
        int64_t n = 1;
        for (int dim : s) n *= dim;
        Tensor t;
        t.shape = std::move(s);
        t.data.assign(static_cast<size_t>(n), 0.0f);
        return t;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    float* ptr() { return data.data(); }
    const float* ptr() const { return data.data(); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
};

std::string shape_string(const Tensor& t);

// Throws std::runtime_error naming `where` when any value is NaN/Inf.
void check_finite(const Tensor& t, const std::string& where);

}  // namespace mmdqn
