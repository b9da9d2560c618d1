#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace actclust {

// Dense float32 array, row-major. Most operations work on rank-2 tensors
// (batch x features); higher ranks only appear transiently before flattening.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;

    // Zero-filled (or constant-filled) tensor of the given shape.
    explicit Tensor(std::vector<int> shape_, float fill = 0.0f);

    // Takes ownership of values; length must equal the shape product.
    static Tensor from(std::vector<int> shape_, std::vector<float> values);

    std::size_t size() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }

    // Rank-2 accessors.
    int rows() const;
    int cols() const;
    float* row(int i) { return data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()); }
    const float* row(int i) const {
        return data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols());
    }
    float& at(int i, int j) { return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(j)]; }
    float at(int i, int j) const {
        return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(j)];
    }

    bool all_finite() const;
};

std::size_t shape_product(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// Gather the given rows of a rank-2 tensor, in the given order.
Tensor gather_rows(const Tensor& t, const std::vector<int>& indices);

// Throws ShapeError naming both shapes unless they are equal.
void require_shape(const Tensor& t, const std::vector<int>& expected, const char* what);

}  // namespace actclust
