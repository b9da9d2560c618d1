#include "actclust/tensor.hpp"

#include <cmath>
#include <sstream>

#include "actclust/errors.hpp"

namespace actclust {

std::size_t shape_product(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (const int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) os << ", ";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

static void check_dims_positive(const std::vector<int>& shape) {
    for (const int d : shape) {
        if (d <= 0) throw ShapeError("tensor dims must be positive, got " + shape_str(shape));
    }
}

Tensor::Tensor(std::vector<int> shape_, float fill) : shape(std::move(shape_)) {
    check_dims_positive(shape);
    data.assign(shape_product(shape), fill);
}

Tensor Tensor::from(std::vector<int> shape_, std::vector<float> values) {
    check_dims_positive(shape_);
    if (values.size() != shape_product(shape_)) {
        throw ShapeError("data length " + std::to_string(values.size()) + " does not match shape " +
                         shape_str(shape_));
    }
    Tensor t;
    t.shape = std::move(shape_);
    t.data = std::move(values);
    return t;
}

int Tensor::rows() const {
    if (rank() != 2) throw ShapeError("expected rank-2 tensor, got shape " + shape_str(shape));
    return shape[0];
}

int Tensor::cols() const {
    if (rank() != 2) throw ShapeError("expected rank-2 tensor, got shape " + shape_str(shape));
    return shape[1];
}

bool Tensor::all_finite() const {
    for (const float v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor gather_rows(const Tensor& t, const std::vector<int>& indices) {
    const int c = t.cols();
    Tensor out({static_cast<int>(indices.size()), c});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int src = indices[i];
        if (src < 0 || src >= t.rows()) {
            throw IndexError("row index " + std::to_string(src) + " out of range [0, " +
                             std::to_string(t.rows()) + ")");
        }
        const float* from = t.row(src);
        float* to = out.row(static_cast<int>(i));
        for (int j = 0; j < c; ++j) to[j] = from[j];
    }
    return out;
}

void require_shape(const Tensor& t, const std::vector<int>& expected, const char* what) {
    if (t.shape != expected) {
        throw ShapeError(std::string(what) + ": expected shape " + shape_str(expected) + ", got " +
                         shape_str(t.shape));
    }
}

}  // namespace actclust
