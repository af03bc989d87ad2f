#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace scenebal {

// Dense n-dimensional float32 array, row-major, rank <= 4.
// Images and feature maps use the (batch, channels, height, width) layout.
class Tensor {
public:
    Eigen::ArrayXf data;

    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, float fill);
    Tensor(std::vector<int> shape, std::vector<float> values);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, float v) { return Tensor(std::move(shape), v); }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    Eigen::Index size() const { return data.size(); }
    bool empty() const { return data.size() == 0; }

    // Rank-4 indexing; lower-rank tensors index with leading arguments zero-padded
    // by the caller (a (c,h,w) tensor uses operator()(c,h,w)).
    float& operator()(int n, int c, int h, int w) {
        return data[((static_cast<Eigen::Index>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    float operator()(int n, int c, int h, int w) const {
        return data[((static_cast<Eigen::Index>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    float& operator()(int c, int h, int w) {
        return data[(static_cast<Eigen::Index>(c) * shape_[1] + h) * shape_[2] + w];
    }
    float operator()(int c, int h, int w) const {
        return data[(static_cast<Eigen::Index>(c) * shape_[1] + h) * shape_[2] + w];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const { return data.isFinite().all(); }

    // Reinterprets the buffer under a new shape of identical element count.
    Tensor reshaped(std::vector<int> shape) const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
};

// Throws std::invalid_argument with both shapes when they differ.
void check_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace scenebal
