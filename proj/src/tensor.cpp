#include "scenebal/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace scenebal {

namespace {

Eigen::Index checked_count(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 4)
        throw std::invalid_argument("tensor rank must be in [1,4], got " + std::to_string(shape.size()));
    Eigen::Index n = 1;
    for (int e : shape) {
        if (e < 1) throw std::invalid_argument("tensor extent must be >= 1, got " + std::to_string(e));
        n *= e;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data = Eigen::ArrayXf::Zero(checked_count(shape_));
}

Tensor::Tensor(std::vector<int> shape, float fill) : shape_(std::move(shape)) {
    data = Eigen::ArrayXf::Constant(checked_count(shape_), fill);
}

Tensor::Tensor(std::vector<int> shape, std::vector<float> values) : shape_(std::move(shape)) {
    const Eigen::Index n = checked_count(shape_);
    if (n != static_cast<Eigen::Index>(values.size()))
        throw std::invalid_argument("tensor data length " + std::to_string(values.size()) +
                                    " does not match shape product " + std::to_string(n));
    data = Eigen::Map<const Eigen::ArrayXf>(values.data(), n);
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
    const Eigen::Index n = checked_count(shape);
    if (n != data.size())
        throw std::invalid_argument("reshape to incompatible element count");
    Tensor out;
    out.shape_ = std::move(shape);
    out.data = data;
    return out;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
    os << ')';
    return os.str();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace scenebal
