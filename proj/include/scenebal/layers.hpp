#pragma once

#include "scenebal/nn_ops.hpp"
#include "scenebal/rng.hpp"
#include "scenebal/tensor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace scenebal {

// Parameter pair plus gradient buffers; grads always shape-match their tensors.
struct LayerParams {
    std::string name;
    Tensor weights;
    Tensor biases;
    Tensor weight_grads;
    Tensor bias_grads;

    void init_grads() {
        weight_grads = Tensor(weights.shape());
        bias_grads = Tensor(biases.shape());
    }
    void zero_grads() {
        weight_grads.data.setZero();
        bias_grads.data.setZero();
    }
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x) = 0;
    // Consumes the state cached by the last forward; grads accumulate into params.
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<LayerParams*> params() { return {}; }
    virtual void set_training(bool) {}
    virtual std::string describe() const = 0;
};

class Conv2d : public Layer {
public:
    Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int padding);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<LayerParams*> params() override { return {&p}; }
    std::string describe() const override;

    void init_weights(Rng& rng, float stddev);

    LayerParams p;
    int kernel, stride, padding;

private:
    Tensor cached_input_;
};

class TransposedConv2d : public Layer {
public:
    TransposedConv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int padding);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<LayerParams*> params() override { return {&p}; }
    std::string describe() const override;

    void init_weights(Rng& rng, float stddev);

    LayerParams p;
    int kernel, stride, padding;

private:
    Tensor cached_input_;
};

class Activation : public Layer {
public:
    explicit Activation(Act kind, float slope = 0.2f) : kind(kind), slope(slope) {}

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string describe() const override;

    Act kind;
    float slope;

private:
    Tensor cached_input_;
    Tensor cached_output_;
};

// Per-channel normalization over (batch, height, width); gamma/beta live in
// the weights/biases slots so the optimizer sees them like any other pair.
class BatchNorm2d : public Layer {
public:
    BatchNorm2d(std::string name, int channels, float eps = 1e-5f, float momentum = 0.1f);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<LayerParams*> params() override { return {&p}; }
    void set_training(bool t) override { training_ = t; }
    std::string describe() const override;

    LayerParams p;
    Tensor running_mean;
    Tensor running_var;
    float eps, momentum;

private:
    bool training_ = true;
    Tensor cached_xhat_;
    std::vector<float> cached_ivstd_;
};

class MaxPool2d : public Layer {
public:
    explicit MaxPool2d(int factor) : factor(factor) {}

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string describe() const override;

    int factor;

private:
    std::vector<Eigen::Index> argmax_;
    std::vector<int> input_shape_;
};

class Sequential {
public:
    Sequential() = default;
    Sequential(Sequential&&) = default;
    Sequential& operator=(Sequential&&) = default;

    Layer& add(std::unique_ptr<Layer> layer) {
        layers_.push_back(std::move(layer));
        return *layers_.back();
    }

    Tensor forward(const Tensor& x);
    // Also captures the outputs of the given layer indices (post-activation taps).
    Tensor forward_with_taps(const Tensor& x, const std::vector<int>& tap_indices,
                             std::vector<Tensor>* taps);
    Tensor backward(const Tensor& grad_out);

    std::vector<LayerParams*> params();
    void zero_grads();
    void set_training(bool t);

    size_t size() const { return layers_.size(); }
    Layer& layer(size_t i) { return *layers_[i]; }
    const Layer& layer(size_t i) const { return *layers_[i]; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Checksum over all parameter bytes; bit-identical params give equal sums.
uint64_t params_checksum(const std::vector<LayerParams*>& params);

}  // namespace scenebal
