#pragma once

#include "scenebal/layers.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace scenebal {

enum class OptKind { SgdMomentum, Adam };

struct OptimizerConfig {
    OptKind kind = OptKind::SgdMomentum;
    float learning_rate = 0.01f;
    float momentum = 0.0f;  // beta1 for adam
    float beta2 = 0.999f;
    float weight_decay = 0.0f;
    float eps = 1e-8f;

    static OptimizerConfig sgd(float lr, float momentum = 0.0f, float weight_decay = 0.0f) {
        return {OptKind::SgdMomentum, lr, momentum, 0.999f, weight_decay, 1e-8f};
    }
    static OptimizerConfig adam(float lr, float beta1 = 0.9f, float beta2 = 0.999f,
                                float weight_decay = 0.0f) {
        return {OptKind::Adam, lr, beta1, beta2, weight_decay, 1e-8f};
    }
};

// Holds per-parameter moment buffers keyed by the LayerParams instance.
// Parameters update in place; gradients are left untouched for the caller to zero.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config);

    // One update over the parameter set; throws on non-finite gradients,
    // naming the offending parameter. step_count advances by exactly 1.
    void step(const std::vector<LayerParams*>& params);

    int64_t step_count() const { return step_count_; }
    const OptimizerConfig& config() const { return config_; }

private:
    struct Moments {
        Tensor m_w, v_w, m_b, v_b;
    };
    void update_tensor(Tensor& value, const Tensor& grad, Tensor& m, Tensor& v);

    OptimizerConfig config_;
    int64_t step_count_ = 0;
    std::unordered_map<LayerParams*, Moments> moments_;
};

}  // namespace scenebal
