#include "scenebal/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace scenebal {

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
    if (config_.learning_rate <= 0.0f) throw std::invalid_argument("optimizer: learning rate must be positive");
    if (config_.momentum < 0.0f || config_.momentum >= 1.0f)
        throw std::invalid_argument("optimizer: momentum/beta1 must be in [0,1)");
    if (config_.kind == OptKind::Adam && (config_.beta2 < 0.0f || config_.beta2 >= 1.0f))
        throw std::invalid_argument("optimizer: beta2 must be in [0,1)");
    if (config_.weight_decay < 0.0f) throw std::invalid_argument("optimizer: weight decay must be nonnegative");
}

void Optimizer::update_tensor(Tensor& value, const Tensor& grad, Tensor& m, Tensor& v) {
    Eigen::ArrayXf g = grad.data;
    if (config_.weight_decay > 0.0f) g += config_.weight_decay * value.data;

    if (config_.kind == OptKind::SgdMomentum) {
        if (config_.momentum > 0.0f) {
            m.data = config_.momentum * m.data + g;
            value.data -= config_.learning_rate * m.data;
        } else {
            value.data -= config_.learning_rate * g;
        }
    } else {
        const float b1 = config_.momentum, b2 = config_.beta2;
        m.data = b1 * m.data + (1.0f - b1) * g;
        v.data = b2 * v.data + (1.0f - b2) * g.square();
        const double t = static_cast<double>(step_count_);
        const float bc1 = static_cast<float>(1.0 - std::pow(static_cast<double>(b1), t));
        const float bc2 = static_cast<float>(1.0 - std::pow(static_cast<double>(b2), t));
        value.data -= config_.learning_rate * (m.data / bc1) / ((v.data / bc2).sqrt() + config_.eps);
    }
}

void Optimizer::step(const std::vector<LayerParams*>& params) {
    for (LayerParams* p : params) {
        if (!p->weight_grads.all_finite() || !p->bias_grads.all_finite())
            throw std::runtime_error("optimizer: non-finite gradient in parameter '" + p->name + "'");
    }
    ++step_count_;
    for (LayerParams* p : params) {
        Moments& mom = moments_[p];
        if (mom.m_w.empty()) {
            mom.m_w = Tensor(p->weights.shape());
            mom.v_w = Tensor(p->weights.shape());
            mom.m_b = Tensor(p->biases.shape());
            mom.v_b = Tensor(p->biases.shape());
        }
        update_tensor(p->weights, p->weight_grads, mom.m_w, mom.v_w);
        update_tensor(p->biases, p->bias_grads, mom.m_b, mom.v_b);
    }
}

}  // namespace scenebal
