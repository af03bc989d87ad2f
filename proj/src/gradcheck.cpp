#include "scenebal/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace scenebal {

ScalarLoss ScalarLoss::squared_sum() {
    ScalarLoss l;
    l.value = [](const Tensor& y) {
        return 0.5 * y.data.cast<double>().square().sum();
    };
    l.grad = [](const Tensor& y) { return y; };
    return l;
}

ScalarLoss ScalarLoss::plain_sum() {
    ScalarLoss l;
    l.value = [](const Tensor& y) { return y.data.cast<double>().sum(); };
    l.grad = [](const Tensor& y) { return Tensor(y.shape(), 1.0f); };
    return l;
}

double gradient_check(Sequential& net, const Tensor& input, const ScalarLoss& loss, double epsilon) {
    const auto params = net.params();
    Eigen::Index total = 0;
    for (const LayerParams* p : params) total += p->weights.size() + p->biases.size();
    if (total >= 10000)
        throw std::invalid_argument("gradient_check: too many parameters (" + std::to_string(total) + ")");

    Tensor y = net.forward(input);
    const double base = loss.value(y);
    if (!std::isfinite(base)) throw std::runtime_error("gradient_check: non-finite loss");

    net.zero_grads();
    net.backward(loss.grad(y));

    double max_rel = 0.0;
    auto probe = [&](Tensor& value, const Tensor& analytic_grad) {
        for (Eigen::Index i = 0; i < value.size(); ++i) {
            const float saved = value.data[i];
            value.data[i] = saved + static_cast<float>(epsilon);
            const double lp = loss.value(net.forward(input));
            value.data[i] = saved - static_cast<float>(epsilon);
            const double lm = loss.value(net.forward(input));
            value.data[i] = saved;
            if (!std::isfinite(lp) || !std::isfinite(lm))
                throw std::runtime_error("gradient_check: non-finite loss during perturbation");
            const double numeric = (lp - lm) / (2.0 * epsilon);
            const double analytic = static_cast<double>(analytic_grad.data[i]);
            const double rel = std::abs(analytic - numeric) /
                               std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            if (rel > max_rel) max_rel = rel;
        }
    };
    for (LayerParams* p : params) {
        probe(p->weights, p->weight_grads);
        probe(p->biases, p->bias_grads);
    }
    // Restore caches to the unperturbed state.
    net.forward(input);
    return max_rel;
}

}  // namespace scenebal
