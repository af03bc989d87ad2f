#pragma once

#include "scenebal/layers.hpp"

#include <functional>

namespace scenebal {

// Scalar loss over a network output, with its analytic derivative. Losses are
// evaluated in double to keep the finite-difference quotient clean.
struct ScalarLoss {
    std::function<double(const Tensor&)> value;
    std::function<Tensor(const Tensor&)> grad;

    // 0.5 * sum(y^2); grad y.
    static ScalarLoss squared_sum();
    // sum(y).
    static ScalarLoss plain_sum();
};

// Central-difference check of every parameter gradient against backprop.
// Returns max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// Rejects networks with >= 10^4 parameters and non-finite losses.
double gradient_check(Sequential& net, const Tensor& input, const ScalarLoss& loss, double epsilon);

}  // namespace scenebal
