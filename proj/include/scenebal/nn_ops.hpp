#pragma once

#include "scenebal/tensor.hpp"

#include <vector>

namespace scenebal {

enum class Act { LeakyRelu, Relu, Tanh, Sigmoid };

// Spatial extent of a convolution output: floor((in + 2*pad - kernel)/stride) + 1.
int conv_out_extent(int in, int kernel, int stride, int padding);
// Spatial extent of a transposed convolution output: (in - 1)*stride - 2*pad + kernel.
int tconv_out_extent(int in, int kernel, int stride, int padding);

// input (N,C,H,W), weights (OC,IC,KH,KW), bias (OC). Rejects shape mismatches.
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              int stride, int padding);

// Returns grad wrt input; accumulates weight/bias grads when non-null.
Tensor conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                       int stride, int padding, Tensor* grad_weights, Tensor* grad_bias);

// input (N,IC,H,W), weights (IC,OC,KH,KW), bias (OC). Adjoint of conv2d on shapes.
Tensor transposed_conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                         int stride, int padding);

Tensor transposed_conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                                  int stride, int padding, Tensor* grad_weights, Tensor* grad_bias);

Tensor activation(const Tensor& input, Act kind, float slope = 0.2f);

// x = forward input, y = forward output; sigmoid/tanh differentiate through y,
// relu variants through x.
Tensor activation_backward(const Tensor& grad_out, const Tensor& x, const Tensor& y,
                           Act kind, float slope = 0.2f);

// Non-overlapping factor x factor max reduction; extents must divide evenly.
Tensor maxpool(const Tensor& input, int factor);
Tensor maxpool_with_argmax(const Tensor& input, int factor, std::vector<Eigen::Index>* argmax);
Tensor maxpool_backward(const Tensor& grad_out, const std::vector<Eigen::Index>& argmax,
                        const std::vector<int>& input_shape);

// Channel-axis concatenation followed by a row-major flatten per batch item.
// All maps must share batch and spatial extents; result is (N, sum(C)*H*W).
Tensor concat_flatten(const std::vector<Tensor>& maps);

}  // namespace scenebal
