#include "scenebal/layers.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace scenebal {

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int padding)
    : kernel(kernel), stride(stride), padding(padding) {
    p.name = std::move(name);
    p.weights = Tensor({out_ch, in_ch, kernel, kernel});
    p.biases = Tensor({out_ch});
    p.init_grads();
}

void Conv2d::init_weights(Rng& rng, float stddev) {
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights.data[i] = rng.normal(0.0f, stddev);
    p.biases.data.setZero();
}

Tensor Conv2d::forward(const Tensor& x) {
    cached_input_ = x;
    return conv2d(x, p.weights, p.biases, stride, padding);
}

Tensor Conv2d::backward(const Tensor& grad_out) {
    return conv2d_backward(cached_input_, p.weights, grad_out, stride, padding,
                           &p.weight_grads, &p.bias_grads);
}

std::string Conv2d::describe() const {
    std::ostringstream os;
    os << "conv " << p.weights.dim(1) << "->" << p.weights.dim(0) << " k" << kernel
       << " s" << stride << " p" << padding;
    return os.str();
}

TransposedConv2d::TransposedConv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int padding)
    : kernel(kernel), stride(stride), padding(padding) {
    p.name = std::move(name);
    p.weights = Tensor({in_ch, out_ch, kernel, kernel});
    p.biases = Tensor({out_ch});
    p.init_grads();
}

void TransposedConv2d::init_weights(Rng& rng, float stddev) {
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights.data[i] = rng.normal(0.0f, stddev);
    p.biases.data.setZero();
}

Tensor TransposedConv2d::forward(const Tensor& x) {
    cached_input_ = x;
    return transposed_conv2d(x, p.weights, p.biases, stride, padding);
}

Tensor TransposedConv2d::backward(const Tensor& grad_out) {
    return transposed_conv2d_backward(cached_input_, p.weights, grad_out, stride, padding,
                                      &p.weight_grads, &p.bias_grads);
}

std::string TransposedConv2d::describe() const {
    std::ostringstream os;
    os << "tconv " << p.weights.dim(0) << "->" << p.weights.dim(1) << " k" << kernel
       << " s" << stride << " p" << padding;
    return os.str();
}

Tensor Activation::forward(const Tensor& x) {
    cached_input_ = x;
    cached_output_ = activation(x, kind, slope);
    return cached_output_;
}

Tensor Activation::backward(const Tensor& grad_out) {
    return activation_backward(grad_out, cached_input_, cached_output_, kind, slope);
}

std::string Activation::describe() const {
    switch (kind) {
        case Act::LeakyRelu: return "leaky-relu";
        case Act::Relu: return "relu";
        case Act::Tanh: return "tanh";
        case Act::Sigmoid: return "sigmoid";
    }
    return "?";
}

BatchNorm2d::BatchNorm2d(std::string name, int channels, float eps, float momentum)
    : eps(eps), momentum(momentum) {
    p.name = std::move(name);
    p.weights = Tensor({channels}, 1.0f);
    p.biases = Tensor({channels});
    p.init_grads();
    running_mean = Tensor({channels});
    running_var = Tensor({channels}, 1.0f);
}

Tensor BatchNorm2d::forward(const Tensor& x) {
    if (x.rank() != 4 || x.dim(1) != p.weights.dim(0))
        throw std::invalid_argument("batchnorm: expected (N," + std::to_string(p.weights.dim(0)) +
                                    ",H,W), got " + x.shape_str());
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const Eigen::Index plane = static_cast<Eigen::Index>(h) * w;
    const Eigen::Index m = static_cast<Eigen::Index>(n) * plane;

    Tensor y(x.shape());
    cached_xhat_ = Tensor(x.shape());
    cached_ivstd_.assign(static_cast<size_t>(c), 0.0f);

    for (int ch = 0; ch < c; ++ch) {
        double mean, var;
        if (training_) {
            double sum = 0.0, sq = 0.0;
            for (int b = 0; b < n; ++b) {
                Eigen::Map<const Eigen::ArrayXf> sl(
                    x.data.data() + ((static_cast<Eigen::Index>(b) * c + ch) * plane), plane);
                sum += sl.cast<double>().sum();
                sq += sl.cast<double>().square().sum();
            }
            mean = sum / static_cast<double>(m);
            var = sq / static_cast<double>(m) - mean * mean;
            if (var < 0.0) var = 0.0;
            running_mean.data[ch] = (1.0f - momentum) * running_mean.data[ch] + momentum * static_cast<float>(mean);
            running_var.data[ch] = (1.0f - momentum) * running_var.data[ch] + momentum * static_cast<float>(var);
        } else {
            mean = running_mean.data[ch];
            var = running_var.data[ch];
        }
        const float ivstd = 1.0f / std::sqrt(static_cast<float>(var) + eps);
        cached_ivstd_[static_cast<size_t>(ch)] = ivstd;
        const float gamma = p.weights.data[ch], beta = p.biases.data[ch];
        for (int b = 0; b < n; ++b) {
            const Eigen::Index off = (static_cast<Eigen::Index>(b) * c + ch) * plane;
            Eigen::Map<const Eigen::ArrayXf> sl(x.data.data() + off, plane);
            Eigen::Map<Eigen::ArrayXf> xh(cached_xhat_.data.data() + off, plane);
            Eigen::Map<Eigen::ArrayXf> ys(y.data.data() + off, plane);
            xh = (sl - static_cast<float>(mean)) * ivstd;
            ys = gamma * xh + beta;
        }
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
    const int n = grad_out.dim(0), c = grad_out.dim(1);
    const Eigen::Index plane = static_cast<Eigen::Index>(grad_out.dim(2)) * grad_out.dim(3);
    const Eigen::Index m = static_cast<Eigen::Index>(n) * plane;
    Tensor dx(grad_out.shape());

    for (int ch = 0; ch < c; ++ch) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int b = 0; b < n; ++b) {
            const Eigen::Index off = (static_cast<Eigen::Index>(b) * c + ch) * plane;
            Eigen::Map<const Eigen::ArrayXf> dy(grad_out.data.data() + off, plane);
            Eigen::Map<const Eigen::ArrayXf> xh(cached_xhat_.data.data() + off, plane);
            sum_dy += dy.cast<double>().sum();
            sum_dy_xhat += (dy * xh).cast<double>().sum();
        }
        p.bias_grads.data[ch] += static_cast<float>(sum_dy);
        p.weight_grads.data[ch] += static_cast<float>(sum_dy_xhat);

        const float gamma = p.weights.data[ch];
        const float ivstd = cached_ivstd_[static_cast<size_t>(ch)];
        if (training_) {
            const float inv_m = 1.0f / static_cast<float>(m);
            const float a = static_cast<float>(sum_dy) * inv_m;
            const float bcoef = static_cast<float>(sum_dy_xhat) * inv_m;
            for (int b = 0; b < n; ++b) {
                const Eigen::Index off = (static_cast<Eigen::Index>(b) * c + ch) * plane;
                Eigen::Map<const Eigen::ArrayXf> dy(grad_out.data.data() + off, plane);
                Eigen::Map<const Eigen::ArrayXf> xh(cached_xhat_.data.data() + off, plane);
                Eigen::Map<Eigen::ArrayXf> dxs(dx.data.data() + off, plane);
                dxs = gamma * ivstd * (dy - a - xh * bcoef);
            }
        } else {
            for (int b = 0; b < n; ++b) {
                const Eigen::Index off = (static_cast<Eigen::Index>(b) * c + ch) * plane;
                Eigen::Map<const Eigen::ArrayXf> dy(grad_out.data.data() + off, plane);
                Eigen::Map<Eigen::ArrayXf> dxs(dx.data.data() + off, plane);
                dxs = gamma * ivstd * dy;
            }
        }
    }
    return dx;
}

std::string BatchNorm2d::describe() const {
    return "batchnorm c" + std::to_string(p.weights.dim(0));
}

Tensor MaxPool2d::forward(const Tensor& x) {
    input_shape_ = x.shape();
    return maxpool_with_argmax(x, factor, &argmax_);
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
    return maxpool_backward(grad_out, argmax_, input_shape_);
}

std::string MaxPool2d::describe() const { return "maxpool x" + std::to_string(factor); }

Tensor Sequential::forward(const Tensor& x) {
    Tensor cur = x;
    for (auto& l : layers_) cur = l->forward(cur);
    return cur;
}

Tensor Sequential::forward_with_taps(const Tensor& x, const std::vector<int>& tap_indices,
                                     std::vector<Tensor>* taps) {
    Tensor cur = x;
    if (taps) taps->clear();
    for (size_t i = 0; i < layers_.size(); ++i) {
        cur = layers_[i]->forward(cur);
        if (taps) {
            for (int t : tap_indices)
                if (static_cast<size_t>(t) == i) taps->push_back(cur);
        }
    }
    return cur;
}

Tensor Sequential::backward(const Tensor& grad_out) {
    Tensor cur = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
}

std::vector<LayerParams*> Sequential::params() {
    std::vector<LayerParams*> out;
    for (auto& l : layers_)
        for (LayerParams* p : l->params()) out.push_back(p);
    return out;
}

void Sequential::zero_grads() {
    for (LayerParams* p : params()) p->zero_grads();
}

void Sequential::set_training(bool t) {
    for (auto& l : layers_) l->set_training(t);
}

uint64_t params_checksum(const std::vector<LayerParams*>& params) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const Tensor& t) {
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            uint32_t bits;
            std::memcpy(&bits, &t.data[i], sizeof(bits));
            h ^= bits;
            h *= 1099511628211ull;
        }
    };
    for (const LayerParams* p : params) {
        mix(p->weights);
        mix(p->biases);
    }
    return h;
}

}  // namespace scenebal
