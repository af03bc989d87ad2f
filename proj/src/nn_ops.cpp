#include "scenebal/nn_ops.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace scenebal {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using MapRowConst = Eigen::Map<const RowMat>;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_conv_args(const Tensor& input, const Tensor& weights, const Tensor& bias,
                     int stride, int padding, bool transposed) {
    require(input.rank() == 4, "conv: input must be rank 4, got " + input.shape_str());
    require(weights.rank() == 4, "conv: weights must be rank 4, got " + weights.shape_str());
    require(stride >= 1, "conv: stride must be positive");
    require(padding >= 0, "conv: padding must be nonnegative");
    const int in_ch = transposed ? weights.dim(0) : weights.dim(1);
    const int out_ch = transposed ? weights.dim(1) : weights.dim(0);
    require(input.dim(1) == in_ch,
            "conv: input channels " + std::to_string(input.dim(1)) + " do not match kernel input channels " +
                std::to_string(in_ch) + " for weights " + weights.shape_str());
    require(bias.rank() == 1 && bias.dim(0) == out_ch,
            "conv: bias shape " + bias.shape_str() + " does not match " + std::to_string(out_ch) + " output channels");
}

// Gathers padded input patches of one batch item into a (C*KH*KW) x (OH*OW) matrix.
void im2col(const Tensor& x, int n, int kh, int kw, int stride, int pad,
            int oh, int ow, Eigen::MatrixXf& cols) {
    const int c = x.dim(1), h = x.dim(2), w = x.dim(3);
    cols.setZero();
    for (int ic = 0; ic < c; ++ic) {
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                const int row = (ic * kh + ki) * kw + kj;
                for (int i = 0; i < oh; ++i) {
                    const int hi = i * stride - pad + ki;
                    if (hi < 0 || hi >= h) continue;
                    for (int j = 0; j < ow; ++j) {
                        const int wj = j * stride - pad + kj;
                        if (wj < 0 || wj >= w) continue;
                        cols(row, i * ow + j) = x(n, ic, hi, wj);
                    }
                }
            }
        }
    }
}

// Scatter-add of im2col's adjoint: accumulates patch columns back into x[n].
void col2im_add(const Eigen::MatrixXf& cols, Tensor& x, int n, int kh, int kw,
                int stride, int pad, int oh, int ow) {
    const int c = x.dim(1), h = x.dim(2), w = x.dim(3);
    for (int ic = 0; ic < c; ++ic) {
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                const int row = (ic * kh + ki) * kw + kj;
                for (int i = 0; i < oh; ++i) {
                    const int hi = i * stride - pad + ki;
                    if (hi < 0 || hi >= h) continue;
                    for (int j = 0; j < ow; ++j) {
                        const int wj = j * stride - pad + kj;
                        if (wj < 0 || wj >= w) continue;
                        x(n, ic, hi, wj) += cols(row, i * ow + j);
                    }
                }
            }
        }
    }
}

}  // namespace

int conv_out_extent(int in, int kernel, int stride, int padding) {
    const int padded = in + 2 * padding;
    require(padded >= kernel, "conv: kernel " + std::to_string(kernel) + " does not fit padded extent " +
                                  std::to_string(padded));
    return (padded - kernel) / stride + 1;
}

int tconv_out_extent(int in, int kernel, int stride, int padding) {
    const int out = (in - 1) * stride - 2 * padding + kernel;
    require(out >= 1, "tconv: nonpositive output extent " + std::to_string(out));
    return out;
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              int stride, int padding) {
    check_conv_args(input, weights, bias, stride, padding, false);
    const int n = input.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    const int oc = weights.dim(0), ic = weights.dim(1);
    const int oh = conv_out_extent(input.dim(2), kh, stride, padding);
    const int ow = conv_out_extent(input.dim(3), kw, stride, padding);
    const int k = ic * kh * kw, l = oh * ow;

    Tensor out({n, oc, oh, ow});
    MapRowConst wmat(weights.data.data(), oc, k);
    Eigen::MatrixXf cols(k, l);
    for (int b = 0; b < n; ++b) {
        im2col(input, b, kh, kw, stride, padding, oh, ow, cols);
        MapRow omat(out.data.data() + static_cast<Eigen::Index>(b) * oc * l, oc, l);
        omat.noalias() = wmat * cols;
        omat.colwise() += Eigen::Map<const Eigen::VectorXf>(bias.data.data(), oc);
    }
    return out;
}

Tensor conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                       int stride, int padding, Tensor* grad_weights, Tensor* grad_bias) {
    require(input.rank() == 4 && weights.rank() == 4, "conv backward: rank-4 input and weights required");
    require(input.dim(1) == weights.dim(1), "conv backward: channel mismatch");
    const int n = input.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    const int oc = weights.dim(0), ic = weights.dim(1);
    const int oh = conv_out_extent(input.dim(2), kh, stride, padding);
    const int ow = conv_out_extent(input.dim(3), kw, stride, padding);
    require(grad_out.shape() == std::vector<int>({n, oc, oh, ow}),
            "conv backward: grad shape " + grad_out.shape_str() + " does not match output");
    const int k = ic * kh * kw, l = oh * ow;

    Tensor dx(input.shape());
    MapRowConst wmat(weights.data.data(), oc, k);
    Eigen::MatrixXf cols(k, l);
    Eigen::MatrixXf dcols(k, l);
    for (int b = 0; b < n; ++b) {
        MapRowConst gmat(grad_out.data.data() + static_cast<Eigen::Index>(b) * oc * l, oc, l);
        dcols.noalias() = wmat.transpose() * gmat;
        col2im_add(dcols, dx, b, kh, kw, stride, padding, oh, ow);
        if (grad_weights) {
            im2col(input, b, kh, kw, stride, padding, oh, ow, cols);
            MapRow gw(grad_weights->data.data(), oc, k);
            gw.noalias() += gmat * cols.transpose();
        }
        if (grad_bias) {
            Eigen::Map<Eigen::VectorXf> gb(grad_bias->data.data(), oc);
            gb.noalias() += gmat.rowwise().sum();
        }
    }
    return dx;
}

Tensor transposed_conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                         int stride, int padding) {
    check_conv_args(input, weights, bias, stride, padding, true);
    const int n = input.dim(0), ic = weights.dim(0), oc = weights.dim(1);
    const int kh = weights.dim(2), kw = weights.dim(3);
    const int ih = input.dim(2), iw = input.dim(3);
    const int oh = tconv_out_extent(ih, kh, stride, padding);
    const int ow = tconv_out_extent(iw, kw, stride, padding);
    const int k = oc * kh * kw, l = ih * iw;

    // The input plays the role of a conv output over the (to be built) result,
    // so the forward pass is one GEMM followed by the col2im scatter.
    Tensor out({n, oc, oh, ow});
    MapRowConst wmat(weights.data.data(), ic, k);
    Eigen::MatrixXf cols(k, l);
    for (int b = 0; b < n; ++b) {
        MapRowConst xmat(input.data.data() + static_cast<Eigen::Index>(b) * ic * l, ic, l);
        cols.noalias() = wmat.transpose() * xmat;
        col2im_add(cols, out, b, kh, kw, stride, padding, ih, iw);
        for (int c = 0; c < oc; ++c) {
            Eigen::Map<Eigen::ArrayXf> ch(out.data.data() + ((static_cast<Eigen::Index>(b) * oc + c) * oh * ow),
                                          static_cast<Eigen::Index>(oh) * ow);
            ch += bias.data[c];
        }
    }
    return out;
}

Tensor transposed_conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                                  int stride, int padding, Tensor* grad_weights, Tensor* grad_bias) {
    const int n = input.dim(0), ic = weights.dim(0), oc = weights.dim(1);
    const int kh = weights.dim(2), kw = weights.dim(3);
    const int ih = input.dim(2), iw = input.dim(3);
    const int oh = tconv_out_extent(ih, kh, stride, padding);
    const int ow = tconv_out_extent(iw, kw, stride, padding);
    require(grad_out.shape() == std::vector<int>({n, oc, oh, ow}),
            "tconv backward: grad shape " + grad_out.shape_str() + " does not match output");
    const int k = oc * kh * kw, l = ih * iw;

    Tensor dx(input.shape());
    MapRowConst wmat(weights.data.data(), ic, k);
    Eigen::MatrixXf gcols(k, l);
    for (int b = 0; b < n; ++b) {
        im2col(grad_out, b, kh, kw, stride, padding, ih, iw, gcols);
        MapRow dxmat(dx.data.data() + static_cast<Eigen::Index>(b) * ic * l, ic, l);
        dxmat.noalias() = wmat * gcols;
        if (grad_weights) {
            MapRowConst xmat(input.data.data() + static_cast<Eigen::Index>(b) * ic * l, ic, l);
            MapRow gw(grad_weights->data.data(), ic, k);
            gw.noalias() += xmat * gcols.transpose();
        }
        if (grad_bias) {
            for (int c = 0; c < oc; ++c) {
                Eigen::Map<const Eigen::ArrayXf> ch(
                    grad_out.data.data() + ((static_cast<Eigen::Index>(b) * oc + c) * oh * ow),
                    static_cast<Eigen::Index>(oh) * ow);
                grad_bias->data[c] += ch.sum();
            }
        }
    }
    return dx;
}

Tensor activation(const Tensor& input, Act kind, float slope) {
    Tensor out = input;
    switch (kind) {
        case Act::LeakyRelu:
            out.data = (input.data >= 0.0f).select(input.data, slope * input.data);
            break;
        case Act::Relu:
            out.data = input.data.max(0.0f);
            break;
        case Act::Tanh:
            out.data = input.data.tanh();
            break;
        case Act::Sigmoid:
            out.data = 1.0f / (1.0f + (-input.data).exp());
            break;
    }
    return out;
}

Tensor activation_backward(const Tensor& grad_out, const Tensor& x, const Tensor& y,
                           Act kind, float slope) {
    Tensor dx = grad_out;
    switch (kind) {
        case Act::LeakyRelu:
            dx.data = (x.data >= 0.0f).select(grad_out.data, slope * grad_out.data);
            break;
        case Act::Relu:
            dx.data = (x.data > 0.0f).select(grad_out.data, 0.0f);
            break;
        case Act::Tanh:
            dx.data = grad_out.data * (1.0f - y.data.square());
            break;
        case Act::Sigmoid:
            dx.data = grad_out.data * y.data * (1.0f - y.data);
            break;
    }
    return dx;
}

Tensor maxpool(const Tensor& input, int factor) {
    return maxpool_with_argmax(input, factor, nullptr);
}

Tensor maxpool_with_argmax(const Tensor& input, int factor, std::vector<Eigen::Index>* argmax) {
    require(input.rank() == 4, "maxpool: input must be rank 4, got " + input.shape_str());
    require(factor >= 1, "maxpool: factor must be positive");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    require(h % factor == 0 && w % factor == 0,
            "maxpool: extents " + input.shape_str() + " not divisible by factor " + std::to_string(factor));
    const int oh = h / factor, ow = w / factor;
    Tensor out({n, c, oh, ow});
    if (argmax) argmax->assign(static_cast<size_t>(out.size()), 0);
    Eigen::Index oidx = 0;
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < c; ++ch) {
            for (int i = 0; i < oh; ++i) {
                for (int j = 0; j < ow; ++j, ++oidx) {
                    float best = input(b, ch, i * factor, j * factor);
                    Eigen::Index best_at =
                        ((static_cast<Eigen::Index>(b) * c + ch) * h + i * factor) * w + j * factor;
                    for (int di = 0; di < factor; ++di) {
                        for (int dj = 0; dj < factor; ++dj) {
                            const float v = input(b, ch, i * factor + di, j * factor + dj);
                            if (v > best) {
                                best = v;
                                best_at = ((static_cast<Eigen::Index>(b) * c + ch) * h + i * factor + di) * w +
                                          j * factor + dj;
                            }
                        }
                    }
                    out.data[oidx] = best;
                    if (argmax) (*argmax)[static_cast<size_t>(oidx)] = best_at;
                }
            }
        }
    }
    return out;
}

Tensor maxpool_backward(const Tensor& grad_out, const std::vector<Eigen::Index>& argmax,
                        const std::vector<int>& input_shape) {
    require(static_cast<size_t>(grad_out.size()) == argmax.size(), "maxpool backward: argmax length mismatch");
    Tensor dx(input_shape);
    for (Eigen::Index i = 0; i < grad_out.size(); ++i)
        dx.data[argmax[static_cast<size_t>(i)]] += grad_out.data[i];
    return dx;
}

Tensor concat_flatten(const std::vector<Tensor>& maps) {
    require(!maps.empty(), "concat_flatten: no maps");
    const int n = maps[0].dim(0), h = maps[0].dim(2), w = maps[0].dim(3);
    Eigen::Index per_item = 0;
    for (const Tensor& m : maps) {
        require(m.rank() == 4, "concat_flatten: maps must be rank 4");
        require(m.dim(0) == n && m.dim(2) == h && m.dim(3) == w,
                "concat_flatten: spatial/batch mismatch " + m.shape_str() + " vs " + maps[0].shape_str());
        per_item += static_cast<Eigen::Index>(m.dim(1)) * h * w;
    }
    Tensor out({n, static_cast<int>(per_item)});
    Eigen::Index offset = 0;
    for (int b = 0; b < n; ++b) {
        for (const Tensor& m : maps) {
            const Eigen::Index len = static_cast<Eigen::Index>(m.dim(1)) * h * w;
            out.data.segment(offset, len) = m.data.segment(static_cast<Eigen::Index>(b) * len, len);
            offset += len;
        }
    }
    return out;
}

}  // namespace scenebal
