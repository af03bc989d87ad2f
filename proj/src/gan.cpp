#include "scenebal/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scenebal {

namespace {

constexpr float kProbEps = 1e-7f;

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2i(int v) {
    int n = 0;
    while (v > 1) {
        v >>= 1;
        ++n;
    }
    return n;
}

float clamp_prob(float p, int* events) {
    if (p < kProbEps || p > 1.0f - kProbEps) {
        if (events) ++(*events);
        return std::min(std::max(p, kProbEps), 1.0f - kProbEps);
    }
    return p;
}

Tensor noise_to_4d(const Tensor& noise) {
    if (noise.rank() == 4) return noise;
    if (noise.rank() == 2) return noise.reshaped({noise.dim(0), noise.dim(1), 1, 1});
    throw std::invalid_argument("noise must be rank 2 (count x dim), got " + noise.shape_str());
}

Tensor batch_of(const Tensor& images) {
    if (images.rank() == 4) return images;
    if (images.rank() == 3)
        return images.reshaped({1, images.dim(0), images.dim(1), images.dim(2)});
    throw std::invalid_argument("expected (C,H,W) image or (N,C,H,W) batch, got " + images.shape_str());
}

}  // namespace

std::vector<int> GanConfig::default_g_channels(int image_size, int image_channels) {
    const int blocks = log2i(image_size / kFinalSpatial) + 1;
    std::vector<int> ch(static_cast<size_t>(blocks));
    ch[0] = std::max(8, image_size * 4);
    for (int i = 1; i < blocks - 1; ++i) ch[static_cast<size_t>(i)] = std::max(4, ch[static_cast<size_t>(i - 1)] / 2);
    ch[static_cast<size_t>(blocks - 1)] = image_channels;
    return ch;
}

std::vector<int> GanConfig::default_d_channels(int image_size) {
    const int blocks = log2i(image_size / kFinalSpatial) + 1;
    const int c14 = std::max(8, image_size * 4);
    const int c13 = c14 / 2, c12 = c14 / 4;
    std::vector<int> ch(static_cast<size_t>(blocks));
    ch[static_cast<size_t>(blocks - 1)] = c14;
    ch[static_cast<size_t>(blocks - 2)] = c13;
    ch[static_cast<size_t>(blocks - 3)] = c12;
    // The stride-1 block keeps its predecessor's width; earlier blocks halve.
    if (blocks >= 4) ch[static_cast<size_t>(blocks - 4)] = c12;
    for (int i = blocks - 5; i >= 0; --i)
        ch[static_cast<size_t>(i)] = std::max(4, ch[static_cast<size_t>(i + 1)] / 2);
    return ch;
}

GanConfig GanConfig::paper_scale() {
    GanConfig c;
    c.image_size = 256;
    c.image_channels = 3;
    c.g_channels = default_g_channels(256, 3);
    c.d_channels = default_d_channels(256);
    return c;
}

GanConfig GanConfig::toy_scale(uint64_t seed) {
    GanConfig c;
    c.image_size = 32;
    c.image_channels = 1;
    c.g_channels = default_g_channels(32, 1);
    c.d_channels = default_d_channels(32);
    c.batch_size = 8;
    c.epochs = 20;
    c.seed = seed;
    return c;
}

int GanConfig::feature_length() const {
    const size_t n = d_channels.size();
    const int sum = d_channels[n - 3] + d_channels[n - 2] + d_channels[n - 1];
    return sum * kFinalSpatial * kFinalSpatial;
}

void GanConfig::validate() const {
    if (noise_dim < 1) throw std::invalid_argument("gan config: noise_dim must be >= 1");
    if (!is_pow2(image_size) || image_size < 16)
        throw std::invalid_argument("gan config: image_size must be a power of two >= 16, got " +
                                    std::to_string(image_size));
    if (image_channels < 1) throw std::invalid_argument("gan config: image_channels must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("gan config: batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("gan config: epochs must be >= 0");
    const size_t blocks = static_cast<size_t>(log2i(image_size / kFinalSpatial) + 1);
    if (d_channels.size() != blocks || g_channels.size() != blocks)
        throw std::invalid_argument("gan config: channel plans must list " + std::to_string(blocks) +
                                    " blocks for image size " + std::to_string(image_size));
    if (g_channels.back() != image_channels)
        throw std::invalid_argument("gan config: last generator block must emit image_channels");
    for (int c : d_channels)
        if (c < 1) throw std::invalid_argument("gan config: channel counts must be positive");
    for (int c : g_channels)
        if (c < 1) throw std::invalid_argument("gan config: channel counts must be positive");
}

GanModel build_gan(const GanConfig& config) {
    config.validate();
    GanModel model;
    model.config = config;
    Rng rng(config.seed);

    const int blocks = static_cast<int>(config.g_channels.size());

    // Generator: noise projection to 4x4, then stride-2 upsampling blocks.
    for (int i = 0; i < blocks; ++i) {
        const int in_ch = (i == 0) ? config.noise_dim : config.g_channels[static_cast<size_t>(i - 1)];
        const int out_ch = config.g_channels[static_cast<size_t>(i)];
        const bool first = (i == 0);
        const bool last = (i == blocks - 1);
        auto conv = std::make_unique<TransposedConv2d>("g.b" + std::to_string(i + 1), in_ch, out_ch, 4,
                                                       first ? 1 : 2, first ? 0 : 1);
        conv->init_weights(rng, config.init_stddev);
        model.generator.add(std::move(conv));
        if (!last) {
            if (config.use_batchnorm)
                model.generator.add(std::make_unique<BatchNorm2d>("g.b" + std::to_string(i + 1) + ".bn", out_ch));
            model.generator.add(std::make_unique<Activation>(Act::Relu));
        } else {
            model.generator.add(std::make_unique<Activation>(Act::Tanh));
        }
    }

    // Discriminator: stride-2 blocks down to 4x4 with one stride-1 block third
    // from the end; leaky units; no normalization on the input block.
    const int stride1_block = blocks - 3;
    for (int i = 0; i < blocks; ++i) {
        const int in_ch = (i == 0) ? config.image_channels : config.d_channels[static_cast<size_t>(i - 1)];
        const int out_ch = config.d_channels[static_cast<size_t>(i)];
        const bool unit_stride = (i == stride1_block);
        auto conv = std::make_unique<Conv2d>("d.b" + std::to_string(i + 1), in_ch, out_ch,
                                             unit_stride ? 3 : 4, unit_stride ? 1 : 2, 1);
        conv->init_weights(rng, config.init_stddev);
        model.discriminator.add(std::move(conv));
        if (config.use_batchnorm && i > 0)
            model.discriminator.add(std::make_unique<BatchNorm2d>("d.b" + std::to_string(i + 1) + ".bn", out_ch));
        model.discriminator.add(std::make_unique<Activation>(Act::LeakyRelu, 0.2f));
        if (i >= stride1_block)
            model.tap_indices.push_back(static_cast<int>(model.discriminator.size()) - 1);
    }
    auto head = std::make_unique<Conv2d>("d.head", config.d_channels.back(), 1,
                                         GanConfig::kFinalSpatial, 1, 0);
    head->init_weights(rng, config.init_stddev);
    model.discriminator.add(std::move(head));
    model.discriminator.add(std::make_unique<Activation>(Act::Sigmoid));
    return model;
}

Tensor sample_noise(int count, const GanConfig& config, uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_noise: count must be >= 1");
    Rng rng(seed);
    Tensor noise({count, config.noise_dim});
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data[i] = rng.uniform(-1.0f, 1.0f);
    return noise;
}

Tensor generate(GanModel& model, const Tensor& noise) {
    const Tensor z = noise_to_4d(noise);
    if (z.dim(1) != model.config.noise_dim)
        throw std::invalid_argument("generate: noise dim " + std::to_string(z.dim(1)) + " != configured " +
                                    std::to_string(model.config.noise_dim));
    return model.generator.forward(z);
}

DiscOutput discriminate(GanModel& model, const Tensor& images) {
    const Tensor batch = batch_of(images);
    if (batch.dim(1) != model.config.image_channels || batch.dim(2) != model.config.image_size ||
        batch.dim(3) != model.config.image_size)
        throw std::invalid_argument("discriminate: image shape " + batch.shape_str() +
                                    " does not match config");
    DiscOutput out;
    Tensor y = model.discriminator.forward_with_taps(batch, model.tap_indices, &out.taps);
    out.probs = Eigen::Map<const Eigen::VectorXf>(y.data.data(), y.dim(0));
    return out;
}

double d_loss(const Eigen::VectorXf& real_probs, const Eigen::VectorXf& fake_probs, int* clamp_events) {
    if (real_probs.size() == 0 || fake_probs.size() == 0)
        throw std::invalid_argument("d_loss: empty probability vector");
    double lr = 0.0, lf = 0.0;
    for (Eigen::Index i = 0; i < real_probs.size(); ++i)
        lr += std::log(static_cast<double>(clamp_prob(real_probs[i], clamp_events)));
    for (Eigen::Index i = 0; i < fake_probs.size(); ++i)
        lf += std::log(1.0 - static_cast<double>(clamp_prob(fake_probs[i], clamp_events)));
    return -lr / static_cast<double>(real_probs.size()) - lf / static_cast<double>(fake_probs.size());
}

double g_loss(const Eigen::VectorXf& fake_probs, GLossMode mode, int* clamp_events) {
    if (fake_probs.size() == 0) throw std::invalid_argument("g_loss: empty probability vector");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < fake_probs.size(); ++i) {
        const double p = static_cast<double>(clamp_prob(fake_probs[i], clamp_events));
        acc += (mode == GLossMode::Saturating) ? std::log(1.0 - p) : -std::log(p);
    }
    return acc / static_cast<double>(fake_probs.size());
}

namespace {

// dL/d(head output) for the discriminator loss terms, zero where clamped.
Tensor bce_seed(const Eigen::VectorXf& probs, bool toward_one, float scale) {
    Tensor seed({static_cast<int>(probs.size()), 1, 1, 1});
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const float p = probs[i];
        if (p < kProbEps || p > 1.0f - kProbEps) continue;
        seed.data[i] = toward_one ? (-scale / p) : (scale / (1.0f - p));
    }
    return seed;
}

Tensor g_loss_seed(const Eigen::VectorXf& probs, GLossMode mode) {
    const float n = static_cast<float>(probs.size());
    Tensor seed({static_cast<int>(probs.size()), 1, 1, 1});
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const float p = probs[i];
        if (p < kProbEps || p > 1.0f - kProbEps) continue;
        seed.data[i] = (mode == GLossMode::Saturating) ? (-1.0f / (n * (1.0f - p))) : (-1.0f / (n * p));
    }
    return seed;
}

}  // namespace

double d_substep(GanModel& model, Optimizer& d_opt, const Tensor& real_batch, Rng& rng) {
    model.set_training(true);
    model.discriminator.zero_grads();

    DiscOutput real = discriminate(model, real_batch);
    model.discriminator.backward(bce_seed(real.probs, true, 1.0f / static_cast<float>(real.probs.size())));

    const int count = real_batch.dim(0);
    Tensor noise = sample_noise(count, model.config, rng.engine()());
    Tensor fakes = generate(model, noise);
    DiscOutput fake = discriminate(model, fakes);
    model.discriminator.backward(bce_seed(fake.probs, false, 1.0f / static_cast<float>(fake.probs.size())));

    d_opt.step(model.discriminator.params());
    return d_loss(real.probs, fake.probs);
}

double g_substep(GanModel& model, Optimizer& g_opt, int batch_count, Rng& rng) {
    model.set_training(true);
    model.generator.zero_grads();

    Tensor noise = sample_noise(batch_count, model.config, rng.engine()());
    Tensor fakes = generate(model, noise);
    DiscOutput out = discriminate(model, fakes);
    const double loss = g_loss(out.probs, model.config.g_loss_mode);

    Tensor d_input_grad = model.discriminator.backward(g_loss_seed(out.probs, model.config.g_loss_mode));
    model.generator.backward(d_input_grad);
    g_opt.step(model.generator.params());
    return loss;
}

StepLosses train_step(GanModel& model, Optimizer& d_opt, Optimizer& g_opt,
                      const Tensor& real_batch, Rng& rng, int step_index) {
    if (real_batch.dim(0) < 1) throw std::invalid_argument("train_step: empty batch");
    StepLosses losses{};
    losses.d_loss = d_substep(model, d_opt, real_batch, rng);
    losses.g_loss = g_substep(model, g_opt, real_batch.dim(0), rng);
    if (!std::isfinite(losses.d_loss) || !std::isfinite(losses.g_loss))
        throw std::runtime_error("train_step: non-finite loss at step " + std::to_string(step_index));
    return losses;
}

GanModel train(const std::vector<Tensor>& images, const GanConfig& config, TrainHistory* history) {
    config.validate();
    if (images.empty()) throw std::invalid_argument("train: dataset is empty");
    for (const Tensor& im : images) {
        if (im.rank() != 3 || im.dim(0) != config.image_channels || im.dim(1) != config.image_size ||
            im.dim(2) != config.image_size)
            throw std::invalid_argument("train: image shape " + im.shape_str() + " does not match config");
    }

    GanModel model = build_gan(config);
    Optimizer d_opt(OptimizerConfig::adam(config.adam_lr, config.adam_beta1, config.adam_beta2));
    Optimizer g_opt(OptimizerConfig::adam(config.adam_lr, config.adam_beta1, config.adam_beta2));
    Rng rng(config.seed + 1);

    const int n = static_cast<int>(images.size());
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    int step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (int i = n - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)], order[rng.index(static_cast<uint32_t>(i + 1))]);
        for (int start = 0; start < n; start += config.batch_size) {
            const int count = std::min(config.batch_size, n - start);
            Tensor batch({count, config.image_channels, config.image_size, config.image_size});
            const Eigen::Index item = images[0].size();
            for (int b = 0; b < count; ++b)
                batch.data.segment(b * item, item) = images[static_cast<size_t>(order[static_cast<size_t>(start + b)])].data;
            StepLosses losses = train_step(model, d_opt, g_opt, batch, rng, step);
            if (history) history->steps.push_back({step, losses.d_loss, losses.g_loss});
            ++step;
        }
    }
    model.set_training(false);
    return model;
}

Tensor extract_scene_features(GanModel& model, const Tensor& images) {
    model.set_training(false);
    DiscOutput out = discriminate(model, images);
    const Tensor& c12 = out.taps[0];
    const Tensor& c13 = out.taps[1];
    const Tensor& c14 = out.taps[2];
    Tensor features = concat_flatten({c14, maxpool(c13, 2), maxpool(c12, 4)});
    if (!features.all_finite()) throw std::runtime_error("extract_scene_features: non-finite feature value");
    return features;
}

Tensor to_signed_range(const Tensor& image) {
    Tensor out = image;
    out.data = image.data * 2.0f - 1.0f;
    return out;
}

}  // namespace scenebal
