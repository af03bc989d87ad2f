#pragma once

#include "scenebal/layers.hpp"
#include "scenebal/optim.hpp"
#include "scenebal/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace scenebal {

enum class GLossMode { Saturating, NonSaturating };

// Architecture and training knobs for the generator/discriminator pair.
// Channel plans list per-block output channels; the discriminator's
// third-from-last block runs at stride 1 so its last three blocks sit at
// spatial extents s*4, s*2, s (s = 4), which is what the pooled feature
// concatenation relies on.
struct GanConfig {
    int image_size = 256;
    int image_channels = 3;
    int noise_dim = 100;
    std::vector<int> g_channels;
    std::vector<int> d_channels;
    GLossMode g_loss_mode = GLossMode::NonSaturating;
    int batch_size = 16;
    int epochs = 20;
    uint64_t seed = 1234;
    bool use_batchnorm = true;
    float adam_lr = 2e-4f;
    float adam_beta1 = 0.5f;
    float adam_beta2 = 0.999f;
    float init_stddev = 0.02f;

    static constexpr int kFinalSpatial = 4;

    static std::vector<int> default_g_channels(int image_size, int image_channels);
    static std::vector<int> default_d_channels(int image_size);
    static GanConfig paper_scale();
    static GanConfig toy_scale(uint64_t seed = 1234);

    int feature_length() const;
    void validate() const;
};

struct GanModel {
    GanConfig config;
    Sequential generator;
    Sequential discriminator;
    // Discriminator layer indices whose outputs feed the scene feature vector,
    // ordered from the stride-1 block to the final block.
    std::vector<int> tap_indices;

    void set_training(bool t) {
        generator.set_training(t);
        discriminator.set_training(t);
    }
};

struct TrainHistory {
    struct Step {
        int step;
        double d_loss;
        double g_loss;
    };
    std::vector<Step> steps;
};

struct StepLosses {
    double d_loss;
    double g_loss;
};

struct DiscOutput {
    Eigen::VectorXf probs;      // one probability per image, in (0,1)
    std::vector<Tensor> taps;   // block outputs at the three tap points
};

GanModel build_gan(const GanConfig& config);

// count x noise_dim, i.i.d. uniform on [-1, 1], reproducible from seed.
Tensor sample_noise(int count, const GanConfig& config, uint64_t seed);

Tensor generate(GanModel& model, const Tensor& noise);

DiscOutput discriminate(GanModel& model, const Tensor& images);

// -mean(log p_real) - mean(log(1 - p_fake)); probabilities are clamped to
// [eps, 1-eps] before the logs and clamp events are counted if requested.
double d_loss(const Eigen::VectorXf& real_probs, const Eigen::VectorXf& fake_probs,
              int* clamp_events = nullptr);

double g_loss(const Eigen::VectorXf& fake_probs, GLossMode mode, int* clamp_events = nullptr);

// Discriminator update on the real batch plus fresh fakes (generator frozen).
double d_substep(GanModel& model, Optimizer& d_opt, const Tensor& real_batch, Rng& rng);

// Generator update through the frozen discriminator.
double g_substep(GanModel& model, Optimizer& g_opt, int batch_count, Rng& rng);

StepLosses train_step(GanModel& model, Optimizer& d_opt, Optimizer& g_opt,
                      const Tensor& real_batch, Rng& rng, int step_index = -1);

// Runs the full adversarial loop over shuffled mini-batches. Images are
// (C,S,S) tensors already mapped to [-1, 1]. The returned model is left in
// eval mode, ready for feature extraction.
GanModel train(const std::vector<Tensor>& images, const GanConfig& config, TrainHistory* history);

// Eq-style scene descriptor: flatten of the final tap map concatenated with
// the 2x-pooled middle tap and 4x-pooled first tap. Accepts a (C,S,S) image
// or an (N,C,S,S) batch; returns (N, feature_length) rows.
Tensor extract_scene_features(GanModel& model, const Tensor& images);

// [0,1] intensities to the [-1,1] range the adversarial pair trains on.
Tensor to_signed_range(const Tensor& image);

}  // namespace scenebal
