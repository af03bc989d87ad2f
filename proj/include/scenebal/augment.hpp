#pragma once

#include "scenebal/box.hpp"
#include "scenebal/scene.hpp"
#include "scenebal/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scenebal {

enum class AugOp { Replicate, Rotate90, Rotate180, Rotate270, Noise };

std::string to_string(AugOp op);
AugOp aug_op_from_string(const std::string& s);

struct AugmentationPolicy {
    bool replicate = true;
    bool rotate = true;
    std::vector<int> rotation_angles = {90, 180, 270};
    bool noise = true;
    double noise_variance = 0.1;
    uint64_t seed = 0;

    void validate() const;
    // Enabled operations in the fixed cycle order:
    // replicate, rotate-90, rotate-180, rotate-270, noise.
    std::vector<AugOp> op_cycle() const;
};

struct AugDirective {
    std::string source_id;
    AugOp op = AugOp::Replicate;
    std::string new_id;
};

struct BalancePlan {
    Scene minority = Scene::Inshore;
    long n_major = 0;
    long n_minor_before = 0;
    long n_minor_after = 0;
    std::vector<AugDirective> directives;
};

// Spreads the deficit round-robin over the minority images while cycling
// through the enabled operations; plan size equals the deficit.
BalancePlan plan_balance(long n_major, long n_minor, const std::vector<std::string>& minority_ids,
                         Scene minority_label, const AugmentationPolicy& policy);

struct RotatedSample {
    Tensor image;
    std::vector<Box> boxes;
};

// Exact lattice rotation, counterclockwise about the image center:
// 90 degrees maps a continuous point (x, y) to (y, W - x). Pixels are
// permuted, never interpolated; boxes are corner-transformed and
// re-enclosed, preserving area exactly.
RotatedSample rotate_sample(const Tensor& image, const std::vector<Box>& boxes, int angle);

// i.i.d. Gaussian(0, variance) field, reproducible from seed; exposed so the
// pre-clip noise statistics stay testable.
Tensor gaussian_field(const std::vector<int>& shape, double variance, uint64_t seed);

// Adds Gaussian noise in [0,1] intensity space and clips back to [0,1].
Tensor add_noise(const Tensor& image, double variance, uint64_t seed);

}  // namespace scenebal
