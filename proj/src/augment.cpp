#include "scenebal/augment.hpp"

#include "scenebal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scenebal {

std::string to_string(AugOp op) {
    switch (op) {
        case AugOp::Replicate: return "replicate";
        case AugOp::Rotate90: return "rotate90";
        case AugOp::Rotate180: return "rotate180";
        case AugOp::Rotate270: return "rotate270";
        case AugOp::Noise: return "noise";
    }
    return "?";
}

AugOp aug_op_from_string(const std::string& s) {
    if (s == "replicate") return AugOp::Replicate;
    if (s == "rotate90") return AugOp::Rotate90;
    if (s == "rotate180") return AugOp::Rotate180;
    if (s == "rotate270") return AugOp::Rotate270;
    if (s == "noise") return AugOp::Noise;
    throw std::invalid_argument("unknown augmentation op '" + s + "'");
}

void AugmentationPolicy::validate() const {
    if (!replicate && !rotate && !noise)
        throw std::invalid_argument("augmentation policy: no operation enabled");
    if (noise && noise_variance <= 0.0)
        throw std::invalid_argument("augmentation policy: noise variance must be positive");
    for (int a : rotation_angles)
        if (a != 90 && a != 180 && a != 270)
            throw std::invalid_argument("augmentation policy: rotation angle must be 90, 180 or 270");
    if (rotate && rotation_angles.empty())
        throw std::invalid_argument("augmentation policy: rotation enabled without angles");
}

std::vector<AugOp> AugmentationPolicy::op_cycle() const {
    validate();
    std::vector<AugOp> ops;
    if (replicate) ops.push_back(AugOp::Replicate);
    if (rotate) {
        for (int a : {90, 180, 270}) {
            if (std::find(rotation_angles.begin(), rotation_angles.end(), a) == rotation_angles.end()) continue;
            ops.push_back(a == 90 ? AugOp::Rotate90 : a == 180 ? AugOp::Rotate180 : AugOp::Rotate270);
        }
    }
    if (noise) ops.push_back(AugOp::Noise);
    return ops;
}

BalancePlan plan_balance(long n_major, long n_minor, const std::vector<std::string>& minority_ids,
                         Scene minority_label, const AugmentationPolicy& policy) {
    if (n_minor < 1) throw std::invalid_argument("plan_balance: minority cluster is empty");
    if (n_major < n_minor) throw std::invalid_argument("plan_balance: majority smaller than minority");
    if (static_cast<long>(minority_ids.size()) != n_minor)
        throw std::invalid_argument("plan_balance: minority id list does not match count");

    const std::vector<AugOp> ops = policy.op_cycle();
    BalancePlan plan;
    plan.minority = minority_label;
    plan.n_major = n_major;
    plan.n_minor_before = n_minor;

    const long deficit = n_major - n_minor;
    std::vector<long> per_source(minority_ids.size(), 0);
    for (long t = 0; t < deficit; ++t) {
        const size_t src = static_cast<size_t>(t % n_minor);
        AugDirective d;
        d.source_id = minority_ids[src];
        d.op = ops[static_cast<size_t>(t) % ops.size()];
        d.new_id = d.source_id + "-aug" + std::to_string(++per_source[src]);
        plan.directives.push_back(std::move(d));
    }
    plan.n_minor_after = n_minor + deficit;
    return plan;
}

namespace {

// Continuous-coordinate corner transform for a CCW rotation in an
// image of width w, height h.
Box rotate_box(const Box& b, int angle, int w, int h) {
    Box r;
    switch (angle) {
        case 90:  // (x, y) -> (y, W - x)
            r = Box{b.y1, static_cast<double>(w) - b.x2, b.y2, static_cast<double>(w) - b.x1};
            break;
        case 180:  // (x, y) -> (W - x, H - y)
            r = Box{static_cast<double>(w) - b.x2, static_cast<double>(h) - b.y2,
                    static_cast<double>(w) - b.x1, static_cast<double>(h) - b.y1};
            break;
        case 270:  // (x, y) -> (H - y, x)
            r = Box{static_cast<double>(h) - b.y2, b.x1, static_cast<double>(h) - b.y1, b.x2};
            break;
        default:
            throw std::invalid_argument("rotate: angle must be 90, 180 or 270");
    }
    return r;
}

}  // namespace

RotatedSample rotate_sample(const Tensor& image, const std::vector<Box>& boxes, int angle) {
    if (image.rank() != 3)
        throw std::invalid_argument("rotate_sample: expected (C,H,W) image, got " + image.shape_str());
    if (angle != 90 && angle != 180 && angle != 270)
        throw std::invalid_argument("rotate_sample: angle must be 90, 180 or 270");
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);

    for (size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        b.require_valid("rotate_sample");
        if (b.x1 < 0.0 || b.y1 < 0.0 || b.x2 > w || b.y2 > h)
            throw std::invalid_argument("rotate_sample: box " + std::to_string(i) + " out of image bounds");
    }

    RotatedSample out;
    const bool swap = (angle != 180);
    out.image = Tensor({c, swap ? w : h, swap ? h : w});
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                int nx = 0, ny = 0;
                switch (angle) {
                    case 90: nx = y; ny = w - 1 - x; break;
                    case 180: nx = w - 1 - x; ny = h - 1 - y; break;
                    case 270: nx = h - 1 - y; ny = x; break;
                }
                out.image(ch, ny, nx) = image(ch, y, x);
            }
        }
    }
    out.boxes.reserve(boxes.size());
    for (const Box& b : boxes) out.boxes.push_back(rotate_box(b, angle, w, h));
    return out;
}

Tensor gaussian_field(const std::vector<int>& shape, double variance, uint64_t seed) {
    if (variance <= 0.0) throw std::invalid_argument("gaussian_field: variance must be positive");
    Rng rng(seed);
    Tensor field(shape);
    const float stddev = static_cast<float>(std::sqrt(variance));
    for (Eigen::Index i = 0; i < field.size(); ++i) field.data[i] = rng.normal(0.0f, stddev);
    return field;
}

Tensor add_noise(const Tensor& image, double variance, uint64_t seed) {
    if ((image.data < -1e-6f).any() || (image.data > 1.0f + 1e-6f).any())
        throw std::invalid_argument("add_noise: pixel intensities must lie in [0,1]");
    const Tensor field = gaussian_field(image.shape(), variance, seed);
    Tensor out = image;
    out.data = (image.data + field.data).min(1.0f).max(0.0f);
    return out;
}

}  // namespace scenebal
