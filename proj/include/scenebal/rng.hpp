#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scenebal {

// Seeded generator with explicit uniform/normal transforms so that sampled
// streams depend only on the mt19937 sequence, not on libstdc++
// distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(static_cast<std::mt19937::result_type>(seed)) {}

    // Uniform on [0, 1) with 24-bit resolution.
    float uniform01() {
        return static_cast<float>(engine_() >> 8) * (1.0f / 16777216.0f);
    }

    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; caches the second variate.
    float normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        float u1 = uniform01();
        while (u1 <= 0.0f) u1 = uniform01();
        const float u2 = uniform01();
        const float r = std::sqrt(-2.0f * std::log(u1));
        const float theta = 6.28318530717958647692f * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    float normal(float mean, float stddev) { return mean + stddev * normal(); }

    // Integer in [0, n); rejection-free modulo bias is irrelevant at our n.
    uint32_t index(uint32_t n) { return engine_() % n; }

    std::mt19937& engine() { return engine_; }

private:
    std::mt19937 engine_;
    float spare_ = 0.0f;
    bool have_spare_ = false;
};

}  // namespace scenebal
