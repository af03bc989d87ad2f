#pragma once

#include "scenebal/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace scenebal {

// 8-bit interleaved image buffer (gray or RGB).
struct ImageU8 {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<uint8_t> pixels;
};

// Reads an 8-bit grayscale or RGB PNG or PGM (P5/P2); rejects anything else
// with the offending path in the message.
ImageU8 read_image(const std::filesystem::path& path);

// Format chosen by extension: .pgm (grayscale only) or .png.
void write_image(const std::filesystem::path& path, const ImageU8& image);

// (C,H,W) float tensor with intensities u/255 in [0,1].
Tensor image_to_tensor(const ImageU8& image);

// round(v*255), clipped to [0,255].
ImageU8 tensor_to_image(const Tensor& tensor);

// Nearest-neighbor, pixel-center sampling; interpolation-free and reproducible.
Tensor resize_nearest(const Tensor& image, int out_h, int out_w);

// Grayscale replicated across the requested channel count (no-op when equal).
Tensor replicate_channels(const Tensor& image, int channels);

// Full loading contract for network input: read, map to [0,1], resize to
// image_size, match channel count.
Tensor load_image(const std::filesystem::path& path, int image_size, int channels);

}  // namespace scenebal
