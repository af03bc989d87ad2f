#include "scenebal/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scenebal {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const fs::path& path, const std::string& why) {
    throw std::runtime_error("image '" + path.string() + "': " + why);
}

int pnm_next_int(std::istream& in, const fs::path& path) {
    // Skips whitespace and '#' comments between header tokens.
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) fail(path, "malformed PGM header");
    return value;
}

ImageU8 read_pgm(const fs::path& path, bool ascii) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char magic[2];
    in.read(magic, 2);
    ImageU8 img;
    img.width = pnm_next_int(in, path);
    img.height = pnm_next_int(in, path);
    const int maxval = pnm_next_int(in, path);
    if (maxval != 255) fail(path, "only 8-bit PGM supported (maxval 255)");
    if (img.width < 1 || img.height < 1) fail(path, "bad dimensions");
    img.channels = 1;
    img.pixels.resize(static_cast<size_t>(img.width) * img.height);
    if (ascii) {
        for (auto& px : img.pixels) {
            int v = pnm_next_int(in, path);
            if (v < 0 || v > 255) fail(path, "pixel out of range");
            px = static_cast<uint8_t>(v);
        }
    } else {
        in.get();  // single whitespace after maxval
        in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) fail(path, "truncated pixel data");
    }
    return img;
}

ImageU8 read_png(const fs::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        fail(path, png.message[0] ? png.message : "not a readable PNG");

    ImageU8 img;
    img.width = static_cast<int>(png.width);
    img.height = static_cast<int>(png.height);
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.channels = color ? 3 : 1;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    img.pixels.resize(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
        const std::string msg = png.message[0] ? png.message : "decode failed";
        png_image_free(&png);
        fail(path, msg);
    }
    return img;
}

void write_pgm(const fs::path& path, const ImageU8& image) {
    if (image.channels != 1) fail(path, "PGM output requires a grayscale image");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) fail(path, "write failed");
}

void write_png(const fs::path& path, const ImageU8& image) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.pixels.data(), 0, nullptr))
        fail(path, png.message[0] ? png.message : "encode failed");
}

}  // namespace

ImageU8 read_image(const fs::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail(path, "cannot open");
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P' && magic[1] == '5') return read_pgm(path, false);
    if (magic[0] == 'P' && magic[1] == '2') return read_pgm(path, true);
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return read_png(path);
    fail(path, "unsupported format (PGM P5/P2 or 8-bit PNG expected)");
}

void write_image(const fs::path& path, const ImageU8& image) {
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() != static_cast<size_t>(image.width) * image.height * image.channels)
        fail(path, "inconsistent image buffer");
    const auto ext = path.extension().string();
    if (ext == ".pgm")
        write_pgm(path, image);
    else if (ext == ".png")
        write_png(path, image);
    else
        fail(path, "unsupported output extension '" + ext + "'");
}

Tensor image_to_tensor(const ImageU8& image) {
    Tensor t({image.channels, image.height, image.width});
    const float scale = 1.0f / 255.0f;
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < image.channels; ++c)
                t(c, y, x) = scale * image.pixels[(static_cast<size_t>(y) * image.width + x) * image.channels + c];
    return t;
}

ImageU8 tensor_to_image(const Tensor& tensor) {
    if (tensor.rank() != 3) throw std::invalid_argument("tensor_to_image: expected (C,H,W), got " + tensor.shape_str());
    ImageU8 img;
    img.channels = tensor.dim(0);
    img.height = tensor.dim(1);
    img.width = tensor.dim(2);
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("tensor_to_image: only 1 or 3 channels supported");
    img.pixels.resize(static_cast<size_t>(img.width) * img.height * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                const float v = std::min(1.0f, std::max(0.0f, tensor(c, y, x)));
                img.pixels[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
                    static_cast<uint8_t>(std::lround(v * 255.0f));
            }
        }
    }
    return img;
}

Tensor resize_nearest(const Tensor& image, int out_h, int out_w) {
    if (image.rank() != 3) throw std::invalid_argument("resize_nearest: expected (C,H,W)");
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    if (h == out_h && w == out_w) return image;
    Tensor out({c, out_h, out_w});
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < out_h; ++y) {
            const int sy = std::min(h - 1, static_cast<int>((2LL * y + 1) * h / (2LL * out_h)));
            for (int x = 0; x < out_w; ++x) {
                const int sx = std::min(w - 1, static_cast<int>((2LL * x + 1) * w / (2LL * out_w)));
                out(ch, y, x) = image(ch, sy, sx);
            }
        }
    }
    return out;
}

Tensor replicate_channels(const Tensor& image, int channels) {
    if (image.rank() != 3) throw std::invalid_argument("replicate_channels: expected (C,H,W)");
    if (image.dim(0) == channels) return image;
    if (image.dim(0) != 1)
        throw std::invalid_argument("replicate_channels: cannot map " + std::to_string(image.dim(0)) +
                                    " channels to " + std::to_string(channels));
    Tensor out({channels, image.dim(1), image.dim(2)});
    const Eigen::Index plane = image.size();
    for (int c = 0; c < channels; ++c) out.data.segment(c * plane, plane) = image.data;
    return out;
}

Tensor load_image(const fs::path& path, int image_size, int channels) {
    const Tensor raw = image_to_tensor(read_image(path));
    return replicate_channels(resize_nearest(raw, image_size, image_size), channels);
}

}  // namespace scenebal
