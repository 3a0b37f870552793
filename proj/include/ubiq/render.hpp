#pragma once

// Colour-mapped rendering of epistemic maps and binary PPM output.

#include "ubiq/npy.hpp"
#include "ubiq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ubiq {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct ColorStop {
    double value = 0.0;
    Rgb color;
};

struct ColorScale {
    std::string name;
    std::vector<ColorStop> stops;  // strictly ascending from 0.0 to 1.0

    // Throws ParameterError unless stops ascend strictly from exactly 0 to exactly 1.
    void validate() const;
    // Linear per-channel interpolation; value must already lie in [0, 1].
    Rgb at(double value) const;
};

// Built-in scales (version 1 tables; the README lists the stops).
const ColorScale& belief_green();
const ColorScale& plausibility_blue();
const ColorScale& uncertainty_viridis_like();
const ColorScale& conflict_heat();
const ColorScale& scale_by_name(const std::string& name);

inline constexpr Rgb kNanColor{128, 128, 128};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // RGB, row-major

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

    Rgb pixel(int row, int col) const;
    void set(int row, int col, Rgb c);

    friend bool operator==(const Image&, const Image&) = default;
};

struct RenderResult {
    Image image;
    std::size_t clamped = 0;  // finite values outside [0, 1]
    std::size_t nan_count = 0;
};

RenderResult render_map(const Plane& values, const ColorScale& scale);

// Evidence composite: red = mass against, green = belief, blue = uncertainty.
// The three channels of a valid pixel sum to 255 up to rounding.
RenderResult composite(const Plane& bel, const Plane& pl, const Plane& unc);

// 8-bit RGB image from an H×W×3 (or H×W) tensor, min-max normalised.
Image image_from_tensor(const TensorFile& tensor);

// alpha * overlay + (1 - alpha) * base, per channel, rounded.
Image blend(const Image& base, const Image& overlay, double alpha = 0.5);

std::vector<std::uint8_t> encode_ppm(const Image& img);
void write_image(const Image& img, const std::filesystem::path& path);

}  // namespace ubiq
