#include "ubiq/render.hpp"

#include "ubiq/error.hpp"

#include <algorithm>
#include <cmath>

namespace ubiq {
namespace {

ColorScale make_scale(std::string name, std::vector<ColorStop> stops) {
    ColorScale s{std::move(name), std::move(stops)};
    s.validate();
    return s;
}

std::uint8_t lerp_channel(std::uint8_t a, std::uint8_t b, double t) {
    const double v = static_cast<double>(a) + t * (static_cast<double>(b) - static_cast<double>(a));
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

void ColorScale::validate() const {
    if (stops.size() < 2) throw ParameterError("colour scale '" + name + "' needs at least two stops");
    if (stops.front().value != 0.0 || stops.back().value != 1.0) {
        throw ParameterError("colour scale '" + name + "' must span exactly [0, 1]");
    }
    for (std::size_t i = 1; i < stops.size(); ++i) {
        if (!(stops[i].value > stops[i - 1].value)) {
            throw ParameterError("colour scale '" + name + "' stops are not strictly ascending");
        }
    }
}

Rgb ColorScale::at(double value) const {
    if (value <= stops.front().value) return stops.front().color;
    if (value >= stops.back().value) return stops.back().color;
    const auto upper = std::upper_bound(stops.begin(), stops.end(), value,
                                        [](double v, const ColorStop& s) { return v < s.value; });
    const auto lower = upper - 1;
    const double t = (value - lower->value) / (upper->value - lower->value);
    return {lerp_channel(lower->color.r, upper->color.r, t), lerp_channel(lower->color.g, upper->color.g, t),
            lerp_channel(lower->color.b, upper->color.b, t)};
}

const ColorScale& belief_green() {
    static const ColorScale s = make_scale(
        "belief_green", {{0.0, {247, 252, 245}}, {0.5, {116, 196, 118}}, {1.0, {0, 68, 27}}});
    return s;
}

const ColorScale& plausibility_blue() {
    static const ColorScale s = make_scale(
        "plausibility_blue", {{0.0, {247, 251, 255}}, {0.5, {107, 174, 214}}, {1.0, {8, 48, 107}}});
    return s;
}

const ColorScale& uncertainty_viridis_like() {
    static const ColorScale s = make_scale("uncertainty_viridis_like", {{0.0, {68, 1, 84}},
                                                                        {0.25, {59, 82, 139}},
                                                                        {0.5, {33, 145, 140}},
                                                                        {0.75, {94, 201, 98}},
                                                                        {1.0, {253, 231, 37}}});
    return s;
}

const ColorScale& conflict_heat() {
    static const ColorScale s = make_scale(
        "conflict_heat", {{0.0, {0, 0, 0}}, {0.5, {200, 30, 30}}, {1.0, {255, 255, 160}}});
    return s;
}

const ColorScale& scale_by_name(const std::string& name) {
    for (const ColorScale* s :
         {&belief_green(), &plausibility_blue(), &uncertainty_viridis_like(), &conflict_heat()}) {
        if (s->name == name) return *s;
    }
    throw ParameterError("unknown colour scale '" + name + "'");
}

Rgb Image::pixel(int row, int col) const {
    const auto i = (static_cast<std::size_t>(row) * width + col) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int row, int col, Rgb c) {
    const auto i = (static_cast<std::size_t>(row) * width + col) * 3;
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
}

RenderResult render_map(const Plane& values, const ColorScale& scale) {
    RenderResult out;
    out.image = Image(static_cast<int>(values.cols()), static_cast<int>(values.rows()));
    for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) {
            double v = values(r, c);
            Rgb color;
            if (std::isnan(v)) {
                ++out.nan_count;
                color = kNanColor;
            } else {
                if (v < 0.0 || v > 1.0) {
                    ++out.clamped;
                    v = std::clamp(v, 0.0, 1.0);
                }
                color = scale.at(v);
            }
            out.image.set(static_cast<int>(r), static_cast<int>(c), color);
        }
    }
    return out;
}

RenderResult composite(const Plane& bel, const Plane& pl, const Plane& unc) {
    if (!same_shape(bel, pl) || !same_shape(bel, unc)) throw ShapeError("composite layers differ in shape");
    RenderResult out;
    out.image = Image(static_cast<int>(bel.cols()), static_cast<int>(bel.rows()));
    auto level = [&](double v) {
        if (v < 0.0 || v > 1.0) {
            ++out.clamped;
            v = std::clamp(v, 0.0, 1.0);
        }
        return static_cast<std::uint8_t>(std::lround(255.0 * v));
    };
    for (Index r = 0; r < bel.rows(); ++r) {
        for (Index c = 0; c < bel.cols(); ++c) {
            const double against = 1.0 - pl(r, c);
            Rgb color = kNanColor;
            if (std::isnan(bel(r, c)) || std::isnan(against) || std::isnan(unc(r, c))) {
                ++out.nan_count;
            } else {
                color = {level(against), level(bel(r, c)), level(unc(r, c))};
            }
            out.image.set(static_cast<int>(r), static_cast<int>(c), color);
        }
    }
    return out;
}

Image image_from_tensor(const TensorFile& tensor) {
    const bool rgb = tensor.shape.size() == 3 && tensor.shape[2] == 3;
    const bool grey = tensor.shape.size() == 2 || (tensor.shape.size() == 3 && tensor.shape[2] == 1);
    if (!rgb && !grey) throw ShapeError("overlay source must be H×W, H×W×1 or H×W×3");
    const auto values = tensor.values();
    if (values.empty()) throw ShapeError("overlay source is empty");
    double lo = values.front(), hi = values.front();
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("overlay source contains non-finite values");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    auto level = [&](double v) {
        return static_cast<std::uint8_t>(std::lround(255.0 * (v - lo) / span));
    };

    Image img(static_cast<int>(tensor.shape[1]), static_cast<int>(tensor.shape[0]));
    const std::size_t channels = rgb ? 3 : 1;
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const std::size_t base = (static_cast<std::size_t>(r) * img.width + c) * channels;
            if (rgb) {
                img.set(r, c, {level(values[base]), level(values[base + 1]), level(values[base + 2])});
            } else {
                const auto g = level(values[base]);
                img.set(r, c, {g, g, g});
            }
        }
    }
    return img;
}

Image blend(const Image& base, const Image& overlay, double alpha) {
    if (base.width != overlay.width || base.height != overlay.height) {
        throw ShapeError("overlay and base image differ in size");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("blend factor must lie in [0, 1]");
    Image out(base.width, base.height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const double v = alpha * overlay.pixels[i] + (1.0 - alpha) * base.pixels[i];
        out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return out;
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
    const std::string header =
        "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

void write_image(const Image& img, const std::filesystem::path& path) {
    if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
        throw ShapeError("image buffer does not match its dimensions");
    }
    write_bytes(path, encode_ppm(img));
}

}  // namespace ubiq
