#include "ubiq/npy.hpp"

#include "ubiq/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <regex>

namespace ubiq {
namespace {

constexpr unsigned char kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreamble = 10;  // magic + version + header length
constexpr std::size_t kAlignment = 64;

template <typename T>
T load_le(const unsigned char* p) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T out;
    std::memcpy(&out, buf, sizeof(T));
    return out;
}

template <typename T>
void store_le(T value, unsigned char* p) {
    std::memcpy(p, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(p, p + sizeof(T));
}

std::string shape_tuple(const std::vector<std::size_t>& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(shape[i]);
    }
    if (shape.size() == 1) out += ",";
    return out + ")";
}

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

}  // namespace

std::string descriptor(DType dtype) { return dtype == DType::Float32 ? "<f4" : "<f8"; }

std::size_t item_size(DType dtype) { return dtype == DType::Float32 ? 4 : 8; }

std::size_t TensorFile::element_count() const { return product(shape); }

std::vector<double> TensorFile::values() const {
    const std::size_t n = element_count();
    std::vector<double> out(n);
    const std::size_t step = item_size(dtype);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* p = payload.data() + i * step;
        out[i] = dtype == DType::Float32 ? static_cast<double>(load_le<float>(p)) : load_le<double>(p);
    }
    return out;
}

Plane TensorFile::plane() const {
    const bool flat3 = shape.size() == 3 && shape[2] == 1;
    if (shape.size() != 2 && !flat3) {
        throw ShapeError("expected a 2-D tensor, got shape " + shape_tuple(shape));
    }
    const auto v = values();
    return Eigen::Map<const Plane>(v.data(), static_cast<Index>(shape[0]),
                                   static_cast<Index>(shape[1]));
}

Plane TensorFile::slice(std::size_t k) const {
    if (shape.size() != 3 || k >= shape[0]) {
        throw ShapeError("cannot take slice " + std::to_string(k) + " of shape " + shape_tuple(shape));
    }
    const auto v = values();
    const std::size_t plane_size = shape[1] * shape[2];
    return Eigen::Map<const Plane>(v.data() + k * plane_size, static_cast<Index>(shape[1]),
                                   static_cast<Index>(shape[2]));
}

TensorFile TensorFile::from_values(std::vector<std::size_t> shape, std::span<const double> values,
                                   DType dtype) {
    if (product(shape) != values.size()) throw ShapeError("value count does not match shape");
    TensorFile t;
    t.dtype = dtype;
    t.shape = std::move(shape);
    t.payload.resize(values.size() * item_size(dtype));
    for (std::size_t i = 0; i < values.size(); ++i) {
        unsigned char* p = t.payload.data() + i * item_size(dtype);
        if (dtype == DType::Float32) {
            store_le(static_cast<float>(values[i]), p);
        } else {
            store_le(values[i], p);
        }
    }
    return t;
}

TensorFile TensorFile::from_values(std::vector<std::size_t> shape, std::span<const float> values) {
    if (product(shape) != values.size()) throw ShapeError("value count does not match shape");
    TensorFile t;
    t.dtype = DType::Float32;
    t.shape = std::move(shape);
    t.payload.resize(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) store_le(values[i], t.payload.data() + 4 * i);
    return t;
}

TensorFile TensorFile::from_plane(const Plane& plane) {
    return from_values({static_cast<std::size_t>(plane.rows()), static_cast<std::size_t>(plane.cols())},
                       std::span<const double>(plane.data(), static_cast<std::size_t>(plane.size())));
}

TensorFile TensorFile::from_planes(std::span<const Plane> planes) {
    if (planes.empty()) throw ShapeError("cannot stack zero planes");
    const auto rows = static_cast<std::size_t>(planes.front().rows());
    const auto cols = static_cast<std::size_t>(planes.front().cols());
    std::vector<double> flat;
    flat.reserve(planes.size() * rows * cols);
    for (const auto& p : planes) {
        if (!same_shape(p, planes.front())) throw ShapeError("stacked planes differ in shape");
        flat.insert(flat.end(), p.data(), p.data() + p.size());
    }
    return from_values({planes.size(), rows, cols}, flat);
}

std::string npy_header(const TensorFile& tensor) {
    std::string dict = "{'descr': '" + descriptor(tensor.dtype) +
                       "', 'fortran_order': False, 'shape': " + shape_tuple(tensor.shape) + ", }";
    const std::size_t unpadded = kPreamble + dict.size() + 1;
    const std::size_t padding = (kAlignment - unpadded % kAlignment) % kAlignment;
    dict.append(padding, ' ');
    dict.push_back('\n');
    return dict;
}

std::vector<unsigned char> encode_npy(const TensorFile& tensor) {
    if (tensor.payload.size() != tensor.element_count() * item_size(tensor.dtype)) {
        throw SizeError("tensor payload does not match its shape");
    }
    const std::string header = npy_header(tensor);
    std::vector<unsigned char> out(kPreamble + header.size() + tensor.payload.size());
    std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
    out[6] = 1;
    out[7] = 0;
    store_le(static_cast<std::uint16_t>(header.size()), out.data() + 8);
    std::copy(header.begin(), header.end(), out.begin() + kPreamble);
    std::copy(tensor.payload.begin(), tensor.payload.end(),
              out.begin() + static_cast<std::ptrdiff_t>(kPreamble + header.size()));
    return out;
}

TensorFile decode_npy(std::span<const unsigned char> bytes, const std::string& origin) {
    if (bytes.size() < kPreamble || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw FormatError(origin + ": missing NPY magic sequence");
    }
    if (bytes[6] != 1 || bytes[7] != 0) {
        throw FormatError(origin + ": unsupported NPY version " + std::to_string(bytes[6]) + "." +
                          std::to_string(bytes[7]) + " (only 1.0 is accepted)");
    }
    const std::size_t header_len = load_le<std::uint16_t>(bytes.data() + 8);
    if (bytes.size() < kPreamble + header_len) throw SizeError(origin + ": truncated NPY header");
    const std::string header(reinterpret_cast<const char*>(bytes.data() + kPreamble), header_len);

    static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
    static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
    static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
    std::smatch m;

    if (!std::regex_search(header, m, descr_re)) throw FormatError(origin + ": header lacks 'descr'");
    const std::string descr = m[1];
    TensorFile t;
    if (descr == "<f4") {
        t.dtype = DType::Float32;
    } else if (descr == "<f8") {
        t.dtype = DType::Float64;
    } else {
        throw UnsupportedDTypeError(descr, origin);
    }

    if (!std::regex_search(header, m, order_re)) {
        throw FormatError(origin + ": header lacks 'fortran_order'");
    }
    if (m[1] == "True") throw FormatError(origin + ": fortran_order tensors are not supported");

    if (!std::regex_search(header, m, shape_re)) throw FormatError(origin + ": header lacks 'shape'");
    const std::string dims = m[1];
    static const std::regex dim_re(R"(\s*(\d+)\s*(,|$))");
    for (auto it = std::sregex_iterator(dims.begin(), dims.end(), dim_re); it != std::sregex_iterator();
         ++it) {
        t.shape.push_back(static_cast<std::size_t>(std::stoull((*it)[1])));
    }
    if (t.shape.size() != 2 && t.shape.size() != 3) {
        throw FormatError(origin + ": only 2-D or 3-D tensors are supported, got shape (" + dims + ")");
    }

    const std::size_t expected = t.element_count() * item_size(t.dtype);
    const std::size_t available = bytes.size() - kPreamble - header_len;
    if (available != expected) {
        throw SizeError(origin + ": payload holds " + std::to_string(available) + " bytes, header declares " +
                        std::to_string(expected));
    }
    const auto* start = bytes.data() + kPreamble + header_len;
    t.payload.assign(start, start + expected);
    return t;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path.string() + ": write failed");
}

TensorFile read_tensor(const std::filesystem::path& path) {
    return decode_npy(read_bytes(path), path.string());
}

void write_tensor(const std::filesystem::path& path, const TensorFile& tensor) {
    write_bytes(path, encode_npy(tensor));
}

}  // namespace ubiq
