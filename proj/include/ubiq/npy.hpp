#pragma once

// Minimal NPY v1.0 reader/writer: little-endian float32/float64, C-order, 2-D or 3-D.

#include "ubiq/types.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ubiq {

enum class DType { Float32, Float64 };

std::string descriptor(DType dtype);
std::size_t item_size(DType dtype);

struct TensorFile {
    DType dtype = DType::Float64;
    std::vector<std::size_t> shape;
    std::vector<unsigned char> payload;  // little-endian, row-major

    std::size_t element_count() const;
    std::vector<double> values() const;

    // H×W view of a 2-D tensor, or of a 3-D tensor whose last axis has length 1.
    Plane plane() const;
    // Plane k of a 3-D (N, H, W) stack.
    Plane slice(std::size_t k) const;

    static TensorFile from_values(std::vector<std::size_t> shape, std::span<const double> values,
                                  DType dtype = DType::Float64);
    static TensorFile from_values(std::vector<std::size_t> shape, std::span<const float> values);
    static TensorFile from_plane(const Plane& plane);
    // Stacks equally shaped planes into an (N, H, W) float64 tensor.
    static TensorFile from_planes(std::span<const Plane> planes);

    friend bool operator==(const TensorFile&, const TensorFile&) = default;
};

// Header string as written to disk, including the trailing newline and alignment padding.
std::string npy_header(const TensorFile& tensor);

std::vector<unsigned char> encode_npy(const TensorFile& tensor);
TensorFile decode_npy(std::span<const unsigned char> bytes, const std::string& origin = "<memory>");

TensorFile read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const TensorFile& tensor);

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace ubiq
