#pragma once

// Deliberately naive NPY header reader for cross-checking ubiq's writer.

#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace oracle {

struct NpyHeader {
    bool magic_ok = false;
    int major = 0;
    int minor = 0;
    std::size_t header_len = 0;
    std::string dict;
    std::string descr;
    std::string shape;  // text between the shape parentheses, e.g. "128, 128"
    bool fortran = true;
    std::size_t payload_offset = 0;
    std::size_t file_size = 0;
};

inline NpyHeader read_npy_header(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    NpyHeader h;
    h.file_size = bytes.size();
    if (bytes.size() < 10) return h;
    h.magic_ok = static_cast<unsigned char>(bytes[0]) == 0x93 && std::string(bytes.begin() + 1, bytes.begin() + 6) == "NUMPY";
    h.major = bytes[6];
    h.minor = bytes[7];
    h.header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
    h.dict.assign(bytes.begin() + 10, bytes.begin() + 10 + static_cast<std::ptrdiff_t>(h.header_len));
    h.payload_offset = 10 + h.header_len;

    const auto d = h.dict.find("'descr': '");
    if (d != std::string::npos) {
        const auto start = d + 10;
        h.descr = h.dict.substr(start, h.dict.find('\'', start) - start);
    }
    h.fortran = h.dict.find("'fortran_order': False") == std::string::npos;
    const auto s = h.dict.find("'shape': (");
    if (s != std::string::npos) {
        const auto start = s + 10;
        h.shape = h.dict.substr(start, h.dict.find(')', start) - start);
    }
    return h;
}

}  // namespace oracle
