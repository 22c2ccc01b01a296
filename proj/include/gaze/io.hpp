// SPDX-License-Identifier: Apache-2.0
//
// Little-endian binary primitives, CSV field formatting, and the ASCII
// portable graymap writer. Binary files are written little-endian
// regardless of host byte order.
#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "gaze/error.hpp"

namespace gaze {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_i32_le(std::ostream& out, std::int32_t v) {
    write_u32_le(out, static_cast<std::uint32_t>(v));
}

inline void write_f64_le(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64_le(out, bits);
}

inline void write_f32_le(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32_le(out, bits);
}

inline std::uint32_t read_u32_le(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("read_u32_le: truncated stream");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline std::uint64_t read_u64_le(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("read_u64_le: truncated stream");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline std::int32_t read_i32_le(std::istream& in) {
    return static_cast<std::int32_t>(read_u32_le(in));
}

inline double read_f64_le(std::istream& in) {
    const std::uint64_t bits = read_u64_le(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline float read_f32_le(std::istream& in) {
    const std::uint32_t bits = read_u32_le(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

// Shortest decimal form that round-trips a double; used for CSV output so
// re-parsing reproduces the in-memory value exactly.
inline std::string format_double(double v) {
    char buf[40];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    if (result.ec != std::errc())
        throw IoError("format_double: conversion failed");
    return std::string(buf, result.ptr);
}

// ASCII portable graymap (P2), one value per cell, max 255.
inline void write_pgm(const std::string& path, std::size_t width, std::size_t height,
                      std::span<const int> pixels) {
    if (pixels.size() != width * height)
        throw DimensionError("write_pgm: pixel count does not match dimensions");
    std::ofstream out(path);
    if (!out) throw IoError("write_pgm: cannot open " + path);
    out << "P2\n" << width << " " << height << "\n255\n";
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            if (c) out << ' ';
            out << pixels[r * width + c];
        }
        out << '\n';
    }
    if (!out) throw IoError("write_pgm: write failed for " + path);
}

// Render weights to 0-255 gray levels, max-normalized; all-zero stays zero.
inline std::vector<int> grayscale_levels(std::span<const double> weights) {
    double hi = 0.0;
    for (double w : weights)
        if (w > hi) hi = w;
    std::vector<int> levels(weights.size(), 0);
    if (hi <= 0.0) return levels;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double scaled = 255.0 * (weights[i] / hi);
        levels[i] = static_cast<int>(scaled + 0.5);
        if (levels[i] > 255) levels[i] = 255;
        if (levels[i] < 0) levels[i] = 0;
    }
    return levels;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace gaze
