#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

namespace designham {

/// Locale-independent float formatting: 17 significant digits, enough to
/// round-trip any double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

using CsvCell = std::variant<std::int64_t, double, std::string>;

/// UTF-8, LF line endings, fixed column order, header row.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) body_ += ',';
            body_ += columns_[i];
        }
        body_ += '\n';
    }

    void add_row(const std::vector<CsvCell>& cells) {
        if (cells.size() != columns_.size())
            throw std::invalid_argument("CsvWriter: row width != column count");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            if (const auto* iv = std::get_if<std::int64_t>(&cells[i]))
                body_ += std::to_string(*iv);
            else if (const auto* dv = std::get_if<double>(&cells[i]))
                body_ += format_double(*dv);
            else
                body_ += std::get<std::string>(cells[i]);
        }
        body_ += '\n';
    }

    const std::string& body() const { return body_; }

  private:
    std::vector<std::string> columns_;
    std::string body_;
};

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return std::string(buf);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

}  // namespace designham
