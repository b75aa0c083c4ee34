#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace striplab::io {

inline constexpr const char* kVersionString = "striplab 0.1.0";

/// Pinned run-artifact float format: 17 significant digits, scientific
/// notation, so every double round-trips exactly and reruns are
/// byte-identical. Non-finite values normalize to "nan", "inf", "-inf".
std::string format_float(double v);

std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_hex(const std::string& bytes);

/// Accumulates a CSV table in memory; all writes go through format_float.
/// Rows must match the header width.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<double>& row);
    std::size_t rows() const { return rows_; }

    /// Header line plus all rows, "\n" line endings.
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::string body_;
    std::size_t rows_ = 0;
};

/// Whole-file helpers; write_file creates missing parent directories.
/// Both throw std::runtime_error naming the path on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace striplab::io
