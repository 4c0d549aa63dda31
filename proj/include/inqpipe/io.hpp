// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "inqpipe/errors.hpp"
#include "inqpipe/rng.hpp"

namespace inqpipe {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInput("cannot open output file: " + path);
    out << content;
}

/// Calls fn(line, line_no) for every non-empty line; line_no is 1-based.
/// Tolerates CRLF input.
inline void for_each_line(const std::string& path,
                          const std::function<void(const std::string&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(line, line_no);
    }
}

/// FNV-1a 64 digest of a file's bytes, as fixed-width hex.
inline std::string file_digest(const std::string& path) {
    std::string bytes = read_file(path);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
}

/// Fixed-precision decimal rendering; used everywhere a number reaches an
/// output file so that reruns are byte-identical.
inline std::string format_double(double value, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return std::string(buf);
}

/// Row-oriented TSV accumulator.
class TsvWriter {
public:
    explicit TsvWriter(std::vector<std::string> header) { row(header); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += '\t';
            out_ += cells[i];
        }
        out_ += '\n';
    }

    const std::string& str() const { return out_; }

private:
    std::string out_;
};

}  // namespace inqpipe
