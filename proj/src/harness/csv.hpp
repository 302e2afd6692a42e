#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lasted/error.hpp"

namespace lasted::harness::detail {

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Comma-separated report whose first column is the config hash.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& config_hash,
              const std::vector<std::string>& header)
        : path_(path), hash_(config_hash) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path);
        if (!out_) throw DataError("cannot write " + path.string());
        out_ << "config_hash";
        for (const auto& h : header) out_ << ',' << h;
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        out_ << hash_;
        for (const auto& c : cells) out_ << ',' << c;
        out_ << '\n';
        if (!out_) throw DataError("cannot write " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::string hash_;
    std::ofstream out_;
};

}  // namespace lasted::harness::detail
