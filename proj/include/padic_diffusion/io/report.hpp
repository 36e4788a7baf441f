#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "../errors.hpp"
#include "config.hpp"

namespace padic_diffusion::io {

/// %.17g, enough digits to round-trip any double.
inline std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

/// A CSV cell: a double, an integer, or literal text.
class Cell {
public:
    Cell(double v) : text_(format_number(v)) {}
    Cell(int v) : text_(std::to_string(v)) {}
    Cell(long v) : text_(std::to_string(v)) {}
    Cell(long long v) : text_(std::to_string(v)) {}
    Cell(unsigned v) : text_(std::to_string(v)) {}
    Cell(unsigned long v) : text_(std::to_string(v)) {}
    Cell(unsigned long long v) : text_(std::to_string(v)) {}
    Cell(bool v) : text_(v ? "1" : "0") {}
    Cell(const char* v) : text_(v) {}
    Cell(std::string v) : text_(std::move(v)) {}

    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot write " + path.string());
        write_line(header);
    }

    void row(std::initializer_list<Cell> cells) {
        std::vector<std::string> texts;
        for (const Cell& c : cells) texts.push_back(c.text());
        write_line(texts);
    }

private:
    void write_line(const std::vector<std::string>& fields) {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) out_ << ',';
            out_ << fields[k];
        }
        out_ << '\n';
    }

    std::ofstream out_;
};

/// JSON numbers cannot be inf/nan; those become null.
inline json number(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

inline void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 failed for " + path.string());
    }
    std::ostringstream hex;
    for (unsigned int k = 0; k < length; ++k) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", digest[k]);
        hex << buf;
    }
    return hex.str();
}

/**
 * manifest.json: config echo, tool version, per-artifact checksums and sizes.
 * Wall-clock data sits under "timing" so reruns can be compared without it.
 */
inline void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& version,
                           const json& resolved, const std::vector<std::string>& artifacts, double wall_seconds,
                           const json& run = json::object()) {
    json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["tool"] = "padic_diffusion";
    manifest["version"] = version;
    manifest["command"] = command;
    manifest["config"] = resolved;
    manifest["run"] = run;
    json files = json::array();
    for (const std::string& name : artifacts) {
        const auto path = dir / name;
        files.push_back({{"file", name}, {"sha256", sha256_file(path)}, {"bytes", std::filesystem::file_size(path)}});
    }
    manifest["artifacts"] = files;
    manifest["timing"] = {{"wall_clock_seconds", wall_seconds}};
    write_json(dir / "manifest.json", manifest);
}

} // namespace padic_diffusion::io
