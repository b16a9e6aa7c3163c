#pragma once

// Run-directory persistence: CSV and JSON text, little-endian complex64
// field exports with a JSON sidecar, and SHA-256 provenance hashes.

#include "anyon/grid.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anyon {

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

std::string sha256_hex(std::string_view bytes);
// Throws ConfigError (empty path) when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

// UTC, "YYYYMMDDTHHMMSSZ"
std::string utc_timestamp();

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& cell(double x);
    CsvTable& cell(std::size_t x);
    CsvTable& cell(const std::string& s);
    void end_row();

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_; }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::string body_;
    std::size_t column_ = 0;
    std::size_t rows_ = 0;
};

// Row-major (ix, iy) samples as interleaved float32 (re, im), little endian.
std::string encode_complex64(std::span<const cplx> values);
ComplexField decode_complex64(std::string_view bytes);
nlohmann::json complex64_sidecar(const Grid2D& grid, const std::string& data_file);

// Owns one run directory; every file of a run is written through it.
// Thread-safe.
class RunWriter {
public:
    // Creates root/<timestamp> (with a numeric suffix on collision).
    explicit RunWriter(const std::filesystem::path& root);
    struct Existing {};
    // Writes into dir itself (created if missing).
    RunWriter(const std::filesystem::path& dir, Existing);

    const std::filesystem::path& dir() const { return dir_; }

    void text(const std::string& name, const std::string& content);
    void json(const std::string& name, const nlohmann::json& j);
    void csv(const std::string& name, const CsvTable& table);
    // name.c64 plus name.json
    void complex64(const std::string& name, const Grid2D& grid, std::span<const cplx> values,
                   const nlohmann::json& extra = {});

    std::vector<std::string> files() const;

private:
    void write(const std::string& name, std::string_view bytes, bool binary);

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::vector<std::string> files_;
};

} // namespace anyon
