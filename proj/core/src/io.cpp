#include "anyon/io.hpp"

#include "anyon/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace anyon {

std::string format_double(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", "cannot read config file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    return os.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::cell(const std::string& s) {
    if (column_ == header_.size())
        throw Error("csv row longer than header");
    if (column_ > 0)
        body_ += ',';
    body_ += s;
    ++column_;
    return *this;
}

CsvTable& CsvTable::cell(double x) { return cell(format_double(x)); }
CsvTable& CsvTable::cell(std::size_t x) { return cell(std::to_string(x)); }

void CsvTable::end_row() {
    if (column_ != header_.size())
        throw Error("csv row shorter than header");
    body_ += '\n';
    column_ = 0;
    ++rows_;
}

std::string CsvTable::str() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i)
        s += (i ? "," : "") + header_[i];
    return s + "\n" + body_;
}

namespace {

void put_le(std::string& out, float f) {
    std::uint32_t u = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b)
        out.push_back(static_cast<char>((u >> (8 * b)) & 0xffu));
}

float get_le(const char* p) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b)
        u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
    return std::bit_cast<float>(u);
}

} // namespace

std::string encode_complex64(std::span<const cplx> values) {
    std::string out;
    out.reserve(8 * values.size());
    for (const cplx& z : values) {
        put_le(out, static_cast<float>(z.real()));
        put_le(out, static_cast<float>(z.imag()));
    }
    return out;
}

ComplexField decode_complex64(std::string_view bytes) {
    if (bytes.size() % 8 != 0)
        throw Error("complex64 payload is not a multiple of 8 bytes");
    ComplexField out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cplx(get_le(bytes.data() + 8 * i), get_le(bytes.data() + 8 * i + 4));
    return out;
}

nlohmann::json complex64_sidecar(const Grid2D& grid, const std::string& data_file) {
    return {{"file", data_file},
            {"dtype", "complex64"},
            {"endianness", "little"},
            {"order", "row-major (ix, iy), x = -box/2 + ix * spacing"},
            {"shape", {grid.n(), grid.n()}},
            {"spacing", grid.spacing()},
            {"box", grid.box()},
            {"origin", {-0.5 * grid.box(), -0.5 * grid.box()}}};
}

RunWriter::RunWriter(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    fs::create_directories(root);
    const std::string stamp = utc_timestamp();
    for (int k = 0;; ++k) {
        fs::path p = root / (k == 0 ? stamp : stamp + "-" + std::to_string(k));
        if (fs::create_directory(p)) {
            dir_ = p;
            break;
        }
        if (k > 10000)
            throw Error("cannot create a run directory under " + root.string());
    }
}

RunWriter::RunWriter(const std::filesystem::path& dir, Existing) : dir_(dir) {
    std::filesystem::create_directories(dir_);
}

void RunWriter::write(const std::string& name, std::string_view bytes, bool binary) {
    std::lock_guard lock(mutex_);
    const auto path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("write failed: " + path.string());
    files_.push_back(name);
}

void RunWriter::text(const std::string& name, const std::string& content) { write(name, content, false); }

void RunWriter::json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n", false); }

void RunWriter::csv(const std::string& name, const CsvTable& table) { write(name, table.str(), false); }

void RunWriter::complex64(const std::string& name, const Grid2D& grid, std::span<const cplx> values,
                          const nlohmann::json& extra) {
    if (values.size() != grid.size())
        throw Error("field export size does not match the grid");
    const std::string data = name + ".c64";
    write(data, encode_complex64(values), true);
    auto side = complex64_sidecar(grid, std::filesystem::path(data).filename().string());
    if (extra.is_object())
        side.update(extra);
    json(name + ".json", side);
}

std::vector<std::string> RunWriter::files() const {
    std::lock_guard lock(mutex_);
    return files_;
}

} // namespace anyon
