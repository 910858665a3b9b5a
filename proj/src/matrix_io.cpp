#include "melproj/matrix_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "melproj/errors.hpp"

namespace melproj {

namespace {

constexpr char kMagic[4] = {'M', 'P', 'R', 'J'};
constexpr std::uint8_t kVersion = 1;

void put_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw IoError("matrix file truncated in header");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::uint32_t float_bits_le(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

float bits_to_float(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

void write_matrix(std::ostream& out, const Eigen::MatrixXf& m) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    put_u64_le(out, static_cast<std::uint64_t>(m.rows()));
    put_u64_le(out, static_cast<std::uint64_t>(m.cols()));
    std::string buf;
    buf.resize(static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()) * 4);
    std::size_t pos = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const float f = m(r, c);
            if (!std::isfinite(f)) throw IoError("matrix contains non-finite values");
            const std::uint32_t u = float_bits_le(f);
            buf[pos++] = static_cast<char>(u & 0xff);
            buf[pos++] = static_cast<char>((u >> 8) & 0xff);
            buf[pos++] = static_cast<char>((u >> 16) & 0xff);
            buf[pos++] = static_cast<char>((u >> 24) & 0xff);
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("matrix write failed");
}

Eigen::MatrixXf read_matrix(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad matrix file magic");
    const int version = in.get();
    if (version != kVersion) throw IoError("unsupported matrix file version " + std::to_string(version));
    const std::uint64_t rows = get_u64_le(in);
    const std::uint64_t cols = get_u64_le(in);
    if (rows > (1ull << 32) || cols > (1ull << 32)) throw IoError("matrix dimensions implausible");
    Eigen::MatrixXf m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::string buf;
    buf.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 4);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError("matrix file truncated in payload");
    std::size_t pos = 0;
    for (std::uint64_t r = 0; r < rows; ++r) {
        for (std::uint64_t c = 0; c < cols; ++c) {
            std::uint32_t u = static_cast<unsigned char>(buf[pos]);
            u |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 1])) << 8;
            u |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 2])) << 16;
            u |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + 3])) << 24;
            pos += 4;
            const float f = bits_to_float(u);
            if (!std::isfinite(f)) throw IoError("matrix payload contains non-finite values");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f;
        }
    }
    return m;
}

void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXf& m) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        write_matrix(out, m);
    }
    std::filesystem::rename(tmp, path);
}

Eigen::MatrixXf read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_matrix(in);
}

}  // namespace melproj
