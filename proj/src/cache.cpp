#include "melproj/cache.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "melproj/errors.hpp"
#include "melproj/matrix_io.hpp"

namespace melproj {

Fnv1a& Fnv1a::update(std::string_view bytes) {
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= 0x100000001b3ull;
    }
    return *this;
}

Fnv1a& Fnv1a::update_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for digesting");
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
    }
    return *this;
}

std::string digest_hex(std::uint64_t digest) {
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[digest & 0xf];
        digest >>= 4;
    }
    return out;
}

FeatureCache::FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path FeatureCache::entry_path(const std::string& key) const {
    return dir_ / (key + ".mpm");
}

std::filesystem::path FeatureCache::sidecar_path(const std::string& key) const {
    return dir_ / (key + ".json");
}

std::optional<Eigen::MatrixXf> FeatureCache::load(const std::string& key,
                                                  std::uint64_t digest) const {
    const auto meta_path = sidecar_path(key);
    const auto payload_path = entry_path(key);
    if (!std::filesystem::exists(meta_path) || !std::filesystem::exists(payload_path))
        return std::nullopt;
    try {
        std::ifstream meta_in(meta_path);
        const nlohmann::json meta = nlohmann::json::parse(meta_in);
        if (meta.value("digest", "") != digest_hex(digest)) return std::nullopt;
        Eigen::MatrixXf payload = read_matrix_file(payload_path);
        if (meta.value("rows", -1) != payload.rows() || meta.value("cols", -1) != payload.cols())
            return std::nullopt;
        return payload;
    } catch (const std::exception&) {
        return std::nullopt;  // corrupt entries read as misses
    }
}

void FeatureCache::store(const std::string& key, std::uint64_t digest,
                         const Eigen::MatrixXf& payload) const {
    write_matrix_file(entry_path(key), payload);
    nlohmann::json meta;
    meta["digest"] = digest_hex(digest);
    meta["rows"] = payload.rows();
    meta["cols"] = payload.cols();
    const auto meta_path = sidecar_path(key);
    const std::filesystem::path tmp = meta_path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write cache sidecar " + tmp.string());
        out << meta.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, meta_path);
}

std::string cache_key(const std::string& track_id, const std::string& family, int dim) {
    std::string safe;
    safe.reserve(track_id.size());
    for (char c : track_id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        safe.push_back(ok ? c : '_');
    }
    return safe + "__" + family + "__" + std::to_string(dim);
}

}  // namespace melproj
