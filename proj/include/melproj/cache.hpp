#ifndef MELPROJ_CACHE_HPP
#define MELPROJ_CACHE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace melproj {

/// Streaming FNV-1a 64-bit digest.
class Fnv1a {
public:
    Fnv1a& update(std::string_view bytes);
    Fnv1a& update_file(const std::filesystem::path& path);  // throws IoError
    std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string digest_hex(std::uint64_t digest);

/// Content-addressed matrix store. An entry is valid only while its recorded
/// digest (audio bytes plus pipeline parameters) matches; digest mismatches
/// read as absent. Writes go to a temp file first, then rename into place.
class FeatureCache {
public:
    explicit FeatureCache(std::filesystem::path dir);  // creates the directory

    std::optional<Eigen::MatrixXf> load(const std::string& key, std::uint64_t digest) const;
    void store(const std::string& key, std::uint64_t digest, const Eigen::MatrixXf& payload) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;
    std::filesystem::path sidecar_path(const std::string& key) const;
    std::filesystem::path dir_;
};

/// Filesystem-safe cache key from its identifying parts.
std::string cache_key(const std::string& track_id, const std::string& family, int dim);

}  // namespace melproj

#endif
