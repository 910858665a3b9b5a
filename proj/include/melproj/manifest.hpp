#ifndef MELPROJ_MANIFEST_HPP
#define MELPROJ_MANIFEST_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace melproj {

enum class SplitTag { none, train, test };

struct TrackEntry {
    std::string track_id;
    std::string path;
    std::string genre;
    std::string artist;
    SplitTag split = SplitTag::none;
    std::string album;  // optional column; enables album-grouped folds
};

/// Flat declarative index binding audio files to genre and artist labels.
/// Immutable after load; safe to share across threads.
struct DatasetManifest {
    std::string name;
    std::vector<TrackEntry> tracks;
    int sample_rate_target = 44100;
    std::filesystem::path base_dir;  // relative track paths resolve against this

    bool has_predefined_split() const;
    bool has_album() const;
    std::vector<std::string> genres() const;  // sorted unique
};

/// Parses the manifest CSV (header: track_id,path,genre,artist,split).
/// Extra columns other than `album` are ignored; a note per ignored column is
/// appended to `warnings` when given. Throws ParseError with a line number on
/// malformed rows and ValidationError on invariant violations.
DatasetManifest load_manifest(std::istream& in, const std::string& name = "",
                              std::vector<std::string>* warnings = nullptr);

DatasetManifest load_manifest_file(const std::filesystem::path& path,
                                   std::vector<std::string>* warnings = nullptr);

/// Inverse of load_manifest; reloading the output reproduces the manifest.
void save_manifest(const DatasetManifest& manifest, std::ostream& out);

/// Track count per genre; absent genres never appear with count zero.
std::map<std::string, std::size_t> class_distribution(const DatasetManifest& manifest);

}  // namespace melproj

#endif
