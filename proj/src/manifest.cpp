#include "melproj/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "melproj/errors.hpp"

namespace melproj {

namespace {

const char* kHeader[] = {"track_id", "path", "genre", "artist", "split"};
constexpr std::size_t kRequiredColumns = 5;

// Splits one CSV record. Fields may be double-quoted; embedded quotes are
// doubled per RFC 4180. Trailing CR from CRLF input is dropped.
std::vector<std::string> split_csv_row(const std::string& line, std::size_t line_no) {
    std::string row = line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const char c = row[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < row.size() && row[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes)
        throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
    if (!needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

SplitTag parse_split(const std::string& s, std::size_t line_no) {
    if (s.empty()) return SplitTag::none;
    if (s == "train") return SplitTag::train;
    if (s == "test") return SplitTag::test;
    throw ParseError("line " + std::to_string(line_no) + ": split must be 'train', 'test' or empty, got '" + s + "'");
}

std::string split_to_string(SplitTag t) {
    switch (t) {
        case SplitTag::train: return "train";
        case SplitTag::test: return "test";
        default: return "";
    }
}

void validate(const DatasetManifest& m) {
    std::unordered_set<std::string> ids;
    std::set<std::string> genres;
    bool any_train = false, any_test = false, any_tag = false;
    for (const TrackEntry& t : m.tracks) {
        if (!ids.insert(t.track_id).second)
            throw ValidationError("duplicate track_id '" + t.track_id + "'");
        if (t.genre.empty()) throw ValidationError("track '" + t.track_id + "' has empty genre");
        if (t.artist.empty()) throw ValidationError("track '" + t.track_id + "' has empty artist");
        if (t.path.empty()) throw ValidationError("track '" + t.track_id + "' has empty path");
        genres.insert(t.genre);
        if (t.split != SplitTag::none) any_tag = true;
        if (t.split == SplitTag::train) any_train = true;
        if (t.split == SplitTag::test) any_test = true;
    }
    if (genres.size() < 2)
        throw ValidationError("manifest must contain at least 2 distinct genres, found " +
                              std::to_string(genres.size()));
    if (any_tag && !(any_train && any_test))
        throw ValidationError("predefined split must tag both train and test tracks");
}

}  // namespace

bool DatasetManifest::has_predefined_split() const {
    return std::any_of(tracks.begin(), tracks.end(),
                       [](const TrackEntry& t) { return t.split != SplitTag::none; });
}

bool DatasetManifest::has_album() const {
    return std::any_of(tracks.begin(), tracks.end(),
                       [](const TrackEntry& t) { return !t.album.empty(); });
}

std::vector<std::string> DatasetManifest::genres() const {
    std::set<std::string> unique;
    for (const TrackEntry& t : tracks) unique.insert(t.genre);
    return {unique.begin(), unique.end()};
}

DatasetManifest load_manifest(std::istream& in, const std::string& name,
                              std::vector<std::string>* warnings) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty manifest: missing header row");
    const std::vector<std::string> header = split_csv_row(line, 1);
    if (header.size() < kRequiredColumns)
        throw ParseError("line 1: header has " + std::to_string(header.size()) +
                         " columns, expected at least " + std::to_string(kRequiredColumns));
    for (std::size_t i = 0; i < kRequiredColumns; ++i) {
        if (header[i] != kHeader[i])
            throw ParseError("line 1: column " + std::to_string(i + 1) + " must be '" +
                             kHeader[i] + "', got '" + header[i] + "'");
    }
    int album_column = -1;
    for (std::size_t i = kRequiredColumns; i < header.size(); ++i) {
        if (header[i] == "album") {
            album_column = static_cast<int>(i);
        } else if (warnings) {
            warnings->push_back("ignoring unknown manifest column '" + header[i] + "'");
        }
    }

    DatasetManifest manifest;
    manifest.name = name;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_row(line, line_no);
        if (fields.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " columns, got " +
                             std::to_string(fields.size()));
        TrackEntry t;
        t.track_id = fields[0];
        t.path = fields[1];
        t.genre = fields[2];
        t.artist = fields[3];
        t.split = parse_split(fields[4], line_no);
        if (album_column >= 0) t.album = fields[static_cast<std::size_t>(album_column)];
        manifest.tracks.push_back(std::move(t));
    }
    validate(manifest);
    return manifest;
}

DatasetManifest load_manifest_file(const std::filesystem::path& path,
                                   std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    DatasetManifest m = load_manifest(in, path.stem().string(), warnings);
    m.base_dir = path.parent_path();
    return m;
}

void save_manifest(const DatasetManifest& manifest, std::ostream& out) {
    const bool album = manifest.has_album();
    out << "track_id,path,genre,artist,split";
    if (album) out << ",album";
    out << '\n';
    for (const TrackEntry& t : manifest.tracks) {
        write_field(out, t.track_id);
        out << ',';
        write_field(out, t.path);
        out << ',';
        write_field(out, t.genre);
        out << ',';
        write_field(out, t.artist);
        out << ',';
        out << split_to_string(t.split);
        if (album) {
            out << ',';
            write_field(out, t.album);
        }
        out << '\n';
    }
}

std::map<std::string, std::size_t> class_distribution(const DatasetManifest& manifest) {
    std::map<std::string, std::size_t> counts;
    for (const TrackEntry& t : manifest.tracks) ++counts[t.genre];
    return counts;
}

}  // namespace melproj
