#ifndef MELPROJ_CLI_HPP
#define MELPROJ_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace melproj {

// Exit codes shared by every command: 0 success, 1 runtime failure,
// 2 configuration error.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ExtractOptions {
    std::filesystem::path manifest;
    std::string family;
    std::vector<int> dims;  // one cache entry per (track, dim)
    std::uint64_t seed = 0;
    std::filesystem::path cache_dir;
    int jobs = 1;
    bool cache_frames = false;  // additionally cache frame-level features
};

/// Writes one aggregated track vector per (track, dim) to the cache,
/// skipping entries whose content digest already matches. Per-track failures
/// are logged and the remaining tracks still extract.
int cmd_extract(const ExtractOptions& options, std::ostream& log);

/// Runs the experiment(s) described by a JSON config file and writes result
/// JSON plus a sweep CSV to the output directory.
int cmd_evaluate(const std::filesystem::path& config_path,
                 const std::filesystem::path& out_override, std::ostream& log);

/// Merges result JSON files into a best-per-(dataset, family) summary table
/// and per-sweep CSV files.
int cmd_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir,
               std::ostream& log);

/// Two-decimal "mean +- std" rendering; `with_std` false drops the spread
/// (single train/test evaluations).
std::string format_score(double mean, double stddev, bool with_std);

}  // namespace melproj

#endif
