#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "melproj/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Music genre classification pipeline: random-projection, PCA, autoencoder and "
                 "handcrafted Mel-spectrogram features with artist-filtered evaluation"};
    app.require_subcommand(1);

    melproj::ExtractOptions extract_opts;
    std::string dims_csv;
    CLI::App* extract = app.add_subcommand("extract", "Extract track vectors into a feature cache");
    extract->add_option("--manifest", extract_opts.manifest, "Dataset manifest CSV")->required();
    extract->add_option("--family", extract_opts.family,
                        "Feature family: mel-spec|mel-rp|mel-pca|mel-ae|marsyas")
        ->required();
    extract->add_option("--dims", extract_opts.dims,
                        "Target dimensionalities (repeatable; ignored for mel-spec/marsyas)");
    extract->add_option("--seed", extract_opts.seed, "Seed for seeded families")->default_val(0);
    extract->add_option("--cache", extract_opts.cache_dir, "Feature cache directory")->required();
    extract->add_option("--jobs", extract_opts.jobs, "Parallel extraction workers")->default_val(1);
    extract->add_flag("--frames", extract_opts.cache_frames,
                      "Also cache frame-level features (larger cache)");

    std::string config_path, out_dir, results_dir;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Run experiments from a JSON config");
    evaluate->add_option("--config", config_path, "Experiment config JSON")->required();
    evaluate->add_option("--out", out_dir, "Output directory (overrides config out_dir)");

    CLI::App* report = app.add_subcommand("report", "Summarize result JSON files");
    report->add_option("--results", results_dir, "Directory of result JSON files")->required();
    report->add_option("--out", out_dir, "Output directory for summary files")->default_val("report");

    CLI11_PARSE(app, argc, argv);

    if (extract->parsed()) {
        if (extract_opts.dims.empty()) extract_opts.dims = {0};
        return melproj::cmd_extract(extract_opts, std::cerr);
    }
    if (evaluate->parsed()) return melproj::cmd_evaluate(config_path, out_dir, std::cerr);
    if (report->parsed())
        return melproj::cmd_report(results_dir, out_dir.empty() ? "report" : out_dir, std::cerr);
    return melproj::kExitConfig;
}
