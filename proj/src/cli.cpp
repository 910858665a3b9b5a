#include "melproj/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <thread>

#include "melproj/aggregation.hpp"
#include "melproj/cache.hpp"
#include "melproj/errors.hpp"
#include "melproj/evaluation.hpp"
#include "melproj/handcrafted.hpp"
#include "melproj/rng.hpp"
#include "melproj/spectral.hpp"

namespace melproj {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int count = std::min<int>(jobs, static_cast<int>(n));
    workers.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

fs::path resolve_track_path(const DatasetManifest& manifest, const TrackEntry& t) {
    fs::path p(t.path);
    if (p.is_relative() && !manifest.base_dir.empty()) p = manifest.base_dir / p;
    return p;
}

std::string vector_cache_params(FeatureFamily family, int dim, std::uint64_t seed) {
    const FeatureFamily frames_kind =
        family == FeatureFamily::marsyas ? FeatureFamily::marsyas : FeatureFamily::mel_spec;
    std::string params = "vector-v1|" + frame_cache_params(frames_kind) +
                         "|family=" + family_name(family) + "|dim=" + std::to_string(dim) +
                         "|deltas=centered-replicate|texture=216|hop=1|stats=mean-popvar";
    if (family == FeatureFamily::mel_rp || family == FeatureFamily::mel_ae)
        params += "|seed=" + std::to_string(seed);
    return params;
}

// ---------------------------------------------------------------------------
// extract

struct TrackWork {
    std::uint64_t audio_digest = 0;
    Eigen::MatrixXd frames;  // frame-level features, filled on demand
    bool have_frames = false;
    std::string error;
};

}  // namespace

int cmd_extract(const ExtractOptions& options, std::ostream& log) {
    FeatureFamily family;
    try {
        family = parse_family(options.family);
        if (options.dims.empty()) throw ValidationError("at least one --dims value is required");
        if (options.cache_dir.empty()) throw ValidationError("--cache directory is required");
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    DatasetManifest manifest;
    FeatureCache cache{fs::path()};
    try {
        std::vector<std::string> warnings;
        manifest = load_manifest_file(options.manifest, &warnings);
        for (const std::string& w : warnings) log << "warning: " << w << '\n';
        cache = FeatureCache(options.cache_dir);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }

    const FeatureFamily frames_kind =
        family == FeatureFamily::marsyas ? FeatureFamily::marsyas : FeatureFamily::mel_spec;
    const int frames_width =
        frames_kind == FeatureFamily::marsyas ? kHandcraftedDims : kMelBands;
    const std::size_t n = manifest.tracks.size();
    std::vector<TrackWork> work(n);

    // Per-track audio digests first; manifest-fitted families fold every
    // track's digest into the key so any audio change invalidates all entries.
    for (std::size_t i = 0; i < n; ++i) {
        try {
            work[i].audio_digest =
                Fnv1a().update_file(resolve_track_path(manifest, manifest.tracks[i])).digest();
        } catch (const Error& e) {
            work[i].error = e.what();
        }
    }
    const bool manifest_fit =
        family == FeatureFamily::mel_pca || family == FeatureFamily::mel_ae;
    std::uint64_t manifest_digest = 0;
    if (manifest_fit) {
        Fnv1a acc;
        for (std::size_t i = 0; i < n; ++i) {
            acc.update(manifest.tracks[i].track_id);
            acc.update(digest_hex(work[i].audio_digest));
        }
        manifest_digest = acc.digest();
    }

    auto frame_entry_key = [&](std::size_t i) {
        return cache_key(manifest.name + "__" + manifest.tracks[i].track_id,
                         "frames-" + family_name(frames_kind), frames_width);
    };
    auto frame_entry_digest = [&](std::size_t i) {
        return Fnv1a()
            .update(digest_hex(work[i].audio_digest))
            .update(frame_cache_params(frames_kind))
            .digest();
    };

    auto load_frames = [&](std::size_t i) {
        if (work[i].have_frames || !work[i].error.empty()) return;
        try {
            if (options.cache_frames) {
                if (auto hit = cache.load(frame_entry_key(i), frame_entry_digest(i))) {
                    work[i].frames = hit->cast<double>();
                    work[i].have_frames = true;
                    return;
                }
            }
            const AudioClip clip = load_audio(resolve_track_path(manifest, manifest.tracks[i]));
            work[i].frames = frame_features(clip, frames_kind);
            work[i].have_frames = true;
            if (options.cache_frames)
                cache.store(frame_entry_key(i), frame_entry_digest(i), work[i].frames.cast<float>());
        } catch (const Error& e) {
            work[i].error = e.what();
        }
    };

    std::size_t written = 0, skipped = 0;
    for (int dim : options.dims) {
        const int frame_dim = family_frame_dim(family, dim);
        auto vector_digest = [&](std::size_t i) {
            Fnv1a acc;
            acc.update(digest_hex(work[i].audio_digest));
            if (manifest_fit) acc.update(digest_hex(manifest_digest));
            acc.update(vector_cache_params(family, frame_dim, options.seed));
            return acc.digest();
        };
        auto vector_key = [&](std::size_t i) {
            return cache_key(manifest.name + "__" + manifest.tracks[i].track_id,
                             family_name(family), frame_dim);
        };

        std::vector<bool> pending(n, false);
        std::size_t n_pending = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!work[i].error.empty()) continue;
            if (cache.load(vector_key(i), vector_digest(i)).has_value()) {
                ++skipped;
            } else {
                pending[i] = true;
                ++n_pending;
            }
        }
        if (n_pending == 0) continue;

        // Frame features: everything for manifest-fitted families, pending
        // tracks otherwise.
        parallel_for(n, options.jobs, [&](std::size_t i) {
            if (manifest_fit || pending[i]) load_frames(i);
        });

        RandomProjection rp;
        PcaModel pca;
        Autoencoder ae;
        try {
            switch (family) {
                case FeatureFamily::mel_rp:
                    rp = make_random_projection(derive_seed(options.seed, "rp"), frame_dim,
                                                kMelBands);
                    break;
                case FeatureFamily::mel_pca: {
                    PcaAccumulator acc;
                    for (std::size_t i = 0; i < n; ++i)
                        if (work[i].have_frames) acc.add(work[i].frames);
                    pca = acc.finalize(frame_dim);
                    break;
                }
                case FeatureFamily::mel_ae: {
                    Eigen::Index rows = 0;
                    for (std::size_t i = 0; i < n; ++i)
                        if (work[i].have_frames) rows += work[i].frames.rows();
                    if (rows == 0) throw ValidationError("no decodable tracks to fit on");
                    Eigen::MatrixXd all(rows, kMelBands);
                    Eigen::Index at = 0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (!work[i].have_frames) continue;
                        all.middleRows(at, work[i].frames.rows()) = work[i].frames;
                        at += work[i].frames.rows();
                    }
                    ae = train_autoencoder(all, frame_dim, derive_seed(options.seed, "ae")).first;
                    break;
                }
                default: break;
            }
        } catch (const Error& e) {
            log << "error: fitting " << family_name(family) << " d=" << frame_dim << ": "
                << e.what() << '\n';
            for (std::size_t i = 0; i < n; ++i)
                if (pending[i] && work[i].error.empty()) work[i].error = "family fit failed";
            continue;
        }

        for (std::size_t i = 0; i < n; ++i) {
            if (!pending[i] || !work[i].have_frames) continue;
            try {
                Eigen::MatrixXd projected;
                switch (family) {
                    case FeatureFamily::mel_spec:
                    case FeatureFamily::marsyas: projected = work[i].frames; break;
                    case FeatureFamily::mel_rp: projected = project(work[i].frames, rp); break;
                    case FeatureFamily::mel_pca: projected = pca_transform(work[i].frames, pca); break;
                    case FeatureFamily::mel_ae: projected = encode(work[i].frames, ae); break;
                }
                const Eigen::VectorXd vec = aggregate_track(projected);
                cache.store(vector_key(i), vector_digest(i),
                            vec.transpose().cast<float>().eval());
                ++written;
            } catch (const Error& e) {
                work[i].error = e.what();
            }
        }
    }

    bool any_failed = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!work[i].error.empty()) {
            any_failed = true;
            log << "error: track '" << manifest.tracks[i].track_id << "': " << work[i].error
                << '\n';
        }
    }
    log << "extracted " << written << " vectors, " << skipped << " cache hits\n";
    return any_failed ? kExitRuntime : kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

const json& require_field(const json& j, const std::string& field) {
    if (!j.contains(field)) throw ConfigError(field, "required field is missing");
    return j.at(field);
}

std::string require_string(const json& j, const std::string& field) {
    const json& v = require_field(j, field);
    if (!v.is_string()) throw ConfigError(field, "must be a string");
    return v.get<std::string>();
}

struct EvaluateConfig {
    std::string name;
    fs::path manifest_path;
    FeatureFamily family;
    std::vector<int> dims;
    ClassifierKind classifier;
    int folds = 10;
    std::uint64_t seed = 0;
    std::string cache_dir;
    fs::path out_dir = "results";
    bool transfer = false;
    std::vector<fs::path> transfer_sources;
    int transfer_hidden = 0;
};

EvaluateConfig parse_evaluate_config(const json& j) {
    EvaluateConfig cfg;
    cfg.manifest_path = require_string(j, "manifest");
    try {
        cfg.family = parse_family(require_string(j, "family"));
    } catch (const ValidationError& e) {
        throw ConfigError("family", e.what());
    }

    if (cfg.family == FeatureFamily::mel_spec || cfg.family == FeatureFamily::marsyas) {
        cfg.dims = {0};  // frame dim is fixed by the family
    } else {
        const json& dims = require_field(j, "dims");
        if (!dims.is_array() || dims.empty())
            throw ConfigError("dims", "must be a non-empty array of integers");
        for (const json& d : dims) {
            if (!d.is_number_integer() || d.get<int>() < 1)
                throw ConfigError("dims", "entries must be positive integers");
            cfg.dims.push_back(d.get<int>());
        }
    }

    const std::string classifier = require_string(j, "classifier");
    if (classifier == "svm") cfg.classifier = ClassifierKind::svm;
    else if (classifier == "knn") cfg.classifier = ClassifierKind::knn;
    else throw ConfigError("classifier", "must be 'svm' or 'knn', got '" + classifier + "'");

    const json& folds = require_field(j, "folds");
    if (folds.is_string() && folds.get<std::string>() == "predefined") {
        cfg.folds = 0;
    } else if (folds.is_number_integer() && folds.get<int>() >= 2) {
        cfg.folds = folds.get<int>();
    } else {
        throw ConfigError("folds", "must be an integer >= 2 or \"predefined\"");
    }

    const json& seed = require_field(j, "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
        throw ConfigError("seed", "must be an integer");
    cfg.seed = seed.get<std::uint64_t>();

    if (j.contains("name")) cfg.name = require_string(j, "name");
    if (j.contains("cache_dir")) cfg.cache_dir = require_string(j, "cache_dir");
    if (j.contains("out_dir")) cfg.out_dir = require_string(j, "out_dir");

    if (j.contains("transfer")) {
        const json& t = j.at("transfer");
        if (!t.is_object()) throw ConfigError("transfer", "must be an object");
        if (cfg.family != FeatureFamily::mel_ae)
            throw ConfigError("transfer", "transfer experiments require family mel-ae");
        const json& sources = require_field(t, "sources");
        if (!sources.is_array() || sources.empty())
            throw ConfigError("transfer.sources", "must be a non-empty array of manifest paths");
        for (const json& s : sources) {
            if (!s.is_string()) throw ConfigError("transfer.sources", "entries must be strings");
            cfg.transfer_sources.emplace_back(s.get<std::string>());
        }
        const json& hidden = require_field(t, "hidden");
        if (!hidden.is_number_integer() || hidden.get<int>() < 1)
            throw ConfigError("transfer.hidden", "must be a positive integer");
        cfg.transfer_hidden = hidden.get<int>();
        cfg.transfer = true;
    }
    return cfg;
}

json result_to_json(const EvaluateConfig& cfg, const ExperimentResult& result, int dim) {
    json out;
    out["config"] = {
        {"dataset", cfg.name},
        {"manifest", cfg.manifest_path.string()},
        {"family", family_name(cfg.family)},
        {"dim", dim},
        {"classifier", cfg.classifier == ClassifierKind::svm ? "svm" : "knn"},
        {"folds", cfg.folds == 0 ? json("predefined") : json(cfg.folds)},
        {"seed", cfg.seed},
    };
    out["per_fold"] = result.per_fold_f1;
    out["mean"] = result.mean;
    out["std"] = result.stddev;
    out["per_class"] = result.per_class_f1;
    json chosen = json::array();
    for (const GridPoint& p : result.chosen) {
        if (cfg.classifier == ClassifierKind::svm) chosen.push_back({{"C", p.svm_c}});
        else chosen.push_back({{"k", p.knn_k}});
    }
    out["chosen"] = chosen;
    out["timings"] = result.timings_seconds;
    return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

std::string csv_row(int dim, const std::string& classifier, const std::string& family,
                    double mean, double stddev) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.6f,%.6f", dim, classifier.c_str(), family.c_str(),
                  mean, stddev);
    return buf;
}

}  // namespace

int cmd_evaluate(const fs::path& config_path, const fs::path& out_override, std::ostream& log) {
    EvaluateConfig cfg;
    try {
        std::ifstream in(config_path);
        if (!in) throw IoError("cannot open config " + config_path.string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
        }
        cfg = parse_evaluate_config(j);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    if (!out_override.empty()) cfg.out_dir = out_override;

    try {
        std::vector<std::string> warnings;
        const DatasetManifest manifest = load_manifest_file(cfg.manifest_path, &warnings);
        for (const std::string& w : warnings) log << "warning: " << w << '\n';
        if (cfg.name.empty()) cfg.name = manifest.name;
        fs::create_directories(cfg.out_dir);

        ExperimentConfig base;
        base.manifest = &manifest;
        base.family = cfg.family;
        base.classifier = cfg.classifier;
        base.folds = cfg.folds;
        base.seed = cfg.seed;
        base.cache_dir = cfg.cache_dir;

        const std::string classifier_name = cfg.classifier == ClassifierKind::svm ? "svm" : "knn";
        std::vector<std::string> csv_rows;

        if (cfg.transfer) {
            std::vector<DatasetManifest> sources;
            std::vector<const DatasetManifest*> source_ptrs;
            sources.reserve(cfg.transfer_sources.size());
            for (const fs::path& p : cfg.transfer_sources) sources.push_back(load_manifest_file(p));
            for (const DatasetManifest& s : sources) source_ptrs.push_back(&s);
            const ExperimentResult result =
                run_transfer(source_ptrs, manifest, cfg.transfer_hidden, base);
            const json out = result_to_json(cfg, result, cfg.transfer_hidden);
            const fs::path file = cfg.out_dir / (cfg.name + "_transfer_mel-ae_" + classifier_name +
                                                 "_d" + std::to_string(cfg.transfer_hidden) + ".json");
            write_text_file(file, out.dump(2) + "\n");
            log << "wrote " << file.string() << " (f1 "
                << format_score(result.mean, result.stddev, result.per_fold_f1.size() > 1) << ")\n";
            csv_rows.push_back(csv_row(cfg.transfer_hidden, classifier_name,
                                       family_name(cfg.family), result.mean, result.stddev));
        } else {
            // One shared fold layout isolates the dimension effect in sweeps.
            std::optional<FoldAssignment> shared;
            if (cfg.folds != 0)
                shared = make_artist_folds(manifest, cfg.folds, derive_seed(cfg.seed, "folds"));
            for (int dim : cfg.dims) {
                ExperimentConfig config = base;
                config.dim = dim;
                const int effective_dim = family_frame_dim(cfg.family, dim);
                const ExperimentResult result =
                    run_experiment(config, shared.has_value() ? &*shared : nullptr);
                const json out = result_to_json(cfg, result, effective_dim);
                const fs::path file =
                    cfg.out_dir / (cfg.name + "_" + family_name(cfg.family) + "_" +
                                   classifier_name + "_d" + std::to_string(effective_dim) + ".json");
                write_text_file(file, out.dump(2) + "\n");
                log << "wrote " << file.string() << " (f1 "
                    << format_score(result.mean, result.stddev, result.per_fold_f1.size() > 1)
                    << ")\n";
                csv_rows.push_back(csv_row(effective_dim, classifier_name, family_name(cfg.family),
                                           result.mean, result.stddev));
            }
        }

        std::string csv = "dim,classifier,family,mean_f1,std_f1\n";
        for (const std::string& row : csv_rows) csv += row + "\n";
        const fs::path sweep = cfg.out_dir / (cfg.name + "_" + family_name(cfg.family) + "_" +
                                              classifier_name + "_sweep.csv");
        write_text_file(sweep, csv);
        log << "wrote " << sweep.string() << '\n';
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------------------
// report

std::string format_score(double mean, double stddev, bool with_std) {
    char buf[64];
    if (with_std)
        std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean, stddev);
    else
        std::snprintf(buf, sizeof(buf), "%.2f", mean);
    return buf;
}

int cmd_report(const fs::path& results_dir, const fs::path& out_dir, std::ostream& log) {
    struct Row {
        std::string dataset, family, classifier;
        int dim = 0;
        double mean = 0, stddev = 0;
        std::size_t fold_count = 0;
    };
    std::vector<Row> rows;
    try {
        if (fs::exists(results_dir)) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(results_dir))
                if (entry.path().extension() == ".json") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const fs::path& file : files) {
                std::ifstream in(file);
                json j;
                try {
                    j = json::parse(in);
                } catch (const json::exception&) {
                    log << "warning: skipping unparsable " << file.string() << '\n';
                    continue;
                }
                if (!j.contains("config") || !j.contains("mean")) {
                    log << "warning: skipping non-result file " << file.string() << '\n';
                    continue;
                }
                Row r;
                r.dataset = j["config"].value("dataset", "?");
                r.family = j["config"].value("family", "?");
                r.classifier = j["config"].value("classifier", "?");
                r.dim = j["config"].value("dim", 0);
                r.mean = j["mean"].get<double>();
                r.stddev = j.value("std", 0.0);
                r.fold_count = j.value("per_fold", std::vector<double>{}).size();
                rows.push_back(r);
            }
        }
        if (rows.empty()) {
            log << "error: no result JSON files in " << results_dir.string() << '\n';
            return kExitRuntime;
        }
        fs::create_directories(out_dir);

        // Best score per (dataset, family): the sweep argmax by mean.
        std::map<std::pair<std::string, std::string>, Row> best;
        for (const Row& r : rows) {
            auto key = std::make_pair(r.dataset, r.family);
            auto it = best.find(key);
            if (it == best.end() || r.mean > it->second.mean) best[key] = r;
        }
        std::string summary_csv = "dataset,family,classifier,dim,mean_f1,std_f1,score\n";
        std::string summary_txt;
        for (const auto& [key, r] : best) {
            const std::string score = format_score(r.mean, r.stddev, r.fold_count > 1);
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%.6f,%.6f,%s\n", r.dataset.c_str(),
                          r.family.c_str(), r.classifier.c_str(), r.dim, r.mean, r.stddev,
                          score.c_str());
            summary_csv += buf;
            std::snprintf(buf, sizeof(buf), "%-16s %-10s %-4s d=%-5d %s\n", r.dataset.c_str(),
                          r.family.c_str(), r.classifier.c_str(), r.dim, score.c_str());
            summary_txt += buf;
        }
        write_text_file(out_dir / "summary.csv", summary_csv);
        write_text_file(out_dir / "summary.txt", summary_txt);
        log << summary_txt;

        // Per-sweep CSVs, dimension-sorted.
        std::map<std::tuple<std::string, std::string, std::string>, std::vector<Row>> sweeps;
        for (const Row& r : rows) sweeps[{r.dataset, r.family, r.classifier}].push_back(r);
        for (auto& [key, sweep_rows] : sweeps) {
            std::sort(sweep_rows.begin(), sweep_rows.end(),
                      [](const Row& a, const Row& b) { return a.dim < b.dim; });
            std::string csv = "dim,classifier,family,mean_f1,std_f1\n";
            for (const Row& r : sweep_rows)
                csv += csv_row(r.dim, r.classifier, r.family, r.mean, r.stddev) + "\n";
            const auto& [dataset, family, classifier] = key;
            write_text_file(out_dir / (dataset + "_" + family + "_" + classifier + "_sweep.csv"),
                            csv);
        }
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace melproj
