#include "melproj/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <unordered_set>

#include "melproj/aggregation.hpp"
#include "melproj/cache.hpp"
#include "melproj/errors.hpp"
#include "melproj/handcrafted.hpp"
#include "melproj/metrics.hpp"
#include "melproj/rng.hpp"
#include "melproj/spectral.hpp"

namespace melproj {

// ---------------------------------------------------------------------------
// Families

FeatureFamily parse_family(const std::string& name) {
    if (name == "mel-spec") return FeatureFamily::mel_spec;
    if (name == "mel-rp") return FeatureFamily::mel_rp;
    if (name == "mel-pca") return FeatureFamily::mel_pca;
    if (name == "mel-ae") return FeatureFamily::mel_ae;
    if (name == "marsyas") return FeatureFamily::marsyas;
    throw ValidationError("unknown feature family '" + name +
                          "' (expected mel-spec|mel-rp|mel-pca|mel-ae|marsyas)");
}

std::string family_name(FeatureFamily family) {
    switch (family) {
        case FeatureFamily::mel_spec: return "mel-spec";
        case FeatureFamily::mel_rp: return "mel-rp";
        case FeatureFamily::mel_pca: return "mel-pca";
        case FeatureFamily::mel_ae: return "mel-ae";
        case FeatureFamily::marsyas: return "marsyas";
    }
    throw ValidationError("invalid feature family");
}

int family_frame_dim(FeatureFamily family, int dim) {
    switch (family) {
        case FeatureFamily::mel_spec: return kMelBands;
        case FeatureFamily::marsyas: return kHandcraftedDims;
        default:
            if (dim < 1) throw ValidationError("projection dimension must be at least 1");
            return dim;
    }
}

Eigen::MatrixXd frame_features(const AudioClip& clip, FeatureFamily family) {
    if (family == FeatureFamily::marsyas) return marsyas_features(clip);
    return log_mel_frames(clip).frames;
}

std::string frame_cache_params(FeatureFamily family) {
    std::string base = "frames-v1|sr=44100|frame=1024|hop=512|window=hann|";
    if (family == FeatureFamily::marsyas)
        return base + "family=marsyas|mfcc=20|rolloff=0.85";
    return base + "family=logmel|mels=128|floor=1e-10";
}

// ---------------------------------------------------------------------------
// Grouping (artist filter, plus album filter when album metadata exists)

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Tracks sharing an artist (or an album, when present) must stay together.
std::vector<std::size_t> group_components(const DatasetManifest& manifest) {
    UnionFind uf(manifest.tracks.size());
    std::map<std::string, std::size_t> by_artist, by_album;
    for (std::size_t i = 0; i < manifest.tracks.size(); ++i) {
        const TrackEntry& t = manifest.tracks[i];
        auto [artist_it, artist_new] = by_artist.emplace(t.artist, i);
        if (!artist_new) uf.unite(artist_it->second, i);
        if (!t.album.empty()) {
            auto [album_it, album_new] = by_album.emplace(t.album, i);
            if (!album_new) uf.unite(album_it->second, i);
        }
    }
    std::vector<std::size_t> component(manifest.tracks.size());
    for (std::size_t i = 0; i < manifest.tracks.size(); ++i) component[i] = uf.find(i);
    return component;
}

std::vector<std::vector<std::size_t>> group_lists(const std::vector<std::size_t>& component) {
    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < component.size(); ++i) by_root[component[i]].push_back(i);
    std::vector<std::vector<std::size_t>> groups;
    groups.reserve(by_root.size());
    for (auto& [root, members] : by_root) groups.push_back(std::move(members));
    return groups;
}

}  // namespace

FoldAssignment make_artist_folds(const DatasetManifest& manifest, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("fold count must be at least 2");
    std::vector<std::vector<std::size_t>> groups = group_lists(group_components(manifest));
    if (groups.size() < static_cast<std::size_t>(k))
        throw ValidationError("fewer artist groups (" + std::to_string(groups.size()) +
                              ") than folds (" + std::to_string(k) + ")");

    // Sort by size descending; ties resolved by a seeded shuffle.
    Rng rng(seed);
    seeded_shuffle(groups, rng);
    std::stable_sort(groups.begin(), groups.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });

    // Global class proportions.
    std::map<std::string, double> global;
    for (const TrackEntry& t : manifest.tracks) global[t.genre] += 1.0;
    const double total = static_cast<double>(manifest.tracks.size());
    for (auto& [genre, count] : global) count /= total;

    std::vector<std::map<std::string, double>> fold_counts(static_cast<std::size_t>(k));
    std::vector<double> fold_sizes(static_cast<std::size_t>(k), 0.0);
    FoldAssignment assignment;
    assignment.k = k;

    for (const auto& group : groups) {
        std::map<std::string, double> group_counts;
        for (std::size_t i : group) group_counts[manifest.tracks[i].genre] += 1.0;

        int best_fold = 0;
        double best_chi = std::numeric_limits<double>::infinity();
        for (int f = 0; f < k; ++f) {
            double candidate_size = fold_sizes[static_cast<std::size_t>(f)];
            for (const auto& [genre, count] : group_counts) candidate_size += count;
            double chi = 0.0;
            for (const auto& [genre, proportion] : global) {
                double have = 0.0;
                auto it = fold_counts[static_cast<std::size_t>(f)].find(genre);
                if (it != fold_counts[static_cast<std::size_t>(f)].end()) have = it->second;
                auto git = group_counts.find(genre);
                if (git != group_counts.end()) have += git->second;
                const double p = have / candidate_size;
                chi += (p - proportion) * (p - proportion) / proportion;
            }
            const bool better =
                chi < best_chi ||
                (chi == best_chi && fold_sizes[static_cast<std::size_t>(f)] <
                                        fold_sizes[static_cast<std::size_t>(best_fold)]);
            if (f == 0 || better) {
                best_chi = chi;
                best_fold = f;
            }
        }
        for (std::size_t i : group) {
            assignment.fold_of[manifest.tracks[i].track_id] = best_fold;
            fold_counts[static_cast<std::size_t>(best_fold)][manifest.tracks[i].genre] += 1.0;
            fold_sizes[static_cast<std::size_t>(best_fold)] += 1.0;
        }
    }
    return assignment;
}

// ---------------------------------------------------------------------------
// Experiment harness

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
    void start(const std::string& stage) {
        stop();
        current_ = stage;
        begin_ = Clock::now();
    }
    void stop() {
        if (!current_.empty()) {
            sink_[current_] += std::chrono::duration<double>(Clock::now() - begin_).count();
            current_.clear();
        }
    }
    ~StageTimer() { stop(); }

private:
    std::map<std::string, double>& sink_;
    std::string current_;
    Clock::time_point begin_;
};

std::filesystem::path resolve_track_path(const DatasetManifest& manifest, const TrackEntry& t) {
    std::filesystem::path p(t.path);
    if (p.is_relative() && !manifest.base_dir.empty()) p = manifest.base_dir / p;
    return p;
}

// Frame-level features for one track, consulting the cache when present.
Eigen::MatrixXd track_frame_features(const DatasetManifest& manifest, const TrackEntry& track,
                                     FeatureFamily family, FeatureCache* cache) {
    const FeatureFamily frames_kind =
        family == FeatureFamily::marsyas ? FeatureFamily::marsyas : FeatureFamily::mel_spec;
    const std::filesystem::path path = resolve_track_path(manifest, track);
    std::uint64_t digest = 0;
    std::string key;
    if (cache != nullptr) {
        digest = Fnv1a()
                     .update_file(path)
                     .update(frame_cache_params(frames_kind))
                     .digest();
        const int width = frames_kind == FeatureFamily::marsyas ? kHandcraftedDims : kMelBands;
        key = cache_key(manifest.name + "__" + track.track_id, "frames-" + family_name(frames_kind),
                        width);
        if (auto hit = cache->load(key, digest)) return hit->cast<double>();
    }
    Eigen::MatrixXd frames;
    try {
        frames = frame_features(load_audio(path), frames_kind);
    } catch (const Error& e) {
        throw Error("track '" + track.track_id + "': " + e.what());
    }
    if (cache != nullptr) cache->store(key, digest, frames.cast<float>());
    return frames;
}

std::vector<std::string> ids_of(const DatasetManifest& manifest,
                                const std::vector<std::size_t>& indices) {
    std::vector<std::string> ids;
    ids.reserve(indices.size());
    for (std::size_t i : indices) ids.push_back(manifest.tracks[i].track_id);
    return ids;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const FoldAssignment* shared_folds,
                                const Autoencoder* frozen_encoder) {
    if (config.manifest == nullptr) throw ValidationError("experiment needs a manifest");
    const DatasetManifest& manifest = *config.manifest;
    const std::size_t n_tracks = manifest.tracks.size();
    const bool fold_dependent_features =
        (config.family == FeatureFamily::mel_pca) ||
        (config.family == FeatureFamily::mel_ae && frozen_encoder == nullptr);
    const int frame_dim = family_frame_dim(config.family, config.dim);
    const int vector_dim = 12 * frame_dim;

    // Label ids from the sorted genre list.
    const std::vector<std::string> genres = manifest.genres();
    std::map<std::string, int> genre_id;
    for (std::size_t g = 0; g < genres.size(); ++g) genre_id[genres[g]] = static_cast<int>(g);
    std::vector<int> labels(n_tracks);
    for (std::size_t i = 0; i < n_tracks; ++i) labels[i] = genre_id[manifest.tracks[i].genre];

    // Group keys shared by fold construction and the grid-search split.
    const std::vector<std::size_t> component = group_components(manifest);
    std::vector<std::string> group_keys(n_tracks);
    for (std::size_t i = 0; i < n_tracks; ++i) group_keys[i] = "g" + std::to_string(component[i]);

    // Fold layout: test track indices per fold.
    std::vector<std::vector<std::size_t>> test_sets;
    if (config.folds == 0) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < n_tracks; ++i) {
            switch (manifest.tracks[i].split) {
                case SplitTag::train: train.push_back(i); break;
                case SplitTag::test: test.push_back(i); break;
                default:
                    throw ValidationError("predefined evaluation requires every track tagged "
                                          "train or test; '" +
                                          manifest.tracks[i].track_id + "' is untagged");
            }
        }
        if (train.empty() || test.empty())
            throw ValidationError("predefined split must contain both train and test tracks");
        test_sets.push_back(std::move(test));
    } else {
        FoldAssignment folds;
        if (shared_folds != nullptr) {
            folds = *shared_folds;
        } else {
            folds = make_artist_folds(manifest, config.folds, derive_seed(config.seed, "folds"));
        }
        test_sets.assign(static_cast<std::size_t>(folds.k), {});
        for (std::size_t i = 0; i < n_tracks; ++i) {
            auto it = folds.fold_of.find(manifest.tracks[i].track_id);
            if (it == folds.fold_of.end())
                throw ValidationError("fold assignment is missing track '" +
                                      manifest.tracks[i].track_id + "'");
            test_sets[static_cast<std::size_t>(it->second)].push_back(i);
        }
    }

    ExperimentResult result;
    StageTimer timer(result.timings_seconds);

    std::unique_ptr<FeatureCache> cache;
    if (!config.cache_dir.empty()) cache = std::make_unique<FeatureCache>(config.cache_dir);

    // Extraction. Fold-independent families collapse straight to track
    // vectors; fold-dependent ones retain per-track frames for refitting.
    timer.start("extract");
    RandomProjection rp;
    if (config.family == FeatureFamily::mel_rp)
        rp = make_random_projection(derive_seed(config.seed, "rp"), config.dim, kMelBands);

    std::vector<Eigen::MatrixXf> track_frames;  // only for fold-dependent families
    Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n_tracks), vector_dim);
    if (fold_dependent_features) track_frames.resize(n_tracks);
    for (std::size_t i = 0; i < n_tracks; ++i) {
        Eigen::MatrixXd frames =
            track_frame_features(manifest, manifest.tracks[i], config.family, cache.get());
        switch (config.family) {
            case FeatureFamily::mel_spec:
            case FeatureFamily::marsyas:
                vectors.row(static_cast<Eigen::Index>(i)) = aggregate_track(frames).transpose();
                break;
            case FeatureFamily::mel_rp:
                vectors.row(static_cast<Eigen::Index>(i)) =
                    aggregate_track(project(frames, rp)).transpose();
                break;
            case FeatureFamily::mel_ae:
                if (frozen_encoder != nullptr) {
                    vectors.row(static_cast<Eigen::Index>(i)) =
                        aggregate_track(encode(frames, *frozen_encoder)).transpose();
                } else {
                    track_frames[i] = frames.cast<float>();
                }
                break;
            case FeatureFamily::mel_pca:
                track_frames[i] = frames.cast<float>();
                break;
        }
    }
    timer.stop();

    std::vector<int> pooled_truth, pooled_pred;
    const std::vector<GridPoint> grid = default_grid(config.classifier);

    for (std::size_t f = 0; f < test_sets.size(); ++f) {
        const std::vector<std::size_t>& test_indices = test_sets[f];
        std::vector<std::size_t> train_indices;
        if (config.folds == 0) {
            for (std::size_t i = 0; i < n_tracks; ++i)
                if (manifest.tracks[i].split == SplitTag::train) train_indices.push_back(i);
        } else {
            std::unordered_set<std::size_t> in_test(test_indices.begin(), test_indices.end());
            for (std::size_t i = 0; i < n_tracks; ++i)
                if (!in_test.contains(i)) train_indices.push_back(i);
        }
        if (test_indices.empty() || train_indices.empty())
            throw ValidationError("fold " + std::to_string(f) + " has an empty side");
        const std::vector<std::string> train_ids = ids_of(manifest, train_indices);
        const int fold_index = static_cast<int>(f);

        // Fold-local feature fit for the projection families that learn.
        Eigen::MatrixXd fold_vectors;
        if (fold_dependent_features) {
            timer.start("fit");
            fold_vectors.resize(static_cast<Eigen::Index>(n_tracks), vector_dim);
            if (config.family == FeatureFamily::mel_pca) {
                PcaAccumulator acc;
                for (std::size_t i : train_indices) acc.add(track_frames[i].cast<double>());
                const PcaModel model = acc.finalize(config.dim);
                result.audit.push_back({"pca", fold_index, train_ids});
                for (std::size_t i = 0; i < n_tracks; ++i)
                    fold_vectors.row(static_cast<Eigen::Index>(i)) =
                        aggregate_track(pca_transform(track_frames[i].cast<double>(), model))
                            .transpose();
            } else {
                Eigen::Index total_rows = 0;
                for (std::size_t i : train_indices) total_rows += track_frames[i].rows();
                Eigen::MatrixXd train_frames(total_rows, kMelBands);
                Eigen::Index at = 0;
                for (std::size_t i : train_indices) {
                    train_frames.middleRows(at, track_frames[i].rows()) =
                        track_frames[i].cast<double>();
                    at += track_frames[i].rows();
                }
                const Autoencoder ae =
                    train_autoencoder(train_frames, config.dim, derive_seed(config.seed, "ae", f))
                        .first;
                result.audit.push_back({"autoencoder", fold_index, train_ids});
                for (std::size_t i = 0; i < n_tracks; ++i)
                    fold_vectors.row(static_cast<Eigen::Index>(i)) =
                        aggregate_track(encode(track_frames[i].cast<double>(), ae)).transpose();
            }
            timer.stop();
        }
        const Eigen::MatrixXd& all_vectors = fold_dependent_features ? fold_vectors : vectors;

        Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train_indices.size()), vector_dim);
        Eigen::MatrixXd x_test(static_cast<Eigen::Index>(test_indices.size()), vector_dim);
        std::vector<int> y_train(train_indices.size()), y_test(test_indices.size());
        std::vector<std::string> train_groups(train_indices.size());
        for (std::size_t i = 0; i < train_indices.size(); ++i) {
            x_train.row(static_cast<Eigen::Index>(i)) =
                all_vectors.row(static_cast<Eigen::Index>(train_indices[i]));
            y_train[i] = labels[train_indices[i]];
            train_groups[i] = group_keys[train_indices[i]];
        }
        for (std::size_t i = 0; i < test_indices.size(); ++i) {
            x_test.row(static_cast<Eigen::Index>(i)) =
                all_vectors.row(static_cast<Eigen::Index>(test_indices[i]));
            y_test[i] = labels[test_indices[i]];
        }

        timer.start("fit");
        const Scaler scaler = fit_scaler(x_train);
        result.audit.push_back({"scaler", fold_index, train_ids});
        const Eigen::MatrixXd xs_train = apply_scaler(scaler, x_train);
        const Eigen::MatrixXd xs_test = apply_scaler(scaler, x_test);
        timer.stop();

        timer.start("grid_search");
        const GridSearchResult gs =
            grid_search(xs_train, y_train, train_groups, config.classifier, grid,
                        derive_seed(config.seed, "grid", f));
        result.audit.push_back({"grid_search", fold_index, train_ids});
        timer.stop();

        timer.start("train");
        const double gamma = 1.0 / static_cast<double>(vector_dim);
        SvmOvo svm;
        KnnModel knn;
        if (config.classifier == ClassifierKind::svm) {
            svm = svm_ovo_train(xs_train, y_train, gs.best.svm_c, gamma);
        } else {
            knn = {xs_train, y_train, gs.best.knn_k};
        }
        result.audit.push_back({"final_model", fold_index, train_ids});
        timer.stop();

        timer.start("predict");
        const std::vector<int> predicted = config.classifier == ClassifierKind::svm
                                               ? svm_ovo_predict(svm, xs_test)
                                               : knn_predict(knn, xs_test);
        timer.stop();

        result.per_fold_f1.push_back(weighted_f1(y_test, predicted));
        result.chosen.push_back(gs.best);
        pooled_truth.insert(pooled_truth.end(), y_test.begin(), y_test.end());
        pooled_pred.insert(pooled_pred.end(), predicted.begin(), predicted.end());

        // Leakage audit: no fitted object in this fold may have consumed a
        // test-fold track.
        std::unordered_set<std::string> test_id_set;
        for (std::size_t i : test_indices) test_id_set.insert(manifest.tracks[i].track_id);
        for (const FitAuditEntry& entry : result.audit) {
            if (entry.fold != fold_index) continue;
            for (const std::string& id : entry.track_ids)
                if (test_id_set.contains(id))
                    throw Error("leakage: fit stage '" + entry.stage + "' consumed test track '" +
                                id + "' in fold " + std::to_string(f));
        }
    }

    const double k = static_cast<double>(result.per_fold_f1.size());
    result.mean = std::accumulate(result.per_fold_f1.begin(), result.per_fold_f1.end(), 0.0) / k;
    double var = 0.0;
    for (double s : result.per_fold_f1) var += (s - result.mean) * (s - result.mean);
    result.stddev = std::sqrt(var / k);

    const std::map<int, double> pooled_f1 = per_class_f1(pooled_truth, pooled_pred);
    for (const auto& [id, score] : pooled_f1)
        result.per_class_f1[genres[static_cast<std::size_t>(id)]] = score;
    return result;
}

ExperimentResult run_transfer(const std::vector<const DatasetManifest*>& sources,
                              const DatasetManifest& target, int hidden_dim,
                              const ExperimentConfig& base_config) {
    if (sources.empty()) throw ValidationError("transfer needs at least one source dataset");

    std::unique_ptr<FeatureCache> cache;
    if (!base_config.cache_dir.empty()) cache = std::make_unique<FeatureCache>(base_config.cache_dir);

    // The encoder sees every source frame; source labels are never read.
    std::vector<Eigen::MatrixXd> frames;
    std::vector<std::string> source_ids;
    Eigen::Index total_rows = 0;
    for (const DatasetManifest* source : sources) {
        for (const TrackEntry& track : source->tracks) {
            frames.push_back(
                track_frame_features(*source, track, FeatureFamily::mel_spec, cache.get()));
            total_rows += frames.back().rows();
            source_ids.push_back(source->name + "/" + track.track_id);
        }
    }
    Eigen::MatrixXd all_frames(total_rows, kMelBands);
    Eigen::Index at = 0;
    for (const Eigen::MatrixXd& f : frames) {
        all_frames.middleRows(at, f.rows()) = f;
        at += f.rows();
    }
    frames.clear();

    const Autoencoder encoder =
        train_autoencoder(all_frames, hidden_dim, derive_seed(base_config.seed, "transfer_ae"))
            .first;

    ExperimentConfig config = base_config;
    config.manifest = &target;
    config.family = FeatureFamily::mel_ae;
    config.dim = hidden_dim;
    ExperimentResult result = run_experiment(config, nullptr, &encoder);
    result.audit.insert(result.audit.begin(), {"transfer_encoder", -1, source_ids});
    return result;
}

}  // namespace melproj
