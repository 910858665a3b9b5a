#ifndef MELPROJ_EVALUATION_HPP
#define MELPROJ_EVALUATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "melproj/audio.hpp"
#include "melproj/classifiers.hpp"
#include "melproj/manifest.hpp"
#include "melproj/projections.hpp"

namespace melproj {

// ---------------------------------------------------------------------------
// Feature families

enum class FeatureFamily { mel_spec, mel_rp, mel_pca, mel_ae, marsyas };

FeatureFamily parse_family(const std::string& name);  // throws ValidationError
std::string family_name(FeatureFamily family);

/// Frame dimensionality before aggregation: 128 for the spectrogram itself,
/// 26 for the handcrafted set, `dim` for the projection families.
int family_frame_dim(FeatureFamily family, int dim);

/// Frame-level features of one clip: the log-Mel matrix for the projection
/// families, the handcrafted matrix for marsyas.
Eigen::MatrixXd frame_features(const AudioClip& clip, FeatureFamily family);

// ---------------------------------------------------------------------------
// Artist-filtered folds

struct FoldAssignment {
    std::unordered_map<std::string, int> fold_of;  // track_id -> fold
    int k = 0;
};

/// Greedy stratified assignment of artist groups (tracks sharing an artist,
/// or an album when the manifest carries one, stay together): groups sorted
/// by track count descending with seeded tie shuffle, each placed in the fold
/// whose class distribution after placement is chi-square closest to the
/// global distribution, ties to the smaller fold. Requires at least k groups.
FoldAssignment make_artist_folds(const DatasetManifest& manifest, int k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
    const DatasetManifest* manifest = nullptr;
    FeatureFamily family = FeatureFamily::mel_rp;
    int dim = 0;  // M or H; ignored for mel-spec and marsyas
    ClassifierKind classifier = ClassifierKind::svm;
    int folds = 10;  // 0 => use the manifest's predefined train/test split
    std::uint64_t seed = 0;
    std::string cache_dir;  // optional frame-feature cache
};

/// One fitted-object record: which track ids a fit consumed, in which fold.
/// fold -1 marks cross-dataset encoder fits, which are exempt from the
/// per-fold disjointness requirement.
struct FitAuditEntry {
    std::string stage;
    int fold = 0;
    std::vector<std::string> track_ids;
};

struct ExperimentResult {
    std::vector<double> per_fold_f1;
    double mean = 0.0;
    double stddev = 0.0;  // population, matching the mean +- std presentation
    std::map<std::string, double> per_class_f1;  // pooled over all test folds
    std::vector<GridPoint> chosen;               // per fold
    std::map<std::string, double> timings_seconds;
    std::vector<FitAuditEntry> audit;
};

/// Full per-fold protocol: every fitted object (projection fit, scaler, grid
/// choice, final model) sees training-fold tracks only; the test fold is
/// scored by weighted F1. Throws on any audited leakage.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const FoldAssignment* shared_folds = nullptr,
                                const Autoencoder* frozen_encoder = nullptr);

/// Cross-dataset protocol: the encoder is trained once on every source frame
/// (labels unused), then frozen for the target dataset's evaluation.
ExperimentResult run_transfer(const std::vector<const DatasetManifest*>& sources,
                              const DatasetManifest& target, int hidden_dim,
                              const ExperimentConfig& base_config);

/// Canonical digest material for cached frame-level features.
std::string frame_cache_params(FeatureFamily family);

}  // namespace melproj

#endif
