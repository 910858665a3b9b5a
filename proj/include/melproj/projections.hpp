#ifndef MELPROJ_PROJECTIONS_HPP
#define MELPROJ_PROJECTIONS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace melproj {

// ---------------------------------------------------------------------------
// Gaussian random projection

/// Dense projection with entries drawn i.i.d. from N(0, 1). The matrix is
/// deliberately left unscaled; downstream feature standardization absorbs the
/// global factor, and distance arguments apply 1/sqrt(M) analytically.
struct RandomProjection {
    Eigen::MatrixXd matrix;  // target_dim x input_dim
    std::uint64_t seed = 0;

    int target_dim() const { return static_cast<int>(matrix.rows()); }
    int input_dim() const { return static_cast<int>(matrix.cols()); }
};

/// Deterministic in (seed, dims): the same seed always yields the same matrix.
RandomProjection make_random_projection(std::uint64_t seed, int target_dim, int input_dim = 128);

/// frames * matrix^T; throws DimensionError on column mismatch.
Eigen::MatrixXd project(const Eigen::MatrixXd& frames, const RandomProjection& rp);

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;   // target_dim x input_dim, orthonormal rows
    Eigen::VectorXd eigenvalues;  // non-increasing
};

/// Streaming covariance accumulator so a model can be fit over frame sets too
/// large to concatenate.
class PcaAccumulator {
public:
    void add(const Eigen::MatrixXd& frames);
    Eigen::Index count() const { return count_; }

    /// Top-`target_dim` eigenpairs of the sample covariance, eigenvalues
    /// descending; each component's largest-magnitude entry is positive.
    PcaModel finalize(int target_dim) const;

private:
    Eigen::MatrixXd outer_;  // sum of x x^T
    Eigen::VectorXd sum_;
    Eigen::Index count_ = 0;
};

/// Requires at least target_dim frames.
PcaModel fit_pca(const Eigen::MatrixXd& train_frames, int target_dim);

/// (frames - mean) * components^T.
Eigen::MatrixXd pca_transform(const Eigen::MatrixXd& frames, const PcaModel& model);

// ---------------------------------------------------------------------------
// Bottleneck autoencoder

/// One ReLU hidden layer, linear reconstruction. When input_mean/input_std
/// are non-empty the encoder standardizes its input first; trained models
/// always carry the statistics of their training frames.
struct Autoencoder {
    Eigen::MatrixXd w1;  // hidden x input
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // input x hidden
    Eigen::VectorXd b2;
    Eigen::VectorXd input_mean;  // empty => identity input transform
    Eigen::VectorXd input_std;

    int hidden_dim() const { return static_cast<int>(w1.rows()); }
    int input_dim() const { return static_cast<int>(w1.cols()); }
};

struct TrainLog {
    std::vector<double> epoch_losses;       // training reconstruction MSE per epoch
    std::vector<double> validation_losses;  // held-out MSE per epoch
    int stopped_epoch = 0;                  // 1-based count of completed epochs
    double best_validation_loss = 0.0;
    int best_epoch = 0;
};

struct TrainOptions {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 40000;
    int max_epochs = 200;
    int patience = 50;                      // epochs without validation improvement
    double validation_fraction = 0.1;
    std::size_t max_frames = 2'000'000;     // seeded subsample cap
};

/// Gradients of the batch reconstruction MSE for every parameter block.
struct AeGradients {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
};

/// Mean per-sample squared reconstruction error over an (already
/// standardized) batch with rows as samples.
double ae_loss(const Autoencoder& ae, const Eigen::MatrixXd& batch);

AeGradients ae_gradients(const Autoencoder& ae, const Eigen::MatrixXd& batch);

/// Minimizes reconstruction MSE with Nesterov momentum (lr 0.01, momentum
/// 0.9), batches of min(40000, n), at most 200 epochs with 50-epoch early
/// stopping on a 10% held-out split. Returns the best-validation parameters.
/// Throws TrainingError naming the epoch if the loss turns non-finite.
std::pair<Autoencoder, TrainLog> train_autoencoder(const Eigen::MatrixXd& train_frames,
                                                   int hidden_dim, std::uint64_t seed,
                                                   const TrainOptions& options = {});

/// ReLU(standardize(frames) * w1^T + b1).
Eigen::MatrixXd encode(const Eigen::MatrixXd& frames, const Autoencoder& ae);

}  // namespace melproj

#endif
