#include "melproj/projections.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "melproj/errors.hpp"
#include "melproj/rng.hpp"

namespace melproj {

// ---------------------------------------------------------------------------
// Random projection

RandomProjection make_random_projection(std::uint64_t seed, int target_dim, int input_dim) {
    if (target_dim < 1) throw ValidationError("projection dimension must be at least 1");
    if (input_dim < 1) throw ValidationError("input dimension must be at least 1");
    RandomProjection rp;
    rp.seed = seed;
    rp.matrix.resize(target_dim, input_dim);
    Rng rng(seed);
    for (int r = 0; r < target_dim; ++r)
        for (int c = 0; c < input_dim; ++c) rp.matrix(r, c) = rng.normal();
    return rp;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& frames, const RandomProjection& rp) {
    if (frames.cols() != rp.matrix.cols())
        throw DimensionError("projection expects " + std::to_string(rp.matrix.cols()) +
                             " columns, got " + std::to_string(frames.cols()));
    return frames * rp.matrix.transpose();
}

// ---------------------------------------------------------------------------
// PCA

void PcaAccumulator::add(const Eigen::MatrixXd& frames) {
    if (count_ == 0) {
        outer_ = Eigen::MatrixXd::Zero(frames.cols(), frames.cols());
        sum_ = Eigen::VectorXd::Zero(frames.cols());
    } else if (frames.cols() != sum_.size()) {
        throw DimensionError("accumulated frames have inconsistent widths");
    }
    outer_.noalias() += frames.transpose() * frames;
    sum_ += frames.colwise().sum().transpose();
    count_ += frames.rows();
}

PcaModel PcaAccumulator::finalize(int target_dim) const {
    if (count_ < target_dim)
        throw ValidationError("PCA needs at least as many frames as components: " +
                              std::to_string(count_) + " < " + std::to_string(target_dim));
    const Eigen::Index dim = sum_.size();
    if (target_dim < 1 || target_dim > dim)
        throw ValidationError("PCA target dimension out of range");

    const double n = static_cast<double>(count_);
    const Eigen::VectorXd mean = sum_ / n;
    // Sample covariance of the mean-centered frames.
    const double denom = count_ > 1 ? n - 1.0 : 1.0;
    Eigen::MatrixXd cov = (outer_ - n * mean * mean.transpose()) / denom;
    cov = ((cov + cov.transpose()) / 2.0).eval();  // guard symmetry against roundoff

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("PCA eigendecomposition failed");

    PcaModel model;
    model.mean = mean;
    model.components.resize(target_dim, dim);
    model.eigenvalues.resize(target_dim);
    // Eigen returns ascending eigenvalues; take the top ones in reverse.
    for (int i = 0; i < target_dim; ++i) {
        const Eigen::Index src = dim - 1 - i;
        model.eigenvalues(i) = std::max(0.0, solver.eigenvalues()(src));
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index max_idx = 0;
        v.cwiseAbs().maxCoeff(&max_idx);
        if (v(max_idx) < 0.0) v = -v;
        model.components.row(i) = v.transpose();
    }
    return model;
}

PcaModel fit_pca(const Eigen::MatrixXd& train_frames, int target_dim) {
    PcaAccumulator acc;
    acc.add(train_frames);
    return acc.finalize(target_dim);
}

Eigen::MatrixXd pca_transform(const Eigen::MatrixXd& frames, const PcaModel& model) {
    if (frames.cols() != model.components.cols())
        throw DimensionError("PCA transform expects " + std::to_string(model.components.cols()) +
                             " columns, got " + std::to_string(frames.cols()));
    return (frames.rowwise() - model.mean.transpose()) * model.components.transpose();
}

// ---------------------------------------------------------------------------
// Autoencoder

namespace {

Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& frames, const Eigen::VectorXd& mean,
                                 const Eigen::VectorXd& std_dev) {
    return (frames.rowwise() - mean.transpose()).array().rowwise() /
           std_dev.transpose().array();
}

struct AeParams {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
};

double forward_loss(const AeParams& p, const Eigen::MatrixXd& batch) {
    const Eigen::MatrixXd hidden =
        ((batch * p.w1.transpose()).rowwise() + p.b1.transpose()).cwiseMax(0.0);
    const Eigen::MatrixXd recon = (hidden * p.w2.transpose()).rowwise() + p.b2.transpose();
    return (recon - batch).squaredNorm() / static_cast<double>(batch.rows());
}

AeGradients backward(const AeParams& p, const Eigen::MatrixXd& batch, double* loss_out) {
    const double batch_size = static_cast<double>(batch.rows());
    const Eigen::MatrixXd pre = (batch * p.w1.transpose()).rowwise() + p.b1.transpose();
    const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
    const Eigen::MatrixXd recon = (hidden * p.w2.transpose()).rowwise() + p.b2.transpose();
    const Eigen::MatrixXd residual = recon - batch;
    if (loss_out != nullptr) *loss_out = residual.squaredNorm() / batch_size;

    AeGradients g;
    const double scale = 2.0 / batch_size;
    g.w2.noalias() = scale * residual.transpose() * hidden;
    g.b2 = scale * residual.colwise().sum().transpose();
    Eigen::MatrixXd back = scale * (residual * p.w2);  // dL/d hidden
    back = back.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    g.w1.noalias() = back.transpose() * batch;
    g.b1 = back.colwise().sum().transpose();
    return g;
}

}  // namespace

double ae_loss(const Autoencoder& ae, const Eigen::MatrixXd& batch) {
    return forward_loss({ae.w1, ae.w2, ae.b1, ae.b2}, batch);
}

AeGradients ae_gradients(const Autoencoder& ae, const Eigen::MatrixXd& batch) {
    return backward({ae.w1, ae.w2, ae.b1, ae.b2}, batch, nullptr);
}

Eigen::MatrixXd encode(const Eigen::MatrixXd& frames, const Autoencoder& ae) {
    if (frames.cols() != ae.w1.cols())
        throw DimensionError("encoder expects " + std::to_string(ae.w1.cols()) +
                             " columns, got " + std::to_string(frames.cols()));
    const Eigen::MatrixXd input = ae.input_mean.size() > 0
                                      ? standardize_rows(frames, ae.input_mean, ae.input_std)
                                      : frames;
    return ((input * ae.w1.transpose()).rowwise() + ae.b1.transpose()).cwiseMax(0.0);
}

std::pair<Autoencoder, TrainLog> train_autoencoder(const Eigen::MatrixXd& train_frames,
                                                   int hidden_dim, std::uint64_t seed,
                                                   const TrainOptions& options) {
    if (train_frames.rows() < 2) throw ValidationError("autoencoder training needs at least 2 frames");
    if (hidden_dim < 1) throw ValidationError("hidden dimension must be at least 1");

    const Eigen::Index dim = train_frames.cols();

    // Optional seeded subsample to bound training cost.
    Eigen::MatrixXd frames;
    if (static_cast<std::size_t>(train_frames.rows()) > options.max_frames) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(train_frames.rows()));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        Rng sub_rng(derive_seed(seed, "subsample"));
        seeded_shuffle(idx, sub_rng);
        idx.resize(options.max_frames);
        std::sort(idx.begin(), idx.end());
        frames.resize(static_cast<Eigen::Index>(options.max_frames), dim);
        for (std::size_t i = 0; i < options.max_frames; ++i) frames.row(static_cast<Eigen::Index>(i)) = train_frames.row(idx[i]);
    } else {
        frames = train_frames;
    }
    const Eigen::Index n = frames.rows();

    // Per-dimension standardization; constant dimensions pass through.
    Eigen::VectorXd mean = frames.colwise().mean().transpose();
    Eigen::VectorXd variance = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::VectorXd d = frames.row(r).transpose() - mean;
        variance += d.cwiseProduct(d);
    }
    variance /= static_cast<double>(n);
    Eigen::VectorXd std_dev = variance.cwiseSqrt();
    for (Eigen::Index i = 0; i < dim; ++i)
        if (std_dev(i) < 1e-12) std_dev(i) = 1.0;
    const Eigen::MatrixXd standardized = standardize_rows(frames, mean, std_dev);

    // Held-out validation rows for early stopping.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng split_rng(derive_seed(seed, "val_split"));
    seeded_shuffle(order, split_rng);
    Eigen::Index n_val = static_cast<Eigen::Index>(options.validation_fraction * static_cast<double>(n));
    n_val = std::clamp<Eigen::Index>(n_val, 1, n - 1);
    const Eigen::Index n_train = n - n_val;
    Eigen::MatrixXd val_set(n_val, dim);
    Eigen::MatrixXd train_set(n_train, dim);
    for (Eigen::Index i = 0; i < n_val; ++i) val_set.row(i) = standardized.row(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i < n_train; ++i)
        train_set.row(i) = standardized.row(order[static_cast<std::size_t>(n_val + i)]);

    // Uniform init in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    Rng init_rng(derive_seed(seed, "init"));
    const double limit = std::sqrt(6.0 / static_cast<double>(dim + hidden_dim));
    AeParams params;
    params.w1.resize(hidden_dim, dim);
    params.w2.resize(dim, hidden_dim);
    for (int r = 0; r < hidden_dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) params.w1(r, c) = init_rng.uniform(-limit, limit);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (int c = 0; c < hidden_dim; ++c) params.w2(r, c) = init_rng.uniform(-limit, limit);
    params.b1 = Eigen::VectorXd::Zero(hidden_dim);
    params.b2 = Eigen::VectorXd::Zero(dim);

    AeParams velocity;
    velocity.w1 = Eigen::MatrixXd::Zero(hidden_dim, dim);
    velocity.w2 = Eigen::MatrixXd::Zero(dim, hidden_dim);
    velocity.b1 = Eigen::VectorXd::Zero(hidden_dim);
    velocity.b2 = Eigen::VectorXd::Zero(dim);

    const int batch_size = std::min<int>(options.batch_size, static_cast<int>(n_train));
    const double lr = options.learning_rate;
    const double mu = options.momentum;

    TrainLog log;
    AeParams best = params;
    log.best_validation_loss = forward_loss(params, val_set);
    log.best_epoch = 0;
    int epochs_without_improvement = 0;

    Rng epoch_rng(derive_seed(seed, "epochs"));
    std::vector<Eigen::Index> batch_order(static_cast<std::size_t>(n_train));
    std::iota(batch_order.begin(), batch_order.end(), Eigen::Index{0});

    for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
        seeded_shuffle(batch_order, epoch_rng);
        double epoch_loss = 0.0;
        Eigen::Index processed = 0;
        for (Eigen::Index start = 0; start < n_train; start += batch_size) {
            const Eigen::Index count = std::min<Eigen::Index>(batch_size, n_train - start);
            Eigen::MatrixXd batch(count, dim);
            for (Eigen::Index i = 0; i < count; ++i)
                batch.row(i) = train_set.row(batch_order[static_cast<std::size_t>(start + i)]);

            // Nesterov: evaluate the gradient at the lookahead point.
            AeParams lookahead;
            lookahead.w1 = params.w1 + mu * velocity.w1;
            lookahead.w2 = params.w2 + mu * velocity.w2;
            lookahead.b1 = params.b1 + mu * velocity.b1;
            lookahead.b2 = params.b2 + mu * velocity.b2;
            double batch_loss = 0.0;
            const AeGradients g = backward(lookahead, batch, &batch_loss);
            if (!std::isfinite(batch_loss))
                throw TrainingError("autoencoder loss diverged at epoch " + std::to_string(epoch));

            velocity.w1 = mu * velocity.w1 - lr * g.w1;
            velocity.w2 = mu * velocity.w2 - lr * g.w2;
            velocity.b1 = mu * velocity.b1 - lr * g.b1;
            velocity.b2 = mu * velocity.b2 - lr * g.b2;
            params.w1 += velocity.w1;
            params.w2 += velocity.w2;
            params.b1 += velocity.b1;
            params.b2 += velocity.b2;

            epoch_loss += batch_loss * static_cast<double>(count);
            processed += count;
        }
        log.epoch_losses.push_back(epoch_loss / static_cast<double>(processed));

        const double val_loss = forward_loss(params, val_set);
        if (!std::isfinite(val_loss))
            throw TrainingError("autoencoder validation loss diverged at epoch " + std::to_string(epoch));
        log.validation_losses.push_back(val_loss);
        log.stopped_epoch = epoch;
        if (val_loss < log.best_validation_loss) {
            log.best_validation_loss = val_loss;
            log.best_epoch = epoch;
            best = params;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
        }
        if (epochs_without_improvement >= options.patience) break;
    }

    Autoencoder ae;
    ae.w1 = std::move(best.w1);
    ae.b1 = std::move(best.b1);
    ae.w2 = std::move(best.w2);
    ae.b2 = std::move(best.b2);
    ae.input_mean = mean;
    ae.input_std = std_dev;
    return {std::move(ae), std::move(log)};
}

}  // namespace melproj
