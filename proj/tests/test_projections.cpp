#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "melproj/errors.hpp"
#include "melproj/projections.hpp"
#include "melproj/rng.hpp"
#include "support/oracles.hpp"

using namespace melproj;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Random projection

TEST_CASE("the same seed always yields the same projection matrix") {
    const RandomProjection a = make_random_projection(1234, 51);
    const RandomProjection b = make_random_projection(1234, 51);
    CHECK(a.matrix.cwiseEqual(b.matrix).all());
    const RandomProjection c = make_random_projection(1235, 51);
    CHECK_FALSE(c.matrix.cwiseEqual(a.matrix).all());
}

TEST_CASE("projection entries look standard normal") {
    const RandomProjection rp = make_random_projection(99, 100);
    const double n = static_cast<double>(rp.matrix.size());
    const double mean = rp.matrix.mean();
    CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
    const double variance = (rp.matrix.array() - mean).square().sum() / n;
    CHECK(variance > 0.9);
    CHECK(variance < 1.1);
}

TEST_CASE("the smallest grid setting and bad dimensions") {
    CHECK(make_random_projection(7, 8).matrix.rows() == 8);
    CHECK_THROWS_AS(make_random_projection(7, 0), ValidationError);
}

TEST_CASE("projection is linear and shape-checked") {
    const RandomProjection rp = make_random_projection(3, 26);
    CHECK(project(Eigen::MatrixXd::Zero(4, 128), rp).cwiseAbs().maxCoeff() == 0.0);

    RandomProjection ones;
    ones.matrix = Eigen::MatrixXd::Ones(1, 128);
    const Eigen::MatrixXd out = project(Eigen::MatrixXd::Ones(1, 128), ones);
    CHECK(out(0, 0) == doctest::Approx(128.0));

    Rng rng(111);
    const Eigen::MatrixXd a = random_matrix(rng, 6, 128);
    const Eigen::MatrixXd b = random_matrix(rng, 6, 128);
    const Eigen::MatrixXd lhs = project((2.0 * a - 0.5 * b).eval(), rp);
    const Eigen::MatrixXd rhs = 2.0 * project(a, rp) - 0.5 * project(b, rp);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);

    CHECK_THROWS_AS(project(Eigen::MatrixXd::Zero(4, 64), rp), DimensionError);
}

TEST_CASE("projected pairwise distances stay close to the originals") {
    Rng rng(2024);
    const int points = 200, dim = 128, target = 100;
    const Eigen::MatrixXd x = random_matrix(rng, points, dim);
    const RandomProjection rp = make_random_projection(555, target, dim);
    const Eigen::MatrixXd px = project(x, rp);

    std::vector<double> distortions;
    distortions.reserve(points * (points - 1) / 2);
    for (int i = 0; i < points; ++i) {
        for (int j = i + 1; j < points; ++j) {
            const double original = (x.row(i) - x.row(j)).squaredNorm();
            const double embedded = (px.row(i) - px.row(j)).squaredNorm() / target;
            distortions.push_back(std::abs(embedded - original) / original);
        }
    }
    std::sort(distortions.begin(), distortions.end());
    CHECK(distortions[distortions.size() / 2] < 0.15);
    const auto over = static_cast<double>(
        std::count_if(distortions.begin(), distortions.end(), [](double d) { return d > 0.5; }));
    CHECK(over / static_cast<double>(distortions.size()) < 0.01);
}

// ---------------------------------------------------------------------------
// PCA

TEST_CASE("axis-aligned covariance forces the eigenbasis") {
    Rng rng(77);
    const int n = 1000, dim = 128;
    Eigen::MatrixXd frames = Eigen::MatrixXd::Zero(n, dim);
    for (int i = 0; i < n; ++i) {
        frames(i, 0) = 2.0 * rng.normal();  // variance 4
        frames(i, 1) = rng.normal();        // variance 1
    }
    const PcaModel model = fit_pca(frames, 2);
    CHECK(std::abs(model.components(0, 0)) > 0.99);
    CHECK(model.eigenvalues(0) == doctest::Approx(4.0).epsilon(0.15));
    CHECK(model.eigenvalues(0) >= model.eigenvalues(1));
}

TEST_CASE("a full orthonormal basis is an isometry") {
    Rng rng(771);
    const Eigen::MatrixXd frames = random_matrix(rng, 300, 32);
    const PcaModel model = fit_pca(frames, 32);
    const Eigen::MatrixXd q = random_matrix(rng, 10, 32);
    const Eigen::MatrixXd t = pca_transform(q, model);
    for (int i = 0; i < 10; ++i) {
        for (int j = i + 1; j < 10; ++j) {
            const double original = (q.row(i) - q.row(j)).norm();
            const double mapped = (t.row(i) - t.row(j)).norm();
            CHECK(mapped == doctest::Approx(original).epsilon(1e-6));
        }
    }
}

TEST_CASE("eigenpairs match an independent Jacobi eigensolver") {
    Rng rng(773);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd frames = random_matrix(rng, 10, 5);
        const PcaModel model = fit_pca(frames, 5);

        const Eigen::VectorXd mean = frames.colwise().mean().transpose();
        const Eigen::MatrixXd centered = frames.rowwise() - mean.transpose();
        const Eigen::MatrixXd cov = centered.transpose() * centered / 9.0;
        const auto [values, vectors] = test::jacobi_eigen(cov);

        for (int i = 0; i < 5; ++i) {
            CHECK(std::abs(model.eigenvalues(i) - values(i)) < 1e-8);
            const Eigen::VectorXd component = model.components.row(i).transpose();
            const Eigen::VectorXd reference = vectors.col(i);
            const double flip = component.dot(reference) >= 0.0 ? 1.0 : -1.0;
            CHECK((component - flip * reference).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("orthonormal rows and descending eigenvalues") {
    Rng rng(775);
    const Eigen::MatrixXd frames = random_matrix(rng, 60, 12);
    const PcaModel model = fit_pca(frames, 6);
    const Eigen::MatrixXd gram = model.components * model.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
    for (int i = 1; i < 6; ++i) CHECK(model.eigenvalues(i - 1) >= model.eigenvalues(i));
    // Sign convention: the largest-magnitude entry of each component is positive.
    for (int i = 0; i < 6; ++i) {
        Eigen::Index idx = 0;
        model.components.row(i).cwiseAbs().maxCoeff(&idx);
        CHECK(model.components(i, idx) > 0.0);
    }
}

TEST_CASE("pca_transform centering and orthonormality identities") {
    Rng rng(779);
    const Eigen::MatrixXd frames = random_matrix(rng, 50, 8);
    const PcaModel model = fit_pca(frames, 4);
    const Eigen::MatrixXd zero = pca_transform(model.mean.transpose(), model);
    CHECK(zero.cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd e0 =
        pca_transform((model.mean + model.components.row(0).transpose()).transpose(), model);
    CHECK(e0(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    for (int j = 1; j < 4; ++j) CHECK(std::abs(e0(0, j)) < 1e-9);

    const Eigen::MatrixXd q = random_matrix(rng, 7, 8);
    const Eigen::MatrixXd t = pca_transform(q, model);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 4; ++j) {
            const double expected = model.components.row(j).dot(q.row(i) - model.mean.transpose());
            CHECK(t(i, j) == doctest::Approx(expected).epsilon(1e-9));
        }
    CHECK_THROWS_AS(pca_transform(random_matrix(rng, 3, 5), model), DimensionError);
}

TEST_CASE("too few frames for the requested components") {
    Rng rng(781);
    CHECK_THROWS_AS(fit_pca(random_matrix(rng, 4, 8), 5), ValidationError);
}

TEST_CASE("PCA reconstruction beats random orthonormal bases") {
    Rng rng(787);
    const int dim = 8, m = 3, n = 200;
    Eigen::MatrixXd frames(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) frames(i, j) = rng.normal() * (1.0 + (2.0 * j)) / 3.0;
    const PcaModel model = fit_pca(frames, m);
    const Eigen::MatrixXd centered = frames.rowwise() - model.mean.transpose();
    auto reconstruction_mse = [&](const Eigen::MatrixXd& basis) {
        const Eigen::MatrixXd recon = (centered * basis.transpose()) * basis;
        return (centered - recon).squaredNorm() / n;
    };
    const double pca_mse = reconstruction_mse(model.components);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd g = random_matrix(rng, dim, m);
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, m);
        CHECK(pca_mse <= reconstruction_mse(q.transpose()) + 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Autoencoder

TEST_CASE("zero-initialized network reconstructs zero") {
    Autoencoder ae;
    const int dim = 6, hidden = 4;
    ae.w1 = Eigen::MatrixXd::Zero(hidden, dim);
    ae.b1 = Eigen::VectorXd::Zero(hidden);
    ae.w2 = Eigen::MatrixXd::Zero(dim, hidden);
    ae.b2 = Eigen::VectorXd::Zero(dim);
    Rng rng(791);
    const Eigen::MatrixXd batch = random_matrix(rng, 8, dim);
    CHECK(ae_loss(ae, batch) ==
          doctest::Approx(batch.rowwise().squaredNorm().mean()).epsilon(1e-12));
    const AeGradients g = ae_gradients(ae, batch);
    CHECK(g.w2.cwiseAbs().maxCoeff() == 0.0);  // dead ReLU activations
    CHECK(g.w1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.b2.cwiseAbs().maxCoeff() > 0.0);  // bias still sees the residual
}

TEST_CASE("analytic gradients match central finite differences") {
    const int dim = 6, hidden = 4, batch_rows = 8;
    const double step = 1e-5;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Rng rng(seed);
        Autoencoder ae;
        ae.w1 = random_matrix(rng, hidden, dim) * 0.5;
        ae.b1 = random_matrix(rng, hidden, 1).col(0) * 0.1;
        ae.w2 = random_matrix(rng, dim, hidden) * 0.5;
        ae.b2 = random_matrix(rng, dim, 1).col(0) * 0.1;
        const Eigen::MatrixXd batch = random_matrix(rng, batch_rows, dim);
        const AeGradients g = ae_gradients(ae, batch);

        double worst = 0.0;
        auto probe = [&](double* param, double analytic) {
            const double saved = *param;
            *param = saved + step;
            const double up = ae_loss(ae, batch);
            *param = saved - step;
            const double down = ae_loss(ae, batch);
            *param = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            worst = std::max(worst, std::abs(numeric - analytic) / denom);
        };
        for (Eigen::Index i = 0; i < ae.w1.size(); ++i) probe(ae.w1.data() + i, g.w1(i));
        for (Eigen::Index i = 0; i < ae.w2.size(); ++i) probe(ae.w2.data() + i, g.w2(i));
        for (Eigen::Index i = 0; i < ae.b1.size(); ++i) probe(ae.b1.data() + i, g.b1(i));
        for (Eigen::Index i = 0; i < ae.b2.size(); ++i) probe(ae.b2.data() + i, g.b2(i));
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("training recovers a low-rank subspace") {
    Rng rng(797);
    const int dim = 32, n = 2000;
    const Eigen::MatrixXd directions = random_matrix(rng, 2, dim);
    const Eigen::MatrixXd coefficients = random_matrix(rng, n, 2);
    const Eigen::MatrixXd frames = coefficients * directions;

    const auto [ae, log] = train_autoencoder(frames, 16, 4242);
    REQUIRE_FALSE(log.epoch_losses.empty());
    CHECK(log.stopped_epoch <= 200);
    CHECK(log.epoch_losses.back() < 0.01 * log.epoch_losses.front());
    CHECK(log.stopped_epoch - log.best_epoch <= 50);
}

TEST_CASE("early stopping keeps the best-validation parameters") {
    Rng rng(799);
    const Eigen::MatrixXd frames = random_matrix(rng, 400, 8);
    const auto [ae, log] = train_autoencoder(frames, 4, 17);
    for (double v : log.validation_losses) CHECK(log.best_validation_loss <= v + 1e-12);
    CHECK(log.stopped_epoch - log.best_epoch <= 50);
    CHECK(ae.input_mean.size() == 8);
}

TEST_CASE("validation loss does not degrade with capacity on rank-16 data") {
    Rng rng(809);
    const int dim = 64, n = 3000;
    const Eigen::MatrixXd directions = random_matrix(rng, 16, dim);
    const Eigen::MatrixXd coefficients = random_matrix(rng, n, 16);
    const Eigen::MatrixXd frames = coefficients * directions;
    double previous = std::numeric_limits<double>::infinity();
    for (int hidden : {16, 32, 64}) {
        const auto [ae, log] = train_autoencoder(frames, hidden, 31337);
        CHECK(log.best_validation_loss <= previous + 1e-9);
        previous = log.best_validation_loss;
    }
}

TEST_CASE("divergent training reports the epoch") {
    Rng rng(811);
    const Eigen::MatrixXd frames = random_matrix(rng, 64, 4) * 1e6;
    TrainOptions options;
    options.learning_rate = 1e9;  // guaranteed blowup
    options.max_epochs = 5;
    CHECK_THROWS_AS(train_autoencoder(frames, 4, 3, options), TrainingError);
}

TEST_CASE("encode applies ReLU after the affine map") {
    Autoencoder ae;
    ae.w1 = Eigen::MatrixXd::Zero(3, 5);
    ae.b1 = Eigen::VectorXd::Zero(3);
    ae.w2 = Eigen::MatrixXd::Zero(5, 3);
    ae.b2 = Eigen::VectorXd::Zero(5);
    CHECK(encode(Eigen::MatrixXd::Zero(4, 5), ae).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(813);
    ae.w1 = random_matrix(rng, 3, 5);
    ae.b1 = random_matrix(rng, 3, 1).col(0);
    const Eigen::MatrixXd x = random_matrix(rng, 10, 5);
    const Eigen::MatrixXd h = encode(x, ae);
    CHECK(h.minCoeff() >= 0.0);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) {
            const double pre = ae.w1.row(j).dot(x.row(i)) + ae.b1(j);
            CHECK(h(i, j) == doctest::Approx(std::max(0.0, pre)).epsilon(1e-9));
        }
    CHECK_THROWS_AS(encode(Eigen::MatrixXd::Zero(2, 7), ae), DimensionError);
}

TEST_CASE("trained encoders standardize with their training statistics") {
    Rng rng(821);
    Eigen::MatrixXd frames = random_matrix(rng, 300, 6);
    frames.col(2).array() += 100.0;  // strong offset the standardizer must absorb
    const auto [ae, log] = train_autoencoder(frames, 3, 5);
    REQUIRE(ae.input_mean.size() == 6);
    CHECK(ae.input_mean(2) == doctest::Approx(100.0).epsilon(0.2));
    const Eigen::MatrixXd h = encode(frames, ae);
    CHECK(h.allFinite());
}
