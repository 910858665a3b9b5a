#include <doctest.h>

#include <cmath>

#include "melproj/aggregation.hpp"
#include "melproj/rng.hpp"

using namespace melproj;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("deltas of a constant sequence are zero") {
    const Eigen::MatrixXd out = add_deltas(Eigen::MatrixXd::Constant(9, 2, 1.5));
    REQUIRE(out.cols() == 6);
    CHECK((out.leftCols(2).array() == 1.5).all());
    CHECK(out.rightCols(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deltas of a linear ramp are one inside, zero curvature deep inside") {
    Eigen::MatrixXd ramp(10, 1);
    for (int t = 0; t < 10; ++t) ramp(t, 0) = t;
    const Eigen::MatrixXd out = add_deltas(ramp);
    for (int t = 1; t < 9; ++t) CHECK(out(t, 1) == doctest::Approx(1.0));
    for (int t = 2; t < 8; ++t) CHECK(out(t, 2) == doctest::Approx(0.0));
}

TEST_CASE("deltas match an index-by-index oracle") {
    Rng rng(61);
    const Eigen::MatrixXd x = random_matrix(rng, 7, 2);
    const Eigen::MatrixXd out = add_deltas(x);
    auto at = [&](Eigen::Index t) { return std::clamp<Eigen::Index>(t, 0, 6); };
    Eigen::MatrixXd delta(7, 2), delta2(7, 2);
    for (Eigen::Index t = 0; t < 7; ++t)
        delta.row(t) = (x.row(at(t + 1)) - x.row(at(t - 1))) / 2.0;
    for (Eigen::Index t = 0; t < 7; ++t)
        delta2.row(t) = (delta.row(at(t + 1)) - delta.row(at(t - 1))) / 2.0;
    CHECK((out.middleCols(2, 2) - delta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.rightCols(2) - delta2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("texture stats of constant input are the constant and zero") {
    const Eigen::MatrixXd out = texture_stats(Eigen::MatrixXd::Constant(300, 3, 2.5));
    REQUIRE(out.rows() == 300 - 216 + 1);
    REQUIRE(out.cols() == 6);
    CHECK((out.leftCols(3).array() - 2.5).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(out.rightCols(3).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exactly one window when T equals the window length") {
    Rng rng(67);
    CHECK(texture_stats(random_matrix(rng, 216, 4)).rows() == 1);
    CHECK(texture_stats(random_matrix(rng, 100, 4)).rows() == 1);  // short input collapses
    CHECK(texture_stats(random_matrix(rng, 217, 4)).rows() == 2);
}

TEST_CASE("texture stats match a naive two-pass oracle") {
    Rng rng(71);
    const Eigen::MatrixXd x = random_matrix(rng, 400, 3);
    const Eigen::MatrixXd out = texture_stats(x, 216);
    for (Eigen::Index w = 0; w < out.rows(); ++w) {
        for (Eigen::Index c = 0; c < 3; ++c) {
            double mean = 0.0;
            for (int i = 0; i < 216; ++i) mean += x(w + i, c);
            mean /= 216.0;
            double var = 0.0;
            for (int i = 0; i < 216; ++i) var += (x(w + i, c) - mean) * (x(w + i, c) - mean);
            var /= 216.0;
            CHECK(out(w, c) == doctest::Approx(mean).epsilon(1e-9));
            CHECK(out(w, 3 + c) == doctest::Approx(var).epsilon(1e-9));
        }
    }
}

TEST_CASE("26 frame features produce a 312-dim track vector") {
    Rng rng(73);
    const Eigen::MatrixXd frames = random_matrix(rng, 250, 26);
    CHECK(aggregate_track(frames).size() == 312);
}

TEST_CASE("single texture frame zeroes the variance half") {
    Rng rng(79);
    const Eigen::MatrixXd texture = random_matrix(rng, 1, 6);
    const Eigen::VectorXd v = track_vector(texture);
    REQUIRE(v.size() == 12);
    CHECK((v.head(6) - texture.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(v.tail(6).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("track vector matches a naive oracle") {
    Rng rng(83);
    const Eigen::MatrixXd texture = random_matrix(rng, 50, 4);
    const Eigen::VectorXd v = track_vector(texture);
    for (Eigen::Index c = 0; c < 4; ++c) {
        double mean = 0.0;
        for (Eigen::Index r = 0; r < 50; ++r) mean += texture(r, c);
        mean /= 50.0;
        double var = 0.0;
        for (Eigen::Index r = 0; r < 50; ++r) var += (texture(r, c) - mean) * (texture(r, c) - mean);
        var /= 50.0;
        CHECK(v(c) == doctest::Approx(mean).epsilon(1e-9));
        CHECK(v(4 + c) == doctest::Approx(var).epsilon(1e-9));
    }
}

TEST_CASE("every family dimensionality expands exactly twelvefold") {
    Rng rng(89);
    for (int f : {128, 8, 26, 51, 75, 100, 16, 32, 64, 256}) {
        const Eigen::MatrixXd frames = random_matrix(rng, 230, f);
        CHECK(aggregate_track(frames).size() == 12 * f);
    }
}

TEST_CASE("adding a constant to one column shifts only its track mean") {
    Rng rng(97);
    const Eigen::Index f = 3;
    const Eigen::MatrixXd x = random_matrix(rng, 400, f);
    Eigen::MatrixXd shifted = x;
    const double c = 7.25;
    shifted.col(1).array() += c;
    const Eigen::VectorXd base = aggregate_track(x);
    const Eigen::VectorXd moved = aggregate_track(shifted);
    REQUIRE(base.size() == 12 * f);
    // Layout: [mean of means(3F), mean of vars(3F), var of means(3F), var of vars(3F)].
    for (Eigen::Index i = 0; i < 12 * f; ++i) {
        if (i == 1) {
            CHECK(moved(i) - base(i) == doctest::Approx(c).epsilon(1e-9));
        } else {
            CHECK(moved(i) == doctest::Approx(base(i)).scale(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("aggregation is bitwise deterministic") {
    Rng rng(101);
    const Eigen::MatrixXd x = random_matrix(rng, 333, 5);
    const Eigen::VectorXd a = aggregate_track(x);
    const Eigen::VectorXd b = aggregate_track(x);
    CHECK(a.cwiseEqual(b).all());
}
