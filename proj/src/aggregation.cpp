#include "melproj/aggregation.hpp"

#include <algorithm>

#include "melproj/errors.hpp"

namespace melproj {

namespace {

// Centered difference with replicated edges.
Eigen::MatrixXd centered_difference(const Eigen::MatrixXd& x) {
    const Eigen::Index t_count = x.rows();
    Eigen::MatrixXd d(t_count, x.cols());
    for (Eigen::Index t = 0; t < t_count; ++t) {
        const Eigen::Index next = std::min(t + 1, t_count - 1);
        const Eigen::Index prev = std::max<Eigen::Index>(t - 1, 0);
        d.row(t) = (x.row(next) - x.row(prev)) / 2.0;
    }
    return d;
}

}  // namespace

Eigen::MatrixXd add_deltas(const Eigen::MatrixXd& features) {
    if (features.rows() < 1) throw ValidationError("add_deltas needs at least one frame");
    const Eigen::Index f = features.cols();
    Eigen::MatrixXd out(features.rows(), 3 * f);
    const Eigen::MatrixXd delta = centered_difference(features);
    out.leftCols(f) = features;
    out.middleCols(f, f) = delta;
    out.rightCols(f) = centered_difference(delta);
    return out;
}

Eigen::MatrixXd texture_stats(const Eigen::MatrixXd& features, int window_frames) {
    const Eigen::Index t_count = features.rows();
    const Eigen::Index f = features.cols();
    if (t_count < 1) throw ValidationError("texture_stats needs at least one frame");
    if (window_frames < 1) throw ValidationError("texture window must be positive");

    const Eigen::Index window = std::min<Eigen::Index>(window_frames, t_count);
    const Eigen::Index windows = t_count - window + 1;

    // Prefix sums over column-centered values; centering removes the
    // cancellation in the var = E[x^2] - E[x]^2 form.
    const Eigen::RowVectorXd column_mean = features.colwise().mean();
    Eigen::MatrixXd sum1 = Eigen::MatrixXd::Zero(t_count + 1, f);
    Eigen::MatrixXd sum2 = Eigen::MatrixXd::Zero(t_count + 1, f);
    for (Eigen::Index t = 0; t < t_count; ++t) {
        const Eigen::RowVectorXd centered = features.row(t) - column_mean;
        sum1.row(t + 1) = sum1.row(t) + centered;
        sum2.row(t + 1) = sum2.row(t) + centered.cwiseProduct(centered);
    }

    Eigen::MatrixXd out(windows, 2 * f);
    const double inv_w = 1.0 / static_cast<double>(window);
    for (Eigen::Index w = 0; w < windows; ++w) {
        const Eigen::RowVectorXd s1 = (sum1.row(w + window) - sum1.row(w)) * inv_w;
        const Eigen::RowVectorXd s2 = (sum2.row(w + window) - sum2.row(w)) * inv_w;
        out.row(w).head(f) = s1 + column_mean;
        out.row(w).tail(f) = (s2 - s1.cwiseProduct(s1)).cwiseMax(0.0);
    }
    return out;
}

Eigen::VectorXd track_vector(const Eigen::MatrixXd& texture) {
    const Eigen::Index rows = texture.rows();
    const Eigen::Index cols = texture.cols();
    if (rows < 1) throw ValidationError("track_vector needs at least one texture frame");
    Eigen::VectorXd out(2 * cols);
    const Eigen::RowVectorXd mean = texture.colwise().mean();
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::RowVectorXd d = texture.row(r) - mean;
        var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(rows);
    out.head(cols) = mean.transpose();
    out.tail(cols) = var.transpose();
    return out;
}

Eigen::VectorXd aggregate_track(const Eigen::MatrixXd& frames, int window_frames) {
    return track_vector(texture_stats(add_deltas(frames), window_frames));
}

}  // namespace melproj
