#ifndef MELPROJ_AGGREGATION_HPP
#define MELPROJ_AGGREGATION_HPP

#include <Eigen/Dense>

namespace melproj {

/// 216 frames of 512 samples at 44.1 kHz, about 2.5 seconds.
constexpr int kTextureWindowFrames = 216;

/// Appends first- and second-order differentials: columns [x, dx, ddx].
/// dx_t = (x_{t+1} - x_{t-1}) / 2 with edge replication.
Eigen::MatrixXd add_deltas(const Eigen::MatrixXd& features);

/// Sliding-window mean and population variance per column, hop one frame.
/// Output columns are [means | variances]. Inputs shorter than the window
/// collapse to a single window over all frames.
Eigen::MatrixXd texture_stats(const Eigen::MatrixXd& features,
                              int window_frames = kTextureWindowFrames);

/// Track-level summary of texture frames: [mean | population variance] over
/// rows. A single texture frame yields zero variances.
Eigen::VectorXd track_vector(const Eigen::MatrixXd& texture);

/// Full aggregation: F frame features in, 12F track features out.
Eigen::VectorXd aggregate_track(const Eigen::MatrixXd& frames,
                                int window_frames = kTextureWindowFrames);

}  // namespace melproj

#endif
