#ifndef MELPROJ_HANDCRAFTED_HPP
#define MELPROJ_HANDCRAFTED_HPP

#include <Eigen/Dense>

#include "melproj/audio.hpp"
#include "melproj/spectral.hpp"

namespace melproj {

/// Frame dimensionality of the handcrafted family: energy, centroid, rolloff,
/// flatness, flux, zero-crossing rate, and 20 cepstral coefficients.
constexpr int kHandcraftedDims = 26;
constexpr int kNumCepstra = 20;
constexpr double kRolloffThreshold = 0.85;

struct SpectralFrameStats {
    double energy = 0;    // sum of the power spectrum
    double centroid = 0;  // Hz; 0 for an all-zero frame
    double rolloff = 0;   // Hz
    double flatness = 0;  // geometric / arithmetic mean of (power + 1e-10)
    double flux = 0;      // squared difference of sum-normalized spectra; 0 for the first frame
};

/// Scalar descriptors of one power frame. `prev` is null for the first frame.
SpectralFrameStats spectral_frame_features(const Eigen::VectorXd& power_frame,
                                           const Eigen::VectorXd* prev_power_frame,
                                           double sample_rate);

/// Fraction of adjacent sample pairs with a sign change; sign(0) counts as
/// positive. Computed on the un-windowed time frame.
double zero_crossing_rate(const Eigen::VectorXd& time_frame);

/// DCT-II with orthonormal scaling, coefficients 0..n_coeffs-1.
Eigen::VectorXd mfcc(const Eigen::VectorXd& mel_log_frame, int n_coeffs = kNumCepstra);

/// Orthonormal DCT-II basis rows (n_coeffs x input_dim).
Eigen::MatrixXd dct_matrix(int n_coeffs, int input_dim);

/// Full handcrafted frame features for a clip: T x 26, one row per STFT frame.
Eigen::MatrixXd marsyas_features(const AudioClip& clip);

}  // namespace melproj

#endif
