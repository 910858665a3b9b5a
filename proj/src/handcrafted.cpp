#include "melproj/handcrafted.hpp"

#include <cmath>

#include "melproj/errors.hpp"

namespace melproj {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kFlatnessEpsilon = 1e-10;

Eigen::VectorXd sum_normalize(const Eigen::VectorXd& p) {
    const double total = p.sum();
    if (total <= 0.0) return Eigen::VectorXd::Zero(p.size());
    return p / total;
}
}  // namespace

SpectralFrameStats spectral_frame_features(const Eigen::VectorXd& power_frame,
                                           const Eigen::VectorXd* prev_power_frame,
                                           double sample_rate) {
    const Eigen::Index bins = power_frame.size();
    const int n_fft = static_cast<int>(2 * (bins - 1));
    const double bin_hz = sample_rate / n_fft;

    SpectralFrameStats stats;
    stats.energy = power_frame.sum();

    if (stats.energy > 0.0) {
        double weighted = 0.0;
        for (Eigen::Index k = 0; k < bins; ++k) weighted += k * bin_hz * power_frame(k);
        stats.centroid = weighted / stats.energy;

        const double threshold = kRolloffThreshold * stats.energy;
        double cumulative = 0.0;
        for (Eigen::Index k = 0; k < bins; ++k) {
            cumulative += power_frame(k);
            if (cumulative >= threshold) {
                stats.rolloff = k * bin_hz;
                break;
            }
        }
    }

    // Flatness over the epsilon-floored spectrum; the floor makes the
    // geometric mean finite and sends an all-zero frame to flatness 1.
    double log_sum = 0.0;
    for (Eigen::Index k = 0; k < bins; ++k) log_sum += std::log(power_frame(k) + kFlatnessEpsilon);
    const double geometric = std::exp(log_sum / static_cast<double>(bins));
    const double arithmetic = (power_frame.array() + kFlatnessEpsilon).mean();
    stats.flatness = geometric / arithmetic;

    if (prev_power_frame != nullptr) {
        if (prev_power_frame->size() != bins)
            throw DimensionError("flux frames have mismatched bin counts");
        stats.flux = (sum_normalize(power_frame) - sum_normalize(*prev_power_frame)).squaredNorm();
    }
    return stats;
}

double zero_crossing_rate(const Eigen::VectorXd& time_frame) {
    const Eigen::Index n = time_frame.size();
    if (n < 2) return 0.0;
    int crossings = 0;
    auto positive = [](double x) { return x >= 0.0; };  // sign(0) treated as +
    for (Eigen::Index i = 1; i < n; ++i)
        if (positive(time_frame(i)) != positive(time_frame(i - 1))) ++crossings;
    return static_cast<double>(crossings) / static_cast<double>(n - 1);
}

Eigen::MatrixXd dct_matrix(int n_coeffs, int input_dim) {
    Eigen::MatrixXd dct(n_coeffs, input_dim);
    const double scale0 = std::sqrt(1.0 / input_dim);
    const double scale = std::sqrt(2.0 / input_dim);
    for (int j = 0; j < n_coeffs; ++j)
        for (int k = 0; k < input_dim; ++k)
            dct(j, k) = (j == 0 ? scale0 : scale) * std::cos(kPi * (k + 0.5) * j / input_dim);
    return dct;
}

Eigen::VectorXd mfcc(const Eigen::VectorXd& mel_log_frame, int n_coeffs) {
    return dct_matrix(n_coeffs, static_cast<int>(mel_log_frame.size())) * mel_log_frame;
}

Eigen::MatrixXd marsyas_features(const AudioClip& clip) {
    const Spectrogram spec = stft(clip);
    const MelSpectrogram mel = mel_spectrogram(spec);
    const Eigen::MatrixXd dct = dct_matrix(kNumCepstra, mel.n_mels);
    const Eigen::Index frames = spec.power.rows();
    const int frame_len = spec.frame_spec.frame_len;
    const int hop = spec.frame_spec.hop;

    Eigen::MatrixXd out(frames, kHandcraftedDims);
    Eigen::VectorXd prev;
    Eigen::VectorXd time_frame(frame_len);
    for (Eigen::Index t = 0; t < frames; ++t) {
        const Eigen::VectorXd power = spec.power.row(t);
        const SpectralFrameStats stats =
            spectral_frame_features(power, t == 0 ? nullptr : &prev, clip.sample_rate);
        const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(hop);
        for (int i = 0; i < frame_len; ++i)
            time_frame(i) = clip.samples[start + static_cast<std::size_t>(i)];

        out(t, 0) = stats.energy;
        out(t, 1) = stats.centroid;
        out(t, 2) = stats.rolloff;
        out(t, 3) = stats.flatness;
        out(t, 4) = stats.flux;
        out(t, 5) = zero_crossing_rate(time_frame);
        out.row(t).segment(6, kNumCepstra) = (dct * mel.frames.row(t).transpose()).transpose();
        prev = power;
    }
    return out;
}

}  // namespace melproj
