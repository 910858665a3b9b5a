#include "melproj/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "melproj/errors.hpp"
#include "melproj/fft.hpp"

namespace melproj {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Periodic Hann window.
std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
    return w;
}

// Integral of the triangle (a, peak at c, b) over [lo, hi].
double triangle_integral(double a, double c, double b, double lo, double hi) {
    double total = 0.0;
    // Rising edge on [a, c].
    {
        const double l = std::max(lo, a), h = std::min(hi, c);
        if (h > l && c > a)
            total += ((h - a) * (h - a) - (l - a) * (l - a)) / (2.0 * (c - a));
    }
    // Falling edge on [c, b].
    {
        const double l = std::max(lo, c), h = std::min(hi, b);
        if (h > l && b > c)
            total += ((b - l) * (b - l) - (b - h) * (b - h)) / (2.0 * (b - c));
    }
    return total;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Eigen::Index stft_frame_count(std::size_t n, const StftFrameSpec& spec) {
    if (n < static_cast<std::size_t>(spec.frame_len))
        throw EmptyAudioError("clip shorter than one analysis frame");
    return static_cast<Eigen::Index>((n - static_cast<std::size_t>(spec.frame_len)) /
                                     static_cast<std::size_t>(spec.hop)) +
           1;
}

Spectrogram stft(const AudioClip& clip, const StftFrameSpec& spec) {
    if (spec.frame_len <= 0 || (spec.frame_len & (spec.frame_len - 1)) != 0)
        throw ValidationError("frame length must be a power of two");
    if (spec.hop <= 0) throw ValidationError("hop must be positive");
    const Eigen::Index frames = stft_frame_count(clip.samples.size(), spec);
    const int n = spec.frame_len;
    const Eigen::Index bins = n / 2 + 1;
    const std::vector<double> window = hann_window(n);

    Spectrogram out;
    out.frame_spec = spec;
    out.sample_rate = clip.sample_rate;
    out.power.resize(frames, bins);

    std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index t = 0; t < frames; ++t) {
        const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(spec.hop);
        for (int i = 0; i < n; ++i)
            buf[static_cast<std::size_t>(i)] = clip.samples[start + static_cast<std::size_t>(i)] *
                                               window[static_cast<std::size_t>(i)];
        fft_radix2(buf);
        // One-sided power; interior bins absorb their conjugate twin so the
        // row sum equals the windowed frame energy (Parseval).
        out.power(t, 0) = std::norm(buf[0]) * inv_n;
        for (Eigen::Index k = 1; k < bins - 1; ++k)
            out.power(t, k) = 2.0 * std::norm(buf[static_cast<std::size_t>(k)]) * inv_n;
        out.power(t, bins - 1) = std::norm(buf[static_cast<std::size_t>(n / 2)]) * inv_n;
    }
    return out;
}

Eigen::MatrixXd mel_filterbank(int n_fft_bins, int n_mels, double sample_rate) {
    if (n_mels < 2) throw ValidationError("filterbank needs at least 2 bands");
    if (n_fft_bins < 2) throw ValidationError("filterbank needs at least 2 FFT bins");
    const double nyquist = sample_rate / 2.0;
    const int n_fft = 2 * (n_fft_bins - 1);
    const double bin_width = sample_rate / static_cast<double>(n_fft);

    // n_mels + 2 edge frequencies, equally spaced in mel.
    const double mel_max = hz_to_mel(nyquist);
    std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
    for (int i = 0; i < n_mels + 2; ++i)
        edges[static_cast<std::size_t>(i)] = mel_to_hz(mel_max * i / (n_mels + 1));

    Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_fft_bins);
    for (int m = 0; m < n_mels; ++m) {
        const double a = edges[static_cast<std::size_t>(m)];
        const double c = edges[static_cast<std::size_t>(m) + 1];
        const double b = edges[static_cast<std::size_t>(m) + 2];
        for (int k = 0; k < n_fft_bins; ++k) {
            const double lo = k * bin_width - bin_width / 2.0;
            const double hi = k * bin_width + bin_width / 2.0;
            if (hi <= a || lo >= b) continue;
            fb(m, k) = triangle_integral(a, c, b, lo, hi) / bin_width;
        }
    }
    return fb;
}

MelSpectrogram mel_spectrogram(const Spectrogram& spectrogram, int n_mels) {
    const Eigen::MatrixXd fb =
        mel_filterbank(static_cast<int>(spectrogram.power.cols()), n_mels, spectrogram.sample_rate);
    MelSpectrogram out;
    out.n_mels = n_mels;
    out.frames = ((spectrogram.power * fb.transpose()).array() + kLogFloor).log().matrix();
    return out;
}

MelSpectrogram log_mel_frames(const AudioClip& clip, const StftFrameSpec& spec, int n_mels) {
    return mel_spectrogram(stft(clip, spec), n_mels);
}

}  // namespace melproj
