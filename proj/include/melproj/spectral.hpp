#ifndef MELPROJ_SPECTRAL_HPP
#define MELPROJ_SPECTRAL_HPP

#include <Eigen/Dense>

#include "melproj/audio.hpp"

namespace melproj {

/// Analysis framing: 1024-sample frames (23.2 ms at 44.1 kHz) with 50%
/// overlap, Hann-windowed. Frame length must stay a power of two.
struct StftFrameSpec {
    int frame_len = 1024;
    int hop = 512;
};

/// Time-by-frequency power matrix. Row t covers samples
/// [t*hop, t*hop + frame_len); columns are the one-sided spectrum bins.
///
/// Power uses the energy-preserving one-sided convention (interior bins carry
/// the conjugate pair), so each row sums to the windowed frame energy.
struct Spectrogram {
    Eigen::MatrixXd power;  // T x (frame_len/2 + 1)
    StftFrameSpec frame_spec;
    int sample_rate = 0;
};

struct MelSpectrogram {
    Eigen::MatrixXd frames;  // T x n_mels, log-compressed
    int n_mels = 128;
};

constexpr int kMelBands = 128;
constexpr double kLogFloor = 1e-10;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Frame count for an input of `n` samples; requires n >= frame_len.
Eigen::Index stft_frame_count(std::size_t n, const StftFrameSpec& spec);

/// Short-time Fourier transform to one-sided power. Throws EmptyAudioError
/// when the clip is shorter than one frame.
Spectrogram stft(const AudioClip& clip, const StftFrameSpec& spec = {});

/// Triangular filterbank with centers equally spaced on the Mel scale between
/// 0 Hz and Nyquist. Each weight is the triangle's average over the FFT bin's
/// frequency footprint, which keeps every row nonempty even when low-band
/// triangles are narrower than the bin spacing. Rows are not area-normalized.
Eigen::MatrixXd mel_filterbank(int n_fft_bins, int n_mels, double sample_rate);

/// Log-compressed Mel energies: ln(filterbank * power + 1e-10) per frame.
MelSpectrogram mel_spectrogram(const Spectrogram& spectrogram, int n_mels = kMelBands);

/// Front-end shorthand: stft followed by mel_spectrogram.
MelSpectrogram log_mel_frames(const AudioClip& clip, const StftFrameSpec& spec = {},
                              int n_mels = kMelBands);

}  // namespace melproj

#endif
