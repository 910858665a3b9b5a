#ifndef MELPROJ_AUDIO_HPP
#define MELPROJ_AUDIO_HPP

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace melproj {

struct AudioClip {
    std::vector<double> samples;  // amplitudes in [-1, 1]
    int sample_rate = 0;
};

/// Raw decoded WAV payload before mixing.
struct MultiChannelAudio {
    std::vector<std::vector<double>> channels;
    int sample_rate = 0;
};

/// Decodes a RIFF/WAVE stream. Accepts PCM 16/24/32-bit and 32-bit float
/// payloads; integer samples are normalized by 2^(bits-1).
MultiChannelAudio decode_wav(std::istream& in);

/// Per-sample arithmetic mean across channels.
AudioClip mix_to_mono(const MultiChannelAudio& audio);

/// Band-limited polyphase resampler (Kaiser window, beta 8.6, 64 taps per
/// phase). Output length is round(n * target / source) up to one sample.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Decode, mix to mono, resample to `target_rate`. Clips shorter than one
/// analysis frame (1024 samples) after resampling are rejected with
/// EmptyAudioError.
AudioClip load_audio(const std::filesystem::path& path, int target_rate = 44100);

}  // namespace melproj

#endif
