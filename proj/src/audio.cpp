#include "melproj/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <string>

#include "melproj/errors.hpp"

namespace melproj {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kTapsPerPhase = 64;
constexpr double kKaiserBeta = 8.6;
constexpr int kMinClipSamples = 1024;  // one STFT frame

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DecodeError("truncated WAV file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw DecodeError("truncated WAV file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

struct WavFormat {
    std::uint16_t format_tag = 0;  // 1 = PCM, 3 = IEEE float
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
};

double decode_sample(const unsigned char* p, const WavFormat& fmt) {
    switch (fmt.format_tag) {
        case 1:  // integer PCM, normalized by 2^(bits-1)
            switch (fmt.bits_per_sample) {
                case 16: {
                    const std::int16_t v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
                    return static_cast<double>(v) / 32768.0;
                }
                case 24: {
                    std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
                    if (v & 0x800000) v |= ~0xffffff;  // sign-extend
                    return static_cast<double>(v) / 8388608.0;
                }
                case 32: {
                    const std::int32_t v = static_cast<std::int32_t>(
                        static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                        (static_cast<std::uint32_t>(p[2]) << 16) |
                        (static_cast<std::uint32_t>(p[3]) << 24));
                    return static_cast<double>(v) / 2147483648.0;
                }
                default:
                    throw DecodeError("unsupported PCM bit depth " + std::to_string(fmt.bits_per_sample));
            }
        case 3: {  // IEEE float
            if (fmt.bits_per_sample != 32)
                throw DecodeError("unsupported float bit depth " + std::to_string(fmt.bits_per_sample));
            std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                              (static_cast<std::uint32_t>(p[2]) << 16) |
                              (static_cast<std::uint32_t>(p[3]) << 24);
            float f;
            std::memcpy(&f, &u, 4);
            return static_cast<double>(f);
        }
        default:
            throw DecodeError("unsupported WAV codec tag " + std::to_string(fmt.format_tag));
    }
}

// Zeroth-order modified Bessel function of the first kind (power series).
double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

}  // namespace

MultiChannelAudio decode_wav(std::istream& in) {
    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0) throw DecodeError("not a RIFF file");
    read_u32(in);  // RIFF chunk size; unreliable in the wild, ignored
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0) throw DecodeError("not a WAVE file");

    WavFormat fmt;
    bool have_fmt = false;
    std::string data;
    bool have_data = false;

    while (in.read(tag, 4)) {
        const std::uint32_t chunk_size = read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw DecodeError("fmt chunk too small");
            fmt.format_tag = read_u16(in);
            fmt.channels = read_u16(in);
            fmt.sample_rate = read_u32(in);
            read_u32(in);  // byte rate
            read_u16(in);  // block align
            fmt.bits_per_sample = read_u16(in);
            std::uint32_t consumed = 16;
            if (fmt.format_tag == 0xfffe) {  // WAVE_FORMAT_EXTENSIBLE
                if (chunk_size < 40) throw DecodeError("extensible fmt chunk too small");
                read_u16(in);  // extension size
                read_u16(in);  // valid bits
                read_u32(in);  // channel mask
                fmt.format_tag = read_u16(in);  // first GUID bytes carry the real tag
                char guid_rest[14];
                in.read(guid_rest, 14);
                consumed = 40;
            }
            in.ignore(chunk_size - consumed + (chunk_size & 1));
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(chunk_size);
            in.read(data.data(), chunk_size);
            if (static_cast<std::uint32_t>(in.gcount()) != chunk_size)
                throw DecodeError("truncated WAV data chunk");
            if (chunk_size & 1) in.ignore(1);
            have_data = true;
        } else {
            // Skip unknown chunks; chunks are word-aligned.
            in.ignore(chunk_size + (chunk_size & 1));
        }
        if (have_fmt && have_data) break;
    }
    if (!have_fmt) throw DecodeError("missing fmt chunk");
    if (!have_data) throw DecodeError("missing data chunk");
    if (fmt.channels == 0) throw DecodeError("WAV reports zero channels");
    if (fmt.sample_rate == 0) throw DecodeError("WAV reports zero sample rate");
    if (data.empty()) throw EmptyAudioError("WAV data chunk is empty");

    const std::size_t bytes_per_sample = fmt.bits_per_sample / 8;
    const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
    if (frame_bytes == 0) throw DecodeError("invalid WAV frame size");
    const std::size_t n_frames = data.size() / frame_bytes;
    if (n_frames == 0) throw EmptyAudioError("WAV data chunk holds no complete frame");

    MultiChannelAudio audio;
    audio.sample_rate = static_cast<int>(fmt.sample_rate);
    audio.channels.assign(fmt.channels, std::vector<double>(n_frames));
    const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t i = 0; i < n_frames; ++i) {
        for (std::uint16_t c = 0; c < fmt.channels; ++c) {
            const double v = decode_sample(p, fmt);
            if (!std::isfinite(v)) throw DecodeError("WAV payload contains non-finite sample");
            audio.channels[c][i] = v;
            p += bytes_per_sample;
        }
    }
    return audio;
}

AudioClip mix_to_mono(const MultiChannelAudio& audio) {
    AudioClip clip;
    clip.sample_rate = audio.sample_rate;
    if (audio.channels.empty()) return clip;
    const std::size_t n = audio.channels[0].size();
    clip.samples.assign(n, 0.0);
    for (const auto& ch : audio.channels)
        for (std::size_t i = 0; i < n; ++i) clip.samples[i] += ch[i];
    const double inv = 1.0 / static_cast<double>(audio.channels.size());
    for (double& s : clip.samples) s *= inv;
    return clip;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw ValidationError("target sample rate must be positive");
    if (clip.sample_rate <= 0) throw ValidationError("source sample rate must be positive");
    if (target_rate == clip.sample_rate) return clip;

    const int g = std::gcd(clip.sample_rate, target_rate);
    const int up = target_rate / g;    // L: zero-stuffing factor
    const int down = clip.sample_rate / g;  // M: decimation factor

    // Prototype lowpass over the upsampled grid: cutoff at the tighter of the
    // source and target Nyquist frequencies, Kaiser-windowed sinc, gain L.
    const int proto_len = kTapsPerPhase * up;
    const double cutoff = 0.5 / static_cast<double>(std::max(up, down));  // cycles/sample, upsampled grid
    const double center = (proto_len - 1) / 2.0;
    std::vector<double> proto(proto_len);
    const double i0_beta = bessel_i0(kKaiserBeta);
    for (int i = 0; i < proto_len; ++i) {
        const double t = i - center;
        const double sinc = (t == 0.0) ? 2.0 * cutoff : std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
        const double frac = t / (center + 0.5);
        const double window = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) / i0_beta;
        proto[i] = static_cast<double>(up) * sinc * window;
    }
    // Normalize each phase to unit DC gain so constant signals pass exactly.
    for (int phase = 0; phase < up; ++phase) {
        double sum = 0.0;
        for (int t = phase; t < proto_len; t += up) sum += proto[t];
        if (sum != 0.0)
            for (int t = phase; t < proto_len; t += up) proto[t] /= sum;
    }

    const std::size_t n = clip.samples.size();
    const std::size_t out_n = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * target_rate / clip.sample_rate));
    AudioClip out;
    out.sample_rate = target_rate;
    out.samples.resize(out_n);

    const std::int64_t offset = proto_len / 2;  // aligns filter center with output time
    for (std::size_t m = 0; m < out_n; ++m) {
        const std::int64_t u = static_cast<std::int64_t>(m) * down + offset;
        const std::int64_t base = u / up;
        const int phase = static_cast<int>(u % up);
        double acc = 0.0;
        for (int t = 0; t < kTapsPerPhase; ++t) {
            const std::int64_t src = base - t;
            if (src >= 0 && src < static_cast<std::int64_t>(n))
                acc += proto[phase + t * up] * clip.samples[static_cast<std::size_t>(src)];
        }
        out.samples[m] = acc;
    }
    return out;
}

AudioClip load_audio(const std::filesystem::path& path, int target_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open audio file " + path.string());
    const MultiChannelAudio raw = decode_wav(in);
    AudioClip mono = mix_to_mono(raw);
    AudioClip out = resample(mono, target_rate);
    if (out.samples.size() < kMinClipSamples)
        throw EmptyAudioError("clip " + path.string() + " is shorter than one analysis frame");
    return out;
}

}  // namespace melproj
