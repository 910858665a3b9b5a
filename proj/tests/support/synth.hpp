#ifndef MELPROJ_TESTS_SYNTH_HPP
#define MELPROJ_TESTS_SYNTH_HPP

// Synthetic signal and corpus generation for tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "melproj/rng.hpp"

namespace melproj::test {

constexpr double kTestPi = 3.14159265358979323846;

inline std::vector<double> sine(double freq, int rate, std::size_t n, double amplitude = 1.0,
                                double phase = 0.0) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = amplitude * std::sin(2.0 * kTestPi * freq * static_cast<double>(i) / rate + phase);
    return out;
}

inline std::vector<double> white_noise(std::uint64_t seed, std::size_t n, double amplitude = 0.5) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = amplitude * (2.0 * rng.uniform() - 1.0);
    return out;
}

/// Tone complex: 12 harmonics of f0 with 1/k amplitudes and random phases.
inline std::vector<double> harmonic_texture(std::uint64_t seed, double f0, int rate,
                                            std::size_t n) {
    Rng rng(seed);
    std::vector<double> out(n, 0.0);
    for (int k = 1; k <= 12; ++k) {
        const double phase = rng.uniform(0.0, 2.0 * kTestPi);
        const double amp = 1.0 / k;
        for (std::size_t i = 0; i < n; ++i)
            out[i] += amp * std::sin(2.0 * kTestPi * k * f0 * static_cast<double>(i) / rate + phase);
    }
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    for (double& v : out) v *= 0.5 / peak;
    return out;
}

/// Band-limited noise: 200 random-phase sinusoids spread over [lo, hi] Hz.
inline std::vector<double> noise_texture(std::uint64_t seed, double lo, double hi, int rate,
                                         std::size_t n) {
    Rng rng(seed);
    std::vector<double> out(n, 0.0);
    for (int k = 0; k < 200; ++k) {
        const double freq = rng.uniform(lo, hi);
        const double phase = rng.uniform(0.0, 2.0 * kTestPi);
        for (std::size_t i = 0; i < n; ++i)
            out[i] += std::sin(2.0 * kTestPi * freq * static_cast<double>(i) / rate + phase);
    }
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    for (double& v : out) v *= 0.5 / peak;
    return out;
}

inline void put_u32_le(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u16_le(std::string& s, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

/// Minimal WAV writer. bits: 16/24/32 integer PCM, or 0 for 32-bit float.
inline void write_wav(const std::filesystem::path& path,
                      const std::vector<std::vector<double>>& channels, int rate, int bits = 16) {
    const std::uint16_t n_channels = static_cast<std::uint16_t>(channels.size());
    const std::size_t n = channels.empty() ? 0 : channels[0].size();
    const bool is_float = bits == 0;
    const int bytes = is_float ? 4 : bits / 8;
    const std::uint32_t data_size =
        static_cast<std::uint32_t>(n * n_channels * static_cast<std::size_t>(bytes));

    std::string out;
    out += "RIFF";
    put_u32_le(out, 36 + data_size);
    out += "WAVEfmt ";
    put_u32_le(out, 16);
    put_u16_le(out, is_float ? 3 : 1);
    put_u16_le(out, n_channels);
    put_u32_le(out, static_cast<std::uint32_t>(rate));
    put_u32_le(out, static_cast<std::uint32_t>(rate * n_channels * bytes));
    put_u16_le(out, static_cast<std::uint16_t>(n_channels * bytes));
    put_u16_le(out, static_cast<std::uint16_t>(is_float ? 32 : bits));
    out += "data";
    put_u32_le(out, data_size);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint16_t c = 0; c < n_channels; ++c) {
            const double v = channels[c][i];
            if (is_float) {
                const float f = static_cast<float>(v);
                std::uint32_t u;
                std::memcpy(&u, &f, 4);
                put_u32_le(out, u);
            } else if (bits == 16) {
                auto q = static_cast<std::int32_t>(std::lround(v * 32767.0));
                put_u16_le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
            } else if (bits == 24) {
                auto q = static_cast<std::int32_t>(std::lround(v * 8388607.0));
                out.push_back(static_cast<char>(q & 0xff));
                out.push_back(static_cast<char>((q >> 8) & 0xff));
                out.push_back(static_cast<char>((q >> 16) & 0xff));
            } else {
                auto q = static_cast<std::int64_t>(std::llround(v * 2147483647.0));
                put_u32_le(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(q)));
            }
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

/// Two-class corpus: harmonic tone complexes vs band-limited noise textures,
/// one distinct artist per track. Writes WAVs plus manifest.csv; returns the
/// manifest path.
inline std::filesystem::path make_synthetic_corpus(const std::filesystem::path& dir,
                                                   int tracks_per_class, std::uint64_t seed,
                                                   double seconds = 3.0,
                                                   double f0_base = 150.0) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const int rate = 44100;
    const auto n = static_cast<std::size_t>(seconds * rate);
    std::string csv = "track_id,path,genre,artist,split\n";
    Rng rng(seed);
    for (int i = 0; i < tracks_per_class; ++i) {
        const double f0 = f0_base * (1.0 + 0.08 * i) * rng.uniform(0.97, 1.03);
        const std::string name = "harm_" + std::to_string(i);
        write_wav(dir / (name + ".wav"), {harmonic_texture(seed * 977 + i, f0, rate, n)}, rate);
        csv += name + "," + name + ".wav,harmonic,artist_h" + std::to_string(i) + ",\n";
    }
    for (int i = 0; i < tracks_per_class; ++i) {
        const double lo = 2000.0 + 150.0 * i * rng.uniform(0.9, 1.1);
        const std::string name = "noise_" + std::to_string(i);
        write_wav(dir / (name + ".wav"), {noise_texture(seed * 1409 + i, lo, lo + 2500.0, rate, n)},
                  rate);
        csv += name + "," + name + ".wav,noise,artist_n" + std::to_string(i) + ",\n";
    }
    const fs::path manifest = dir / "manifest.csv";
    std::ofstream out(manifest, std::ios::trunc);
    out << csv;
    return manifest;
}

/// Unique scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir =
        std::filesystem::temp_directory_path() / ("melproj_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace melproj::test

#endif
