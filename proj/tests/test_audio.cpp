#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "melproj/audio.hpp"
#include "melproj/errors.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace melproj;
namespace fs = std::filesystem;

namespace {

fs::path wav_path(const std::string& name) {
    static const fs::path dir = test::scratch_dir("audio");
    return dir / name;
}

AudioClip clip_of(std::vector<double> samples, int rate) {
    AudioClip c;
    c.samples = std::move(samples);
    c.sample_rate = rate;
    return c;
}

}  // namespace

TEST_CASE("mono 44100 Hz 16-bit WAV decodes on the identity path") {
    const auto samples = test::sine(440.0, 44100, 44100, 0.5);
    const auto path = wav_path("identity.wav");
    test::write_wav(path, {samples}, 44100, 16);
    const AudioClip clip = load_audio(path);
    CHECK(clip.sample_rate == 44100);
    CHECK(clip.samples.size() == 44100);
    // 16-bit quantization error bound.
    for (std::size_t i = 0; i < 256; ++i)
        CHECK(clip.samples[i] == doctest::Approx(samples[i]).epsilon(0).scale(1).epsilon(1e-4));
}

TEST_CASE("opposite constant stereo channels mix to silence") {
    const std::vector<double> left(8192, 0.5), right(8192, -0.5);
    const auto path = wav_path("stereo_cancel.wav");
    test::write_wav(path, {left, right}, 44100, 16);
    const AudioClip clip = load_audio(path);
    for (double s : clip.samples) CHECK(std::abs(s) <= 1.0 / 32768.0);
}

TEST_CASE("22050 Hz input doubles in length at 44100 Hz") {
    const auto samples = test::sine(500.0, 22050, 22050, 0.4);
    const auto path = wav_path("upsample.wav");
    test::write_wav(path, {samples}, 22050, 16);
    const AudioClip clip = load_audio(path);
    CHECK(clip.sample_rate == 44100);
    // Length oracle: round(n * 44100 / src) within one sample.
    CHECK(std::abs(static_cast<long>(clip.samples.size()) - 44100L) <= 1);
}

TEST_CASE("resample is the identity when rates match") {
    const AudioClip clip = clip_of(test::white_noise(3, 4096), 44100);
    const AudioClip out = resample(clip, 44100);
    REQUIRE(out.samples.size() == clip.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        CHECK(out.samples[i] == clip.samples[i]);
}

TEST_CASE("DC level survives any rate change") {
    const AudioClip dc = clip_of(std::vector<double>(20000, 0.3), 44100);
    for (int target : {48000, 22050, 44100, 16000}) {
        const AudioClip out = resample(dc, target);
        const std::size_t edge = 256;
        for (std::size_t i = edge; i + edge < out.samples.size(); ++i)
            CHECK(std::abs(out.samples[i] - 0.3) < 1e-3);
    }
}

TEST_CASE("1 kHz tone survives 48000 to 44100 with spurious below -60 dB") {
    const std::size_t n = 48000;
    const AudioClip src = clip_of(test::sine(1000.0, 48000, n, 0.9), 48000);
    const AudioClip out = resample(src, 44100);
    REQUIRE(std::abs(static_cast<long>(out.samples.size()) - 44100L) <= 1);

    // DFT oracle over an interior slice, Blackman-Harris windowed so leakage
    // sits far below the -60 dB assertion level.
    const std::size_t m = 8192;
    const std::size_t offset = 2048;
    std::vector<double> slice(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double w = 0.35875 - 0.48829 * std::cos(2.0 * test::kTestPi * i / (m - 1)) +
                         0.14128 * std::cos(4.0 * test::kTestPi * i / (m - 1)) -
                         0.01168 * std::cos(6.0 * test::kTestPi * i / (m - 1));
        slice[i] = out.samples[offset + i] * w;
    }
    const auto spectrum = test::naive_dft(slice);
    std::size_t peak_bin = 0;
    double peak = 0.0;
    for (std::size_t k = 0; k < m / 2; ++k) {
        if (std::abs(spectrum[k]) > peak) {
            peak = std::abs(spectrum[k]);
            peak_bin = k;
        }
    }
    const double expected_bin = 1000.0 * static_cast<double>(m) / 44100.0;
    CHECK(std::abs(static_cast<double>(peak_bin) - expected_bin) <= 1.0);

    double worst_spur = 0.0;
    for (std::size_t k = 0; k < m / 2; ++k) {
        if (k + 8 >= peak_bin && k <= peak_bin + 8) continue;  // skip the mainlobe
        worst_spur = std::max(worst_spur, std::abs(spectrum[k]));
    }
    CHECK(20.0 * std::log10(worst_spur / peak) < -60.0);
}

TEST_CASE("mixing then resampling equals resampling then mixing") {
    const int rate = 32000;
    MultiChannelAudio stereo;
    stereo.sample_rate = rate;
    stereo.channels = {test::sine(700.0, rate, 16000, 0.6),
                       test::white_noise(11, 16000, 0.4)};
    const AudioClip mixed_first = resample(mix_to_mono(stereo), 44100);

    AudioClip left = clip_of(stereo.channels[0], rate);
    AudioClip right = clip_of(stereo.channels[1], rate);
    const AudioClip left_rs = resample(left, 44100);
    const AudioClip right_rs = resample(right, 44100);
    REQUIRE(left_rs.samples.size() == mixed_first.samples.size());
    for (std::size_t i = 0; i < mixed_first.samples.size(); ++i) {
        const double mixed_after = (left_rs.samples[i] + right_rs.samples[i]) / 2.0;
        CHECK(std::abs(mixed_first.samples[i] - mixed_after) < 1e-6);
    }
}

TEST_CASE("resampled output stays finite and mixing never raises the peak") {
    MultiChannelAudio stereo;
    stereo.sample_rate = 48000;
    stereo.channels = {test::white_noise(21, 9000, 0.9), test::white_noise(22, 9000, 0.9)};
    double peak_in = 0.0;
    for (const auto& ch : stereo.channels)
        for (double s : ch) peak_in = std::max(peak_in, std::abs(s));
    const AudioClip mono = mix_to_mono(stereo);
    double peak_mono = 0.0;
    for (double s : mono.samples) peak_mono = std::max(peak_mono, std::abs(s));
    CHECK(peak_mono <= peak_in + 1e-12);
    const AudioClip out = resample(mono, 44100);
    for (double s : out.samples) CHECK(std::isfinite(s));
}

TEST_CASE("24-bit and float WAV payloads decode") {
    const auto samples = test::sine(300.0, 44100, 4096, 0.25);
    for (int bits : {24, 32, 0}) {
        const auto path = wav_path("depth_" + std::to_string(bits) + ".wav");
        test::write_wav(path, {samples}, 44100, bits);
        const AudioClip clip = load_audio(path);
        REQUIRE(clip.samples.size() == samples.size());
        for (std::size_t i = 0; i < 64; ++i)
            CHECK(std::abs(clip.samples[i] - samples[i]) < 1e-4);
    }
}

TEST_CASE("decode errors carry their causes") {
    SUBCASE("truncated file") {
        const auto path = wav_path("truncated.wav");
        test::write_wav(path, {test::sine(300.0, 44100, 4096)}, 44100, 16);
        const auto size = fs::file_size(path);
        fs::resize_file(path, size / 2);
        std::ifstream in(path, std::ios::binary);
        CHECK_THROWS_AS(decode_wav(in), DecodeError);
    }
    SUBCASE("not a RIFF file") {
        std::istringstream in("definitely not audio");
        CHECK_THROWS_AS(decode_wav(in), DecodeError);
    }
    SUBCASE("zero-length payload") {
        const auto path = wav_path("empty.wav");
        test::write_wav(path, {std::vector<double>{}}, 44100, 16);
        std::ifstream in(path, std::ios::binary);
        CHECK_THROWS_AS(decode_wav(in), EmptyAudioError);
    }
    SUBCASE("unsupported codec") {
        const auto path = wav_path("alaw.wav");
        test::write_wav(path, {test::sine(300.0, 44100, 2048)}, 44100, 16);
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(20);
        const char alaw[2] = {0x06, 0x00};
        f.write(alaw, 2);
        f.close();
        std::ifstream in(path, std::ios::binary);
        CHECK_THROWS_AS(decode_wav(in), DecodeError);
    }
    SUBCASE("clip shorter than one analysis frame") {
        const auto path = wav_path("short.wav");
        test::write_wav(path, {test::sine(300.0, 44100, 512)}, 44100, 16);
        CHECK_THROWS_AS(load_audio(path), EmptyAudioError);
    }
}
