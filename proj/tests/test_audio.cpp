#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

#include "mmdqn/audio.hpp"
#include "mmdqn/geometry.hpp"
#include "mmdqn/rng.hpp"

using namespace mmdqn;

namespace {

// Naive DFT magnitude oracle; returns the frequency of the strongest bin.
double dft_peak_hz(const std::vector<float>& samples, double sample_rate) {
    const int n = static_cast<int>(samples.size());
    double best_mag = -1.0;
    int best_bin = 0;
    for (int k = 1; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (int i = 0; i < n; ++i) {
            double phase = 2.0 * kPi * k * i / n;
            re += samples[i] * std::cos(phase);
            im -= samples[i] * std::sin(phase);
        }
        double mag = re * re + im * im;
        if (mag > best_mag) {
            best_mag = mag;
            best_bin = k;
        }
    }
    return best_bin * sample_rate / n;
}

AudioClip pure_sine(double f0, int rate, double duration) {
    AudioClip clip;
    clip.sample_rate = rate;
    int n = static_cast<int>(std::lround(rate * duration));
    clip.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        clip.samples[i] = static_cast<float>(0.8 * std::sin(2.0 * kPi * f0 * i / rate));
    }
    return clip;
}

double median(std::vector<float> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("distance_to_f0 is the clamped linear map") {
    AudioConfig cfg;
    CHECK(distance_to_f0(0.0, cfg) == doctest::Approx(400.0));
    CHECK(distance_to_f0(25.0, cfg) == doctest::Approx(100.0));
    CHECK(distance_to_f0(80.0, cfg) == doctest::Approx(100.0));
    CHECK(distance_to_f0(12.5, cfg) == doctest::Approx(250.0));
    // monotone non-increasing
    double prev = 1e9;
    for (double d = 0.0; d <= 30.0; d += 0.5) {
        double f = distance_to_f0(d, cfg);
        CHECK(f <= prev + 1e-12);
        prev = f;
    }
    CHECK_THROWS_AS(distance_to_f0(-1.0, cfg), std::domain_error);
}

TEST_CASE("synthesize_clip produces the normalized three-harmonic tone") {
    AudioConfig cfg;
    AudioClip clip = synthesize_clip(200.0, cfg);

    CHECK(clip.samples.size() == 18560);
    CHECK(clip.samples[0] == doctest::Approx(0.0));

    float peak = 0.0f;
    for (float v : clip.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(0.9).epsilon(1e-6));

    SUBCASE("DFT magnitude peaks at the fundamental") {
        // 4640 samples = 0.29 s keeps the oracle fast; 200 Hz sits exactly
        // on bin 58.
        std::vector<float> head(clip.samples.begin(), clip.samples.begin() + 4640);
        double peak_hz = dft_peak_hz(head, cfg.sample_rate);
        CHECK(peak_hz == doctest::Approx(200.0).epsilon(0.01));
    }

    SUBCASE("out-of-band fundamentals are rejected") {
        CHECK_THROWS_AS(synthesize_clip(25.0, cfg), std::domain_error);
        CHECK_THROWS_AS(synthesize_clip(900.0, cfg), std::domain_error);
    }
}

TEST_CASE("extract_pitch tracks clean tones") {
    AudioConfig cfg;

    SUBCASE("pure 200 Hz sine gives exactly 200.0 in all 114 frames") {
        AudioClip clip = pure_sine(200.0, 16000, 1.16);
        std::vector<float> pitch = extract_pitch(clip);
        REQUIRE(pitch.size() == 114);
        for (float v : pitch) CHECK(v == 200.0f);
    }

    SUBCASE("all-zero clip gives 114 zeros") {
        AudioClip clip;
        clip.sample_rate = 16000;
        clip.samples.assign(18560, 0.0f);
        std::vector<float> pitch = extract_pitch(clip);
        REQUIRE(pitch.size() == 114);
        for (float v : pitch) CHECK(v == 0.0f);
    }

    SUBCASE("harmonic 350 Hz clip within 3 percent") {
        AudioClip clip = synthesize_clip(350.0, cfg);
        std::vector<float> pitch = extract_pitch(clip);
        REQUIRE(pitch.size() == 114);
        CHECK(median(pitch) == doctest::Approx(350.0).epsilon(0.03));
    }

    SUBCASE("values are zero or inside the tracker band") {
        AudioClip clip = synthesize_clip(117.0, cfg);
        for (float v : extract_pitch(clip)) {
            bool ok = v == 0.0f || (v >= 50.0f && v <= 800.0f);
            CHECK(ok);
        }
    }

    SUBCASE("clip shorter than one window is rejected") {
        AudioClip clip;
        clip.sample_rate = 16000;
        clip.samples.assign(400, 0.1f);
        CHECK_THROWS_AS(extract_pitch(clip), std::domain_error);
    }
}

TEST_CASE("pitch estimator hits 50 random sines within 3 percent") {
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
        double f0 = rng.next_range(100.0, 400.0);
        AudioClip clip = pure_sine(f0, 16000, 1.16);
        double est = median(extract_pitch(clip));
        CHECK(std::abs(est - f0) / f0 < 0.03);
    }
}

TEST_CASE("downsample_raw keeps 100 bounded values with signal structure") {
    AudioConfig cfg;

    SUBCASE("length and bounds") {
        AudioClip clip = synthesize_clip(250.0, cfg);
        std::vector<float> raw = downsample_raw(clip);
        REQUIRE(raw.size() == 100);
        for (float v : raw) CHECK(std::abs(v) <= 1.0f);
    }

    SUBCASE("200 Hz clip has at least 9 zero crossings in 50 ms") {
        AudioClip clip = synthesize_clip(200.0, cfg);
        std::vector<float> raw = downsample_raw(clip);
        int crossings = 0;
        for (size_t i = 1; i < raw.size(); ++i) {
            if ((raw[i - 1] < 0.0f && raw[i] > 0.0f) || (raw[i - 1] > 0.0f && raw[i] < 0.0f)) {
                ++crossings;
            }
        }
        CHECK(crossings >= 9);
    }

    SUBCASE("150 vs 300 Hz clips separate in the 100-point DFT") {
        AudioClip lo = synthesize_clip(150.0, cfg);
        AudioClip hi = synthesize_clip(300.0, cfg);
        double lo_peak = dft_peak_hz(downsample_raw(lo), 2000.0);
        double hi_peak = dft_peak_hz(downsample_raw(hi), 2000.0);
        CHECK(lo_peak != hi_peak);
        CHECK(std::abs(lo_peak - 150.0) <= 20.0);
        CHECK(std::abs(hi_peak - 300.0) <= 20.0);
    }

    SUBCASE("short clip rejected") {
        AudioClip clip;
        clip.sample_rate = 16000;
        clip.samples.assign(700, 0.1f);
        CHECK_THROWS_AS(downsample_raw(clip), std::domain_error);
    }
}

TEST_CASE("audio_features composes the full beacon chain") {
    AudioConfig cfg;

    SUBCASE("d = 0 pitch features sit at 1.0") {
        std::vector<float> v = audio_features(0.0, AudioFeatureKind::Pitch, cfg);
        REQUIRE(v.size() == 114);
        for (float x : v) CHECK(x == doctest::Approx(1.0).epsilon(0.01));
    }

    SUBCASE("d >= d_max pitch features sit at 0.0") {
        std::vector<float> v = audio_features(30.0, AudioFeatureKind::Pitch, cfg);
        REQUIRE(v.size() == 114);
        for (float x : v) CHECK(x == doctest::Approx(0.0).epsilon(0.01));
    }

    SUBCASE("raw features equal the hand-composed chain") {
        std::vector<float> composed = audio_features(12.5, AudioFeatureKind::Raw, cfg);
        std::vector<float> manual =
            downsample_raw(synthesize_clip(distance_to_f0(12.5, cfg), cfg));
        CHECK(composed == manual);
    }

    SUBCASE("deterministic") {
        CHECK(audio_features(7.3, AudioFeatureKind::Pitch, cfg) ==
              audio_features(7.3, AudioFeatureKind::Pitch, cfg));
        CHECK(audio_features(7.3, AudioFeatureKind::Raw, cfg) ==
              audio_features(7.3, AudioFeatureKind::Raw, cfg));
    }
}

TEST_CASE("distance round-trips through the beacon within 0.8 m") {
    AudioConfig cfg;
    for (int d = 0; d <= 24; d += 2) {
        AudioClip clip = synthesize_clip(distance_to_f0(d, cfg), cfg);
        double f_est = median(extract_pitch(clip));
        double d_est = (1.0 - (f_est - cfg.f_min) / (cfg.f_max - cfg.f_min)) * cfg.d_max;
        CHECK(std::abs(d_est - d) <= 0.8);
    }
}

TEST_CASE("write_wav emits the canonical 44-byte header") {
    AudioConfig cfg;
    cfg.duration = 0.01;  // keep the file tiny
    AudioClip clip = synthesize_clip(200.0, cfg);
    const std::string path = "test_beacon.wav";
    write_wav(clip, path);

    std::ifstream is(path, std::ios::binary);
    REQUIRE(static_cast<bool>(is));
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 44 + clip.samples.size() * 2);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RIFF");
    CHECK(std::string(bytes.begin() + 8, bytes.begin() + 12) == "WAVE");
    CHECK(std::string(bytes.begin() + 12, bytes.begin() + 16) == "fmt ");
    CHECK(std::string(bytes.begin() + 36, bytes.begin() + 40) == "data");
    auto u32 = [&](size_t off) {
        return bytes[off] | (bytes[off + 1] << 8) | (bytes[off + 2] << 16) |
               (static_cast<uint32_t>(bytes[off + 3]) << 24);
    };
    CHECK(u32(24) == 16000);                          // sample rate
    CHECK(u32(40) == clip.samples.size() * 2);        // data chunk size
    CHECK(u32(4) == 36 + clip.samples.size() * 2);    // RIFF chunk size
    std::remove(path.c_str());
}

TEST_CASE("feature cache matches the direct chain and survives concurrent reads") {
    AudioConfig cfg;
    cfg.d_max = 3.0;  // 31 entries keeps the test quick
    FeatureCache cache(AudioFeatureKind::Pitch, cfg);

    for (double d : {0.0, 0.1, 1.5, 2.9, 3.0}) {
        CHECK(cache.lookup(d) == audio_features(d, AudioFeatureKind::Pitch, cfg));
    }
    // distances quantize to the 0.1 m grid and clamp at d_max
    CHECK(cache.lookup(1.449) == cache.lookup(1.4));
    CHECK(cache.lookup(99.0) == cache.lookup(3.0));

    std::vector<std::thread> readers;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 4; ++t) {
        readers.emplace_back([&cache, &mismatches] {
            for (int i = 0; i < 2000; ++i) {
                double d = (i % 31) * 0.1;
                if (cache.lookup(d).size() != 114) mismatches.fetch_add(1);
            }
        });
    }
    for (auto& th : readers) th.join();
    CHECK(mismatches.load() == 0);
}
