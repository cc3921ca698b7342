#include "mmdqn/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "mmdqn/geometry.hpp"

namespace mmdqn {

namespace {

constexpr double kWindowMs = 30.0;
constexpr double kStepMs = 10.0;
constexpr double kPitchLowHz = 50.0;   // search band for the tracker
constexpr double kPitchHighHz = 800.0;
constexpr double kVoicedRmsFloor = 1e-4;

}  // namespace

double distance_to_f0(double d, const AudioConfig& cfg) {
    if (d < 0.0) throw std::domain_error("distance_to_f0: negative distance");
    double u = std::clamp(1.0 - d / cfg.d_max, 0.0, 1.0);
    return cfg.f_min + (cfg.f_max - cfg.f_min) * u;
}

AudioClip synthesize_clip(double f0, const AudioConfig& cfg) {
    if (f0 < 0.5 * cfg.f_min || f0 > 2.0 * cfg.f_max) {
        throw std::domain_error("synthesize_clip: f0 outside [f_min/2, 2*f_max]");
    }
    const int n = static_cast<int>(std::lround(cfg.duration * cfg.sample_rate));
    std::vector<double> raw(n);
    double peak = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / cfg.sample_rate;
        double s = 0.0;
        for (int k = 1; k <= 3; ++k) {
            s += std::sin(2.0 * kPi * k * f0 * t) / k;
        }
        raw[i] = s;
        peak = std::max(peak, std::abs(s));
    }
    AudioClip clip;
    clip.sample_rate = cfg.sample_rate;
    clip.samples.resize(n);
    const double scale = 0.9 / peak;
    for (int i = 0; i < n; ++i) clip.samples[i] = static_cast<float>(raw[i] * scale);
    return clip;
}

std::vector<float> extract_pitch(const AudioClip& clip) {
    const int rate = clip.sample_rate;
    const int window = static_cast<int>(std::lround(kWindowMs * rate / 1000.0));
    const int step = static_cast<int>(std::lround(kStepMs * rate / 1000.0));
    const int n = static_cast<int>(clip.samples.size());
    if (n < window) throw std::domain_error("extract_pitch: clip shorter than one window");

    const int frames = (n - window) / step + 1;
    const int lag_min = static_cast<int>(std::ceil(rate / kPitchHighHz));
    const int lag_max = std::min(static_cast<int>(std::floor(rate / kPitchLowHz)), window - 1);

    std::vector<float> pitch(frames, 0.0f);
    #pragma omp parallel for schedule(static)
    for (int f = 0; f < frames; ++f) {
        const float* w = clip.samples.data() + static_cast<size_t>(f) * step;

        double energy = 0.0;
        for (int i = 0; i < window; ++i) energy += static_cast<double>(w[i]) * w[i];
        if (std::sqrt(energy / window) < kVoicedRmsFloor) continue;

        const int lag_count = lag_max - lag_min + 1;
        std::vector<double> corr(lag_count);
        double peak = -2.0;
        for (int lag = lag_min; lag <= lag_max; ++lag) {
            const int m = window - lag;
            double num = 0.0, e0 = 0.0, e1 = 0.0;
            for (int i = 0; i < m; ++i) {
                double a = w[i];
                double b = w[i + lag];
                num += a * b;
                e0 += a * a;
                e1 += b * b;
            }
            corr[lag - lag_min] = num / std::sqrt(e0 * e1 + 1e-12);
            peak = std::max(peak, corr[lag - lag_min]);
        }
        // Period multiples correlate as well as the period itself, often
        // fractionally better when the true lag is not integral. Take the
        // first local maximum within tolerance of the global peak so the
        // fundamental wins, not a subharmonic.
        int best_lag = 0;
        for (int i = 0; i < lag_count; ++i) {
            const bool left_ok = i == 0 || corr[i] >= corr[i - 1];
            const bool right_ok = i == lag_count - 1 || corr[i] >= corr[i + 1];
            if (left_ok && right_ok && corr[i] >= peak - 0.02) {
                best_lag = lag_min + i;
                break;
            }
        }
        if (best_lag > 0) pitch[f] = static_cast<float>(static_cast<double>(rate) / best_lag);
    }
    return pitch;
}

std::vector<float> downsample_raw(const AudioClip& clip) {
    const int block = clip.sample_rate / 2000;  // 8 at 16 kHz
    const int needed = block * kRawVectorLength;
    if (static_cast<int>(clip.samples.size()) < needed) {
        throw std::domain_error("downsample_raw: clip shorter than 50 ms");
    }
    std::vector<float> out(kRawVectorLength);
    for (int k = 0; k < kRawVectorLength; ++k) {
        double acc = 0.0;
        for (int i = 0; i < block; ++i) acc += clip.samples[static_cast<size_t>(k) * block + i];
        out[k] = static_cast<float>(acc / block);
    }
    return out;
}

std::vector<float> audio_features(double d, AudioFeatureKind kind, const AudioConfig& cfg) {
    const double f0 = distance_to_f0(d, cfg);
    const AudioClip clip = synthesize_clip(f0, cfg);
    if (kind == AudioFeatureKind::Raw) return downsample_raw(clip);

    std::vector<float> pitch = extract_pitch(clip);
    const float span = static_cast<float>(cfg.f_max - cfg.f_min);
    for (float& v : pitch) {
        if (v != 0.0f) v = (v - static_cast<float>(cfg.f_min)) / span;
    }
    return pitch;
}

void write_wav(const AudioClip& clip, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_wav: cannot open " + path);

    auto put_u32 = [&](uint32_t v) {
        char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
        os.write(b, 4);
    };
    auto put_u16 = [&](uint16_t v) {
        char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
        os.write(b, 2);
    };

    const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
    os.write("RIFF", 4);
    put_u32(36 + data_bytes);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    put_u32(16);
    put_u16(1);  // PCM
    put_u16(1);  // mono
    put_u32(static_cast<uint32_t>(clip.sample_rate));
    put_u32(static_cast<uint32_t>(clip.sample_rate * 2));
    put_u16(2);   // block align
    put_u16(16);  // bits per sample
    os.write("data", 4);
    put_u32(data_bytes);
    for (float v : clip.samples) {
        float clamped = std::clamp(v, -1.0f, 1.0f);
        put_u16(static_cast<uint16_t>(static_cast<int16_t>(std::lround(clamped * 32767.0f))));
    }
    if (!os) throw std::runtime_error("write_wav: write failed for " + path);
}

FeatureCache::FeatureCache(AudioFeatureKind kind, const AudioConfig& cfg) : kind_(kind) {
    const int n = static_cast<int>(std::lround(cfg.d_max * 10.0)) + 1;
    entries_.resize(n);
    #pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        entries_[i] = audio_features(i * 0.1, kind, cfg);
    }
}

const std::vector<float>& FeatureCache::lookup(double d) const {
    long q = std::lround(std::max(d, 0.0) * 10.0);
    q = std::min<long>(q, static_cast<long>(entries_.size()) - 1);
    return entries_[static_cast<size_t>(q)];
}

}  // namespace mmdqn
