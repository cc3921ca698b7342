#pragma once

#include <string>
#include <vector>

namespace mmdqn {

// Beacon parameters: the distance-to-pitch map plus clip synthesis settings.
// f_min/f_max bound the emitted fundamental; d_max is roughly the map
// diagonal, beyond which the pitch bottoms out at f_min.
struct AudioConfig {
    double f_min = 100.0;    // Hz
    double f_max = 400.0;    // Hz
    double d_max = 25.0;     // meters
    int sample_rate = 16000;
    double duration = 1.16;  // seconds; yields 114 pitch frames at 30ms/10ms
};

struct AudioClip {
    std::vector<float> samples;  // amplitudes in [-1, 1]
    int sample_rate = 16000;
};

inline constexpr int kPitchVectorLength = 114;
inline constexpr int kRawVectorLength = 100;

// Linear map from distance to fundamental frequency, clamped to
// [f_min, f_max]; monotone non-increasing in d.
double distance_to_f0(double d, const AudioConfig& cfg);

// Three-harmonic tone with 1/k amplitude rolloff, peak normalized to 0.9,
// all phases zero. Throws std::domain_error when f0 is outside
// [f_min/2, 2*f_max] (keeps harmonic 3 clear of Nyquist).
AudioClip synthesize_clip(double f0, const AudioConfig& cfg);

// Frame-wise pitch track: 30 ms windows, 10 ms hops, normalized
// autocorrelation over lags spanning [50, 800] Hz, nearest lag, smallest
// lag preferred on ties. Zero-energy frames emit 0.0. Throws
// std::domain_error when the clip is shorter than one window.
std::vector<float> extract_pitch(const AudioClip& clip);

// First 50 ms resampled to 2 kHz by averaging blocks of 8 samples;
// exactly 100 values. Throws std::domain_error on clips shorter than 50 ms.
std::vector<float> downsample_raw(const AudioClip& clip);

enum class AudioFeatureKind { Pitch, Raw };

// Full beacon chain for one distance: pitch features normalized to
// (f - f_min) / (f_max - f_min) with unvoiced zeros kept at 0, raw
// features passed through as-is.
std::vector<float> audio_features(double d, AudioFeatureKind kind, const AudioConfig& cfg);

inline int feature_length(AudioFeatureKind kind) {
    return kind == AudioFeatureKind::Pitch ? kPitchVectorLength : kRawVectorLength;
}

// Mono 16-bit PCM WAV with the canonical 44-byte header.
void write_wav(const AudioClip& clip, const std::string& path);

// Feature vectors precomputed on a 0.1 m distance grid. Construction does
// all the synthesis work; lookups afterwards are read-only and safe from
// any number of threads.
class FeatureCache {
public:
    FeatureCache(AudioFeatureKind kind, const AudioConfig& cfg);

    const std::vector<float>& lookup(double d) const;
    AudioFeatureKind kind() const { return kind_; }

private:
    AudioFeatureKind kind_;
    std::vector<std::vector<float>> entries_;
};

}  // namespace mmdqn
