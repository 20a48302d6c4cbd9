#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "talkface/parallel.hpp"

namespace talkface::audio {

inline constexpr int kCoefficients = 28;
inline constexpr int kSampleRate = 16000;
inline constexpr int kFps = 30;

using AudioFeatureFrame = std::array<double, kCoefficients>;

struct Waveform {
    std::vector<double> samples;
    int sample_rate = kSampleRate;

    double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Analysis constants. Defaults are pinned; tests and corpora depend on them.
struct MfccConfig {
    int sample_rate = kSampleRate;
    int fps = kFps;
    int window_samples = 480;  // 30 ms at 16 kHz
    int fft_size = 512;
    int mel_filters = 40;
    double preemphasis = 0.97;
    double f_min = 0.0;
    double f_max = 8000.0;
    double energy_floor = 1e-10;
};

/// round(samples * fps / sample_rate), half up.
int frame_count(std::size_t samples, const MfccConfig& cfg = {});

/// Center sample of video frame n: floor((n + 1/2) * sample_rate / fps).
long frame_center(int n, const MfccConfig& cfg = {});

/// One 28-coefficient frame per video frame, each over a Hann window centered
/// on the frame time; samples outside the signal read as zero.
std::vector<AudioFeatureFrame> mfcc_sequence(const Waveform& w, const MfccConfig& cfg = {},
                                             Execution exec = Execution::parallel);

/// Truncates or edge-pads to target. More than 2 frames of slack is a data error.
std::vector<AudioFeatureFrame> align_lengths(std::vector<AudioFeatureFrame> features, std::size_t target);

/// Triangular HTK-mel filterbank, mel_filters x (fft_size / 2 + 1).
std::vector<std::vector<double>> mel_filterbank(const MfccConfig& cfg);

/// Mono PCM16 or float32 WAV.
Waveform read_wav(const std::filesystem::path& path);
void write_wav_float(const std::filesystem::path& path, const Waveform& w);
void write_wav_pcm16(const std::filesystem::path& path, const Waveform& w);

}  // namespace talkface::audio
