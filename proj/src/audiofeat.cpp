#include "talkface/audiofeat.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "talkface/error.hpp"

namespace talkface::audio {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

// Plans are created once per size under a lock (the FFTW planner is not
// thread-safe); executing with new-array calls is.
class RealFft {
public:
    explicit RealFft(int n) : n_(n)
    {
        static std::mutex planner;
        std::lock_guard lock(planner);
        std::unique_ptr<double, FftwFree> in(fftw_alloc_real(static_cast<std::size_t>(n)));
        std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1)));
        plan_ = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
        require(plan_ != nullptr, ErrorKind::usage, "FFTW planning failed");
    }
    ~RealFft()
    {
        if (plan_)
            fftw_destroy_plan(plan_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    void execute(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(plan_, in, out); }
    int size() const { return n_; }

private:
    int n_;
    fftw_plan plan_ = nullptr;
};

class FrameAnalyzer {
public:
    explicit FrameAnalyzer(const MfccConfig& cfg)
      : cfg_(cfg), fft_(cfg.fft_size), filters_(mel_filterbank(cfg)),
        window_(static_cast<std::size_t>(cfg.window_samples)),
        dct_(static_cast<std::size_t>(kCoefficients * cfg.mel_filters))
    {
        const int L = cfg.window_samples;
        for (int i = 0; i < L; ++i)
            window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (L - 1));
        const int M = cfg.mel_filters;
        for (int k = 0; k < kCoefficients; ++k) {
            const double norm = k == 0 ? std::sqrt(1.0 / M) : std::sqrt(2.0 / M);
            for (int m = 0; m < M; ++m)
                dct_[static_cast<std::size_t>(k * M + m)] = norm * std::cos(std::numbers::pi * k * (m + 0.5) / M);
        }
    }

    // Per-thread scratch buffers aligned for FFTW.
    struct Scratch {
        std::unique_ptr<double, FftwFree> in;
        std::unique_ptr<fftw_complex, FftwFree> out;
        std::vector<double> power;
        std::vector<double> log_mel;
    };

    Scratch scratch() const
    {
        const auto n = static_cast<std::size_t>(cfg_.fft_size);
        return {std::unique_ptr<double, FftwFree>(fftw_alloc_real(n)),
                std::unique_ptr<fftw_complex, FftwFree>(fftw_alloc_complex(n / 2 + 1)),
                std::vector<double>(n / 2 + 1), std::vector<double>(static_cast<std::size_t>(cfg_.mel_filters))};
    }

    AudioFeatureFrame analyze(std::span<const double> emphasized, long center, Scratch& s) const
    {
        const long start = center - cfg_.window_samples / 2;
        const long total = static_cast<long>(emphasized.size());
        double* in = s.in.get();
        std::fill(in, in + cfg_.fft_size, 0.0);
        for (int i = 0; i < cfg_.window_samples; ++i) {
            const long idx = start + i;
            if (idx >= 0 && idx < total)
                in[i] = emphasized[static_cast<std::size_t>(idx)] * window_[static_cast<std::size_t>(i)];
        }
        fft_.execute(in, s.out.get());
        for (std::size_t k = 0; k < s.power.size(); ++k)
            s.power[k] = s.out.get()[k][0] * s.out.get()[k][0] + s.out.get()[k][1] * s.out.get()[k][1];
        for (std::size_t m = 0; m < filters_.size(); ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < s.power.size(); ++k)
                e += filters_[m][k] * s.power[k];
            s.log_mel[m] = std::log(std::max(e, cfg_.energy_floor));
        }
        AudioFeatureFrame out{};
        const auto M = static_cast<std::size_t>(cfg_.mel_filters);
        for (std::size_t k = 0; k < out.size(); ++k) {
            double c = 0.0;
            for (std::size_t m = 0; m < M; ++m)
                c += dct_[k * M + m] * s.log_mel[m];
            out[k] = c;
        }
        return out;
    }

private:
    MfccConfig cfg_;
    RealFft fft_;
    std::vector<std::vector<double>> filters_;
    std::vector<double> window_;
    std::vector<double> dct_;
};

void check_config(const MfccConfig& cfg)
{
    require(cfg.fps > 0 && cfg.window_samples > 1 && cfg.fft_size >= cfg.window_samples, ErrorKind::config,
            "invalid MFCC framing parameters");
    require(cfg.mel_filters >= kCoefficients, ErrorKind::config, "need at least 28 mel filters for 28 coefficients");
    require(cfg.f_min >= 0.0 && cfg.f_max > cfg.f_min && cfg.f_max <= cfg.sample_rate / 2.0, ErrorKind::config,
            "invalid mel frequency range");
}

}  // namespace

int frame_count(std::size_t samples, const MfccConfig& cfg)
{
    const long long num = static_cast<long long>(samples) * cfg.fps * 2 + cfg.sample_rate;
    return static_cast<int>(num / (2LL * cfg.sample_rate));
}

long frame_center(int n, const MfccConfig& cfg)
{
    return static_cast<long>((2LL * n + 1) * cfg.sample_rate / (2LL * cfg.fps));
}

std::vector<std::vector<double>> mel_filterbank(const MfccConfig& cfg)
{
    const int bins = cfg.fft_size / 2 + 1;
    const int M = cfg.mel_filters;
    const double mel_lo = hz_to_mel(cfg.f_min);
    const double mel_hi = hz_to_mel(cfg.f_max);
    std::vector<double> edges(static_cast<std::size_t>(M + 2));
    for (int i = 0; i < M + 2; ++i)
        edges[static_cast<std::size_t>(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (M + 1));

    std::vector<std::vector<double>> bank(static_cast<std::size_t>(M), std::vector<double>(static_cast<std::size_t>(bins)));
    for (int m = 0; m < M; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        for (int k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
            double w = 0.0;
            if (f > lo && f <= mid)
                w = (f - lo) / (mid - lo);
            else if (f > mid && f < hi)
                w = (hi - f) / (hi - mid);
            bank[m][k] = w;
        }
    }
    return bank;
}

std::vector<AudioFeatureFrame> mfcc_sequence(const Waveform& w, const MfccConfig& cfg, Execution exec)
{
    check_config(cfg);
    require(w.sample_rate == cfg.sample_rate, ErrorKind::domain,
            "expected " + std::to_string(cfg.sample_rate) + " Hz audio, got " + std::to_string(w.sample_rate) +
                " Hz (no implicit resampling)");
    require(!w.samples.empty(), ErrorKind::domain, "empty waveform");
    require(static_cast<long long>(w.samples.size()) * cfg.fps > cfg.sample_rate, ErrorKind::domain,
            "audio shorter than one video frame");
    for (double s : w.samples)
        require(std::isfinite(s), ErrorKind::numeric, "non-finite audio sample");

    std::vector<double> emphasized(w.samples.size());
    emphasized[0] = w.samples[0];
    for (std::size_t i = 1; i < w.samples.size(); ++i)
        emphasized[i] = w.samples[i] - cfg.preemphasis * w.samples[i - 1];

    const FrameAnalyzer analyzer(cfg);
    const int n_frames = frame_count(w.samples.size(), cfg);
    std::vector<AudioFeatureFrame> out(static_cast<std::size_t>(n_frames));

    if (exec == Execution::serial) {
        auto scratch = analyzer.scratch();
        for (int n = 0; n < n_frames; ++n)
            out[static_cast<std::size_t>(n)] = analyzer.analyze(emphasized, frame_center(n, cfg), scratch);
        return out;
    }

#pragma omp parallel
    {
        auto scratch = analyzer.scratch();
#pragma omp for schedule(static)
        for (int n = 0; n < n_frames; ++n)
            out[static_cast<std::size_t>(n)] = analyzer.analyze(emphasized, frame_center(n, cfg), scratch);
    }
    return out;
}

std::vector<AudioFeatureFrame> align_lengths(std::vector<AudioFeatureFrame> features, std::size_t target)
{
    const long diff = static_cast<long>(features.size()) - static_cast<long>(target);
    require(std::abs(diff) <= 2, ErrorKind::data,
            "audio/video misalignment of " + std::to_string(diff) + " frames exceeds 2");
    require(!features.empty() || target == 0, ErrorKind::data, "cannot edge-pad an empty feature sequence");
    if (diff > 0) {
        features.resize(target);
    } else {
        while (features.size() < target)
            features.push_back(features.back());
    }
    return features;
}

}  // namespace talkface::audio
