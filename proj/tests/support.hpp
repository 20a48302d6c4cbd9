#pragma once

// Helpers and independent oracles shared by the unit and acceptance tests.
// Oracles deliberately avoid the library code they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "talkface/corpus.hpp"
#include "talkface/error.hpp"
#include "talkface/geometry.hpp"

namespace support {

using talkface::Vec3;
using talkface::geometry::HeadPose;
using talkface::geometry::Landmarks;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("talkface_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

/// Kind of the talkface::Error thrown by fn, or nothing if it returns.
template <class F>
std::optional<talkface::ErrorKind> error_kind(F&& fn)
{
    try {
        fn();
    } catch (const talkface::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// A normalized frame: a synthetic identity with every point jittered, then
/// re-centered and re-scaled.
inline Landmarks random_normalized_frame(std::mt19937_64& rng)
{
    std::normal_distribution<double> noise(0.0, 0.02);
    Landmarks p = talkface::corpus::identity_face(rng(), static_cast<int>(rng() % 8));
    for (auto& v : p)
        v = v + Vec3{noise(rng), noise(rng), noise(rng)};
    return talkface::geometry::renormalize(p).points;
}

inline HeadPose random_pose(std::mt19937_64& rng)
{
    HeadPose p;
    p.yaw = uniform(rng, -0.8, 0.8);
    p.pitch = uniform(rng, -0.8, 0.8);
    p.roll = uniform(rng, -0.8, 0.8);
    p.translation = {uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, -5, 5)};
    return p;
}

/// Element-by-element expansion of Rz(roll) * Ry(yaw) * Rx(pitch), row-major.
inline std::array<double, 9> hand_rotation(double yaw, double pitch, double roll)
{
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cr = std::cos(roll), sr = std::sin(roll);
    return {cr * cy, cr * sy * sp - sr * cp, cr * sy * cp + sr * sp,
            sr * cy, sr * sy * sp + cr * cp, sr * sy * cp - cr * sp,
            -sy,     cy * sp,                cy * cp};
}

/// s * M * p + t with M from hand_rotation.
inline Vec3 dense_transform(const std::array<double, 9>& m, double s, Vec3 p, Vec3 t)
{
    return {s * (m[0] * p.x + m[1] * p.y + m[2] * p.z) + t.x,
            s * (m[3] * p.x + m[4] * p.y + m[5] * p.z) + t.y,
            s * (m[6] * p.x + m[7] * p.y + m[8] * p.z) + t.z};
}

// ---------------------------------------------------------------- MFCC oracle

/// Straight-line MFCC: pre-emphasis, symmetric Hann window centred at
/// floor((2n+1) sr / 2fps), zero-padded 512-point DFT evaluated term by term,
/// power spectrum, 40 HTK triangles over 0..8 kHz, natural log floored at
/// 1e-10, orthonormal DCT-II, first 28 coefficients.
inline std::vector<std::array<double, 28>> naive_mfcc(const std::vector<double>& x, int frames)
{
    constexpr int sr = 16000, fps = 30, L = 480, N = 512, M = 40, C = 28;
    const double pi = std::numbers::pi;

    std::vector<double> e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        e[i] = x[i] - (i ? 0.97 * x[i - 1] : 0.0);

    const auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    const auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    double edge[M + 2];
    for (int i = 0; i < M + 2; ++i)
        edge[i] = hz(mel(0.0) + (mel(8000.0) - mel(0.0)) * i / (M + 1));

    std::vector<std::array<double, 28>> out;
    for (int n = 0; n < frames; ++n) {
        const long center = (2L * n + 1) * sr / (2L * fps);
        const long start = center - L / 2;
        double buf[N] = {};
        for (int i = 0; i < L; ++i) {
            const long idx = start + i;
            if (idx >= 0 && idx < static_cast<long>(e.size()))
                buf[i] = e[static_cast<std::size_t>(idx)] * (0.5 - 0.5 * std::cos(2.0 * pi * i / (L - 1)));
        }
        double power[N / 2 + 1];
        for (int k = 0; k <= N / 2; ++k) {
            double re = 0.0, im = 0.0;
            for (int t = 0; t < N; ++t) {
                re += buf[t] * std::cos(2.0 * pi * k * t / N);
                im -= buf[t] * std::sin(2.0 * pi * k * t / N);
            }
            power[k] = re * re + im * im;
        }
        double logmel[M];
        for (int m = 0; m < M; ++m) {
            double acc = 0.0;
            for (int k = 0; k <= N / 2; ++k) {
                const double f = static_cast<double>(k) * sr / N;
                double w = 0.0;
                if (f > edge[m] && f <= edge[m + 1])
                    w = (f - edge[m]) / (edge[m + 1] - edge[m]);
                else if (f > edge[m + 1] && f < edge[m + 2])
                    w = (edge[m + 2] - f) / (edge[m + 2] - edge[m + 1]);
                acc += w * power[k];
            }
            logmel[m] = std::log(std::max(acc, 1e-10));
        }
        std::array<double, 28> c{};
        for (int k = 0; k < C; ++k) {
            double s = 0.0;
            for (int m = 0; m < M; ++m)
                s += logmel[m] * std::cos(pi * k * (2 * m + 1) / (2.0 * M));
            c[k] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / M);
        }
        out.push_back(c);
    }
    return out;
}

inline std::vector<double> sine(double freq, double seconds, double amplitude = 0.5)
{
    const auto n = static_cast<std::size_t>(std::lround(seconds * 16000));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / 16000.0);
    return x;
}

// ---------------------------------------------------------------- DTW oracle

/// Every monotone alignment of an n x m grid from (0,0) to (n-1,m-1) with unit
/// steps, as flat cell indices i*m+j.
inline std::vector<std::vector<std::uint8_t>> all_alignments(int n, int m)
{
    std::vector<std::vector<std::uint8_t>> paths;
    std::vector<std::uint8_t> cur;
    auto walk = [&](auto&& self, int i, int j) -> void {
        cur.push_back(static_cast<std::uint8_t>(i * m + j));
        if (i == n - 1 && j == m - 1) {
            paths.push_back(cur);
        } else {
            if (i + 1 < n && j + 1 < m)
                self(self, i + 1, j + 1);
            if (i + 1 < n)
                self(self, i + 1, j);
            if (j + 1 < m)
                self(self, i, j + 1);
        }
        cur.pop_back();
    };
    walk(walk, 0, 0);
    return paths;
}

/// Minimum over the given alignments of the summed |a_i - b_j|.
inline double enumerate_dtw(const std::vector<double>& a, const std::vector<double>& b,
                            const std::vector<std::vector<std::uint8_t>>& paths)
{
    const std::size_t m = b.size();
    double cost[64];
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < m; ++j)
            cost[i * m + j] = std::abs(a[i] - b[j]);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : paths) {
        double s = 0.0;
        for (auto c : p)
            s += cost[c];
        best = std::min(best, s);
    }
    return best;
}

/// All sequences of length 1..max_len over {0, 1, ..., symbols-1}.
inline std::vector<std::vector<double>> all_sequences(int max_len, int symbols)
{
    std::vector<std::vector<double>> out;
    for (int len = 1; len <= max_len; ++len) {
        std::vector<int> digits(static_cast<std::size_t>(len), 0);
        for (;;) {
            out.emplace_back(digits.begin(), digits.end());
            int k = 0;
            while (k < len && ++digits[static_cast<std::size_t>(k)] == symbols)
                digits[static_cast<std::size_t>(k++)] = 0;
            if (k == len)
                break;
        }
    }
    return out;
}

}  // namespace support
