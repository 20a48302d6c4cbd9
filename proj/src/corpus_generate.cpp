#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "talkface/corpus.hpp"
#include "talkface/error.hpp"
#include "talkface/hash.hpp"
#include "talkface/textio.hpp"

namespace talkface::corpus {

namespace {

using geometry::Landmarks;
namespace lm = landmarks;

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b + 0x51ed27ULL));
}

// Template geometry, canonical units: x right, y down, z toward the viewer,
// nose tip at the origin and inter-cheek distance exactly 1.
constexpr double kEyeCenterX = 0.2;
constexpr double kEyeCenterY = -0.13;
constexpr double kEyeHalfWidth = 0.085;
constexpr double kEyeHalfHeight = 0.035;
constexpr double kEyeZ = -0.12;
constexpr double kIrisRadius = 0.018;
constexpr double kMouthY = 0.2;
constexpr double kMouthOpenScale = 0.1;
constexpr double kPauseLevel = 0.05;

void place_eye(Landmarks& p, lm::Range ring, double cx, double half_height, double outer_sign)
{
    // lower lid outer->inner, then upper lid outer->inner (corners excluded)
    for (std::size_t j = 0; j < lm::kLowerLidCount; ++j) {
        const double phi = kPi * static_cast<double>(j) / 8.0;
        p[ring.first + j] = {cx + outer_sign * kEyeHalfWidth * std::cos(phi),
                             kEyeCenterY + half_height * std::sin(phi), kEyeZ + 0.01 * std::sin(phi)};
    }
    for (std::size_t k = 1; k <= 7; ++k) {
        const double phi = kPi * static_cast<double>(k) / 8.0;
        p[ring.first + lm::kLowerLidCount + k - 1] = {cx + outer_sign * kEyeHalfWidth * std::cos(phi),
                                                      kEyeCenterY - half_height * std::sin(phi),
                                                      kEyeZ + 0.01 * std::sin(phi)};
    }
}

void place_iris(Landmarks& p, lm::Range iris, double cx)
{
    const double z = kEyeZ + 0.02;
    p[iris.first] = {cx, kEyeCenterY, z};
    p[iris.first + 1] = {cx + kIrisRadius, kEyeCenterY, z};
    p[iris.first + 2] = {cx, kEyeCenterY - kIrisRadius, z};
    p[iris.first + 3] = {cx - kIrisRadius, kEyeCenterY, z};
    p[iris.first + 4] = {cx, kEyeCenterY + kIrisRadius, z};
}

void place_mouth(Landmarks& p, double opening)
{
    // outer lower 11 (corner to corner), outer upper 9, inner lower 11, inner upper 9
    std::size_t at = lm::kMouth.first;
    auto arc = [&](int count, bool interior_only, double half_width, double half_height, double open, double z0) {
        for (int j = 0; j < count; ++j) {
            const int k = interior_only ? j + 1 : j;
            const double u = -1.0 + 2.0 * k / 10.0;
            const double bulge = std::sqrt(std::max(0.0, 1.0 - u * u));
            p[at++] = {half_width * u, kMouthY + (half_height + open) * bulge, z0 - 0.05 * u * u};
        }
    };
    arc(11, false, 0.16, 0.035, opening, 0.0);
    arc(9, true, 0.16, -0.035, -0.2 * opening, 0.0);
    arc(11, false, 0.12, 0.008, opening, -0.01);
    arc(9, true, 0.12, -0.008, -0.2 * opening, -0.01);
}

void place_brows(Landmarks& p, double raise)
{
    auto brow = [&](lm::Range r, double cx, double outer_sign) {
        for (std::size_t j = 0; j < r.count; ++j) {
            const double u = static_cast<double>(j) / (r.count - 1);  // outer -> inner
            const double x = cx + outer_sign * (0.11 - 0.22 * u);
            const double y = kEyeCenterY - 0.085 - 0.025 * std::sin(kPi * u) - raise;
            p[r.first + j] = {x, y, -0.1};
        }
    };
    brow(lm::kLeftBrow, kEyeCenterX, 1.0);
    brow(lm::kRightBrow, -kEyeCenterX, -1.0);
}

Landmarks template_face()
{
    Landmarks p{};
    // Oval: the cheeks (positions 8 and 28) sit at angle 80 and 280 degrees,
    // so the half-axis below makes their distance exactly 1.
    const double a = 0.5 / std::sin(80.0 * kPi / 180.0);
    const double b = 0.68;
    for (std::size_t i = 0; i < lm::kOval.count; ++i) {
        const double t = 2.0 * kPi * static_cast<double>(i) / 36.0;
        p[lm::kOval.first + i] = {a * std::sin(t), 0.08 - b * std::cos(t), -0.35};
    }
    // exact cheek symmetry
    p[lm::kRightCheek] = {-p[lm::kLeftCheek].x, p[lm::kLeftCheek].y, p[lm::kLeftCheek].z};

    place_brows(p, 0.0);
    place_eye(p, lm::kLeftEyeRing, kEyeCenterX, kEyeHalfHeight, 1.0);
    place_eye(p, lm::kRightEyeRing, -kEyeCenterX, kEyeHalfHeight, -1.0);
    place_iris(p, lm::kLeftIris, kEyeCenterX);
    place_iris(p, lm::kRightIris, -kEyeCenterX);

    const Vec3 nose[] = {{0, 0, 0},         {0, 0.04, -0.03},   {0, -0.02, -0.01},
                         {0, -0.05, -0.02}, {0, -0.12, -0.07},  {-0.05, 0.03, -0.07},
                         {0, -0.17, -0.09}, {0, -0.08, -0.04},  {0.05, 0.03, -0.07}};
    for (std::size_t i = 0; i < lm::kNose.count; ++i)
        p[lm::kNose.first + i] = nose[i];

    place_mouth(p, 0.0);
    return p;
}

double envelope(double t, const std::vector<std::array<double, 3>>& syllables)
{
    double e = 0.0;
    for (const auto& [center, width, amp] : syllables) {
        const double d = (t - center) / width;
        e += amp * std::exp(-0.5 * d * d);
    }
    return std::min(1.0, e);
}

void append_profile(std::string& out, const EmotionMotionProfile& p)
{
    const double scalars[] = {p.eye_opening_scale, p.pitch_bias, p.yaw_amplitude, p.pitch_amplitude,
                              p.roll_amplitude, p.pose_frequency, p.gaze_switch_probability, p.mouth_gain,
                              p.brow_raise};
    out += std::to_string(p.emotion);
    for (double v : scalars) {
        out += ' ';
        textio::append_double(out, v);
    }
    for (double w : p.gaze_weights) {
        out += ' ';
        textio::append_double(out, w);
    }
    out += '\n';
}

int sample_zone(const std::array<double, gaze::kZones>& weights, std::mt19937_64& rng)
{
    std::discrete_distribution<int> dist(weights.begin(), weights.end());
    return dist(rng);
}

}  // namespace

std::vector<EmotionMotionProfile> default_profiles()
{
    auto make = [](Emotion e, double eye, double pitch, double yaw_a, double pitch_a, double roll_a, double freq,
                   std::array<double, gaze::kZones> weights, double switching, double mouth, double brow) {
        EmotionMotionProfile p;
        p.emotion = static_cast<int>(e);
        p.eye_opening_scale = eye;
        p.pitch_bias = pitch;
        p.yaw_amplitude = yaw_a;
        p.pitch_amplitude = pitch_a;
        p.roll_amplitude = roll_a;
        p.pose_frequency = freq;
        p.gaze_weights = weights;
        p.gaze_switch_probability = switching;
        p.mouth_gain = mouth;
        p.brow_raise = brow;
        return p;
    };
    return {
        make(Emotion::neutral, 1.0, 0.0, 0.05, 0.03, 0.02, 0.4, {0, 0.1, 0.5, 0.1, 0, 0, 0.05, 0.2, 0.05, 0}, 0.8, 1.0, 0.0),
        make(Emotion::angry, 0.8, -0.08, 0.06, 0.05, 0.03, 0.7, {0, 0.15, 0.35, 0.15, 0, 0, 0, 0.35, 0, 0}, 0.7, 1.2, -0.02),
        // narrowed eyes, head tilted up, gaze shifted horizontally
        make(Emotion::contempt, 0.55, 0.18, 0.08, 0.03, 0.05, 0.35, {0.25, 0, 0.1, 0, 0.25, 0.2, 0, 0, 0, 0.2}, 0.9, 0.8,
             0.0),
        make(Emotion::disgusted, 0.7, -0.04, 0.05, 0.04, 0.06, 0.45, {0, 0, 0.2, 0, 0, 0.3, 0.3, 0.2, 0, 0}, 0.8, 0.9,
             -0.015),
        make(Emotion::fear, 1.3, -0.06, 0.1, 0.05, 0.03, 0.9, {0.2, 0.15, 0.3, 0.15, 0.2, 0, 0, 0, 0, 0}, 1.0, 1.1, 0.02),
        make(Emotion::happy, 0.85, 0.05, 0.07, 0.05, 0.04, 0.6, {0, 0, 0.4, 0, 0, 0, 0.15, 0.3, 0.15, 0}, 0.8, 1.3, 0.005),
        make(Emotion::sad, 0.75, -0.15, 0.03, 0.02, 0.02, 0.25, {0, 0, 0, 0, 0, 0.2, 0.25, 0.3, 0.25, 0}, 0.6, 0.6, 0.01),
        // widened eyes, forward-facing head and gaze
        make(Emotion::surprised, 1.5, 0.0, 0.02, 0.02, 0.01, 0.3, {0, 0.075, 0.75, 0.075, 0, 0, 0, 0.1, 0, 0}, 0.7, 1.2,
             0.04),
    };
}

std::string profile_hash(const std::vector<EmotionMotionProfile>& profiles)
{
    std::string text;
    for (const auto& p : profiles)
        append_profile(text, p);
    return sha256_hex(text);
}

KeypointOracle::KeypointOracle(std::uint64_t seed, double scale_factor)
  : seed_(seed), scale_factor_(scale_factor), matrix_(static_cast<std::size_t>(kKeypoints * 3 * lm::kCount * 3))
{
    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> n01(0.0, 1.0);
    const double s = 1.0 / std::sqrt(static_cast<double>(lm::kCount * 3));
    for (double& v : matrix_)
        v = s * n01(rng);
}

Keypoints KeypointOracle::project(const geometry::Landmarks& relocated) const
{
    constexpr std::size_t cols = lm::kCount * 3;
    Keypoints out{};
    for (std::size_t r = 0; r < kKeypoints * 3; ++r) {
        const double* row = matrix_.data() + r * cols;
        double acc = 0.0;
        for (std::size_t i = 0; i < lm::kCount; ++i) {
            const Vec3& p = relocated[i];
            acc += row[3 * i] * p.x + row[3 * i + 1] * p.y + row[3 * i + 2] * p.z;
        }
        const double v = acc / scale_factor_;
        Vec3& k = out[r / 3];
        (r % 3 == 0 ? k.x : r % 3 == 1 ? k.y : k.z) = v;
    }
    return out;
}

geometry::Landmarks identity_face(std::uint64_t seed, int identity, double canonical_width)
{
    Landmarks p = template_face();
    std::mt19937_64 rng(stream_seed(seed, 0x1d, static_cast<std::uint64_t>(identity)));
    std::normal_distribution<double> jitter(0.0, 0.006);
    // Shape variation on oval, brows and nose; lids, irises, lips, nose tip
    // and cheeks stay on the template so closed-form statistics hold.
    auto perturb = [&](lm::Range r) {
        for (std::size_t i = r.first; i < r.first + r.count; ++i) {
            if (i == lm::kNoseTip || i == lm::kLeftCheek || i == lm::kRightCheek)
                continue;
            p[i] += Vec3{jitter(rng), jitter(rng), jitter(rng)};
        }
    };
    perturb(lm::kOval);
    perturb(lm::kLeftBrow);
    perturb(lm::kRightBrow);
    perturb(lm::kNose);
    if (canonical_width != 1.0)
        for (Vec3& q : p)
            q = canonical_width * q;
    return geometry::place_pupils(p, gaze::make_label(gaze::kCenterZone, gaze::kCenterZone));
}

Corpus generate_synthetic(const std::vector<EmotionMotionProfile>& profiles, const GeneratorConfig& cfg)
{
    require(cfg.length >= 30, ErrorKind::config, "sequence length must be at least 30 frames");
    require(cfg.sequences_per_emotion >= 1, ErrorKind::config, "need at least one sequence per emotion");
    require(cfg.identities >= 1, ErrorKind::config, "need at least one identity");
    require(!profiles.empty(), ErrorKind::config, "empty profile set");
    std::array<bool, kEmotions> seen{};
    for (const auto& p : profiles) {
        require(p.emotion >= 0 && p.emotion < kEmotions, ErrorKind::config,
                "profile emotion out of range: " + std::to_string(p.emotion));
        require(!seen[static_cast<std::size_t>(p.emotion)], ErrorKind::config,
                "duplicate emotion id in profiles: " + std::to_string(p.emotion));
        seen[static_cast<std::size_t>(p.emotion)] = true;
        require(p.eye_opening_scale > 0 && p.mouth_gain > 0 && p.pose_frequency > 0, ErrorKind::config,
                "profile scales must be positive");
        double wsum = 0.0;
        for (double w : p.gaze_weights) {
            require(w >= 0.0, ErrorKind::config, "negative gaze weight");
            wsum += w;
        }
        require(wsum > 0.0, ErrorKind::config, "gaze weights sum to zero");
    }

    Corpus corpus;
    corpus.seed = cfg.seed;
    corpus.keypoint_seed = stream_seed(cfg.seed, 0x6b, 0);
    corpus.profile_hash = profile_hash(profiles);
    const KeypointOracle oracle(corpus.keypoint_seed, cfg.scale_factor);
    const int fps = audio::kFps;
    const int sr = audio::kSampleRate;

    std::vector<Landmarks> faces;
    for (int id = 0; id < cfg.identities; ++id)
        faces.push_back(identity_face(cfg.seed, id, 1.0));

    for (const auto& prof : profiles) {
        for (int s = 0; s < cfg.sequences_per_emotion; ++s) {
            SequenceRecord seq;
            seq.emotion = prof.emotion;
            seq.seed = stream_seed(cfg.seed, static_cast<std::uint64_t>(prof.emotion) + 1, static_cast<std::uint64_t>(s));
            seq.id = std::string(emotion_name(prof.emotion)) + "_" + (s < 10 ? "00" : s < 100 ? "0" : "") +
                     std::to_string(s);
            seq.canonical_width = cfg.canonical_width;
            std::mt19937_64 rng(seq.seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::normal_distribution<double> n01(0.0, 1.0);
            seq.identity = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.identities));

            // Audio: harmonic carrier under a syllable envelope.
            const double duration = static_cast<double>(cfg.length) / fps;
            std::vector<std::array<double, 3>> syllables;
            for (double c = -0.25; c < duration + 0.25; c += 0.25) {
                const double center = c + 0.1 * (unit(rng) - 0.5);
                const double width = 0.05 + 0.04 * unit(rng);
                const double amp = 0.4 + 0.6 * unit(rng);
                if (unit(rng) < 0.35)
                    continue;  // pause
                syllables.push_back({center, width, amp});
            }
            const double f0 = 110.0 + 90.0 * unit(rng);
            std::array<double, 8> phases{};
            for (double& ph : phases)
                ph = 2.0 * kPi * unit(rng);
            const auto n_samples = static_cast<std::size_t>(cfg.length) * static_cast<std::size_t>(sr) / fps;
            seq.waveform.sample_rate = sr;
            seq.waveform.samples.resize(n_samples);
            for (std::size_t i = 0; i < n_samples; ++i) {
                const double t = static_cast<double>(i) / sr;
                double carrier = 0.0;
                for (int h = 1; h <= 8; ++h)
                    carrier += std::sin(2.0 * kPi * h * f0 * t + phases[static_cast<std::size_t>(h - 1)]) / h;
                const double x = 0.25 * envelope(t, syllables) * carrier + 0.002 * n01(rng);
                seq.waveform.samples[i] = static_cast<double>(static_cast<float>(x));
            }
            seq.audio = audio::mfcc_sequence(seq.waveform);
            seq.audio = audio::align_lengths(std::move(seq.audio), static_cast<std::size_t>(cfg.length));

            // Pose: emotion bias plus slow oscillation.
            const double ph_yaw = 2.0 * kPi * unit(rng), ph_pitch = 2.0 * kPi * unit(rng);
            const double ph_roll = 2.0 * kPi * unit(rng), ph_tx = 2.0 * kPi * unit(rng), ph_ty = 2.0 * kPi * unit(rng);
            int zone = sample_zone(prof.gaze_weights, rng);

            const Landmarks& face = faces[static_cast<std::size_t>(seq.identity)];
            for (int n = 0; n < cfg.length; ++n) {
                const double t = (n + 0.5) / fps;
                const double w = 2.0 * kPi * prof.pose_frequency * t;
                geometry::HeadPose pose;
                pose.yaw = prof.yaw_amplitude * std::sin(w + ph_yaw) + 0.002 * n01(rng);
                pose.pitch = prof.pitch_bias + prof.pitch_amplitude * std::sin(0.8 * w + ph_pitch) + 0.002 * n01(rng);
                pose.roll = prof.roll_amplitude * std::sin(1.2 * w + ph_roll) + 0.002 * n01(rng);
                pose.translation = {2.0 * std::sin(2.0 * kPi * 0.3 * t + ph_tx),
                                    1.5 * std::sin(2.0 * kPi * 0.4 * t + ph_ty), 0.0};

                // gaze shifts happen at the onset of speech pauses
                const bool pause_onset = n > 0 && envelope(t, syllables) < kPauseLevel &&
                                         envelope(t - 1.0 / fps, syllables) >= kPauseLevel;
                if (pause_onset && unit(rng) < prof.gaze_switch_probability)
                    zone = sample_zone(prof.gaze_weights, rng);
                const gaze::GazeLabel label = gaze::make_label(zone, zone);

                const double eye_scale = prof.eye_opening_scale * (1.0 + 0.04 * n01(rng));
                const double opening = kMouthOpenScale * prof.mouth_gain * envelope(t, syllables);

                Landmarks pts = face;
                place_eye(pts, lm::kLeftEyeRing, kEyeCenterX, kEyeHalfHeight * eye_scale, 1.0);
                place_eye(pts, lm::kRightEyeRing, -kEyeCenterX, kEyeHalfHeight * eye_scale, -1.0);
                for (std::size_t i = 0; i < lm::kLeftBrow.count + lm::kRightBrow.count; ++i)
                    pts[lm::kLeftBrow.first + i].y -= prof.brow_raise;
                place_mouth(pts, opening);
                pts = geometry::place_pupils(pts, label);
                if (cfg.canonical_width != 1.0)
                    for (Vec3& q : pts)
                        q = cfg.canonical_width * q;

                geometry::NormalizedLandmarkFrame norm{pts, cfg.canonical_width};
                const auto relocated = geometry::relocate(norm, pose, label, cfg.scale_factor);
                Keypoints kp = oracle.project(relocated.points);
                for (Vec3& k : kp)
                    k += Vec3{cfg.keypoint_noise * n01(rng), cfg.keypoint_noise * n01(rng),
                              cfg.keypoint_noise * n01(rng)};

                seq.landmarks.push_back(pts);
                seq.poses.push_back(pose);
                seq.gaze.push_back(label);
                seq.keypoints.push_back(kp);
            }
            validate(seq);
            corpus.sequences.push_back(std::move(seq));
        }
    }
    return corpus;
}

}  // namespace talkface::corpus
