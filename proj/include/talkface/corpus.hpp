#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "talkface/audiofeat.hpp"
#include "talkface/gaze.hpp"
#include "talkface/geometry.hpp"

namespace talkface::corpus {

inline constexpr int kEmotions = 8;
inline constexpr int kKeypoints = 10;
inline constexpr std::string_view kFramesSchema = "talkface-frames 1";
inline constexpr std::string_view kSequenceSchema = "talkface-sequence/1";
inline constexpr std::string_view kCorpusSchema = "talkface-corpus/1";

/// MEAD's eight categories, in label order.
enum class Emotion { neutral, angry, contempt, disgusted, fear, happy, sad, surprised };

std::string_view emotion_name(int label);
int emotion_from_name(std::string_view name);

using Keypoints = std::array<Vec3, kKeypoints>;

/// One sequence: per-frame aligned audio features, normalized landmarks,
/// head pose, gaze and (optionally) latent keypoints.
struct SequenceRecord {
    std::string id;
    int emotion = 0;
    int identity = 0;
    int fps = audio::kFps;
    std::uint64_t seed = 0;
    double canonical_width = geometry::kDefaultCanonicalWidth;

    std::vector<audio::AudioFeatureFrame> audio;
    std::vector<geometry::Landmarks> landmarks;
    std::vector<geometry::HeadPose> poses;
    std::vector<gaze::GazeLabel> gaze;
    std::vector<Keypoints> keypoints;  // empty or same length as the rest

    /// In memory after generation; on disk as <id>.wav next to the frames.
    audio::Waveform waveform;
    std::filesystem::path audio_path;

    std::size_t length() const { return landmarks.size(); }
};

/// Throws data error naming the first violated invariant.
void validate(const SequenceRecord& seq);

/// Per-emotion motion archetype used by the synthetic generator.
struct EmotionMotionProfile {
    int emotion = 0;
    double eye_opening_scale = 1.0;  // multiplies the neutral lid gap
    double pitch_bias = 0.0;         // radians, positive = head tilted up
    double yaw_amplitude = 0.05;
    double pitch_amplitude = 0.04;
    double roll_amplitude = 0.03;
    double pose_frequency = 0.5;  // Hz
    std::array<double, gaze::kZones> gaze_weights{};
    double gaze_switch_probability = 0.8;  // chance of a new zone at each speech-pause onset
    double mouth_gain = 1.0;
    double brow_raise = 0.0;  // canonical units, positive = up
};

std::vector<EmotionMotionProfile> default_profiles();
std::string profile_hash(const std::vector<EmotionMotionProfile>& profiles);

/// Fixed seeded linear map from relocated landmarks to latent keypoints;
/// the stand-in for a pretrained keypoint encoder.
class KeypointOracle {
public:
    explicit KeypointOracle(std::uint64_t seed, double scale_factor = geometry::kDefaultScaleFactor);

    Keypoints project(const geometry::Landmarks& relocated) const;
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    double scale_factor_;
    std::vector<double> matrix_;  // 30 x 441
};

struct GeneratorConfig {
    int sequences_per_emotion = 6;
    int length = 90;  // frames
    std::uint64_t seed = 20240601;
    int identities = 4;
    double keypoint_noise = 0.01;
    double scale_factor = geometry::kDefaultScaleFactor;
    double canonical_width = geometry::kDefaultCanonicalWidth;
};

struct Corpus {
    std::vector<SequenceRecord> sequences;
    std::uint64_t seed = 0;
    std::uint64_t keypoint_seed = 0;
    std::string profile_hash;
};

/// Neutral face of a synthetic identity (normalized, pupils centered).
geometry::Landmarks identity_face(std::uint64_t seed, int identity, double canonical_width = 1.0);

/// Deterministic in (profiles, config). Mouth opening follows the audio
/// envelope; eye opening, pitch bias and gaze follow the emotion profile.
Corpus generate_synthetic(const std::vector<EmotionMotionProfile>& profiles, const GeneratorConfig& cfg);

/// Writes <dir>/corpus.json, and per sequence <id>.json, <id>.frames, <id>.wav.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

/// Frame file of one sequence, "talkface-frames 1" schema.
std::string format_frames(const SequenceRecord& seq);
/// Parses frame lines into seq. Errors carry file name, line and byte offset.
void parse_frames(std::string_view text, const std::string& name, SequenceRecord& seq);

SequenceRecord load_sequence(const std::filesystem::path& manifest);
Corpus load_corpus(const std::filesystem::path& dir);

struct Split {
    std::vector<SequenceRecord> train;
    std::vector<SequenceRecord> heldout;
};

/// By whole sequences; round(fraction * n) go to train, at least one each side
/// when n >= 2.
Split split(const std::vector<SequenceRecord>& sequences, double train_fraction, std::uint64_t seed);

}  // namespace talkface::corpus
