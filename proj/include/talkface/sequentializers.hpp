#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "talkface/audiofeat.hpp"
#include "talkface/corpus.hpp"
#include "talkface/gaze.hpp"
#include "talkface/geometry.hpp"
#include "talkface/neural/checkpoint.hpp"
#include "talkface/neural/graph.hpp"
#include "talkface/neural/layers.hpp"
#include "talkface/neural/optim.hpp"

namespace talkface::model {

using nn::Graph;
using nn::LstmState;
using nn::Var;

inline constexpr std::size_t kLandmarkValues = landmarks::kCount * 3;
inline constexpr std::size_t kPoseValues = 6;
inline constexpr std::size_t kGazePosition = 4;  // column and row of each pupil
inline constexpr std::size_t kKeypointValues = corpus::kKeypoints * 3;

struct ModelConfig {
    std::size_t hidden = 128;           // causal cue recurrence
    std::size_t audio_hidden = 32;      // per direction of the audio encoder
    std::size_t audio_radius = 2;       // encoder window is 2r+1 frames, edge-clamped
    std::size_t cue_dim = 64;           // encoded previous cue
    std::size_t emotion_dim = 16;       // D
    std::size_t gaze_embedding = 16;    // previous gaze encoding
    std::size_t keypoint_hidden = 64;
    double y_weight = 2.0;
    double scale_factor = geometry::kDefaultScaleFactor;
    std::uint64_t seed = 1;

    std::map<std::string, std::string> to_meta() const;
    static ModelConfig from_meta(const std::map<std::string, std::string>& meta);
};

/// Per-coefficient standardization of the audio features, fitted on the
/// training split and stored with the weights.
struct FeatureStats {
    audio::AudioFeatureFrame mean{};
    audio::AudioFeatureFrame stdev{};

    FeatureStats() { stdev.fill(1.0); }
    static FeatureStats fit(std::span<const corpus::SequenceRecord> sequences);
    audio::AudioFeatureFrame apply(const audio::AudioFeatureFrame& a) const;

    std::string encode() const;
    static FeatureStats decode(const std::string& text);
};

/// Starting point of an auto-regressive run: C_{-1}, r_{-1}, v_{-1}.
struct Reference {
    geometry::Landmarks landmarks{};
    geometry::HeadPose pose;
    gaze::GazeLabel gaze = gaze::make_label(gaze::kCenterZone, gaze::kCenterZone);
};

/// Neutral identity face of the synthetic generator, frontal pose, centered gaze.
Reference synthetic_reference(const corpus::Corpus& corpus, int identity);

enum class Cue { landmark, pose, gaze };

/// One sequentializer step: hidden feature f_n and the cue head output
/// (C_n flattened, r_n, or gaze logits).
struct CueStep {
    Var feature;
    Var output;
};

/// Bidirectional recurrence over a fully known window of audio frames.
struct AudioEncoder {
    nn::RecurrentLayer rnn;

    Var operator()(Graph& g, std::span<const Var> window) const { return rnn.encode(g, window); }
};

/// Normalized audio inputs for a whole sequence, one node per frame.
std::vector<Var> audio_inputs(Graph& g, const FeatureStats& stats, std::span<const audio::AudioFeatureFrame> frames);
/// Window of 2r+1 nodes around frame n, clamped at both ends.
std::vector<Var> audio_window(std::span<const Var> inputs, std::size_t n, std::size_t radius);

/// Stage 1: landmark, pose and gaze sequentializers sharing one emotion
/// embedding, plus the collaborative emotion classifier.
class Stage1Model {
public:
    explicit Stage1Model(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    nn::ParameterSet& params() { return params_; }
    const nn::ParameterSet& params() const { return params_; }
    FeatureStats& stats() { return stats_; }
    const FeatureStats& stats() const { return stats_; }

    /// Seeded uniform init, then head biases set to the given training means.
    /// stay_logit is the initial bonus on the previous gaze label's logit.
    void initialize(const geometry::Landmarks& mean_landmarks, const std::array<double, kPoseValues>& mean_pose,
                    double stay_logit = 0.0);

    /// Column k of E; domain error outside [0, K).
    Var embed_emotion(Graph& g, int k) const;
    Var encode_audio(Graph& g, Cue cue, std::span<const Var> window) const;
    LstmState initial(Graph& g, Cue cue) const;

    CueStep landmark_step(Graph& g, LstmState& s, Var prev_landmarks, Var audio, Var e) const;
    CueStep pose_step(Graph& g, LstmState& s, Var prev_pose, Var audio, Var e) const;
    /// Output is the 100 gaze logits; softmax gives p_n.
    CueStep gaze_step(Graph& g, LstmState& s, int prev_joint, Var audio, Var e) const;
    /// Logits over the K emotions from concat(f_l, f_r, f_g).
    Var classify_emotion(Graph& g, Var f_l, Var f_r, Var f_g) const;

    /// Parameters owned by one cue branch (encoder, recurrence, head).
    std::vector<nn::ParamId> branch_params(Cue cue) const;

private:
    struct Branch {
        AudioEncoder audio;
        nn::Linear cue_encoder;  // unused for gaze
        nn::Linear gaze_prev;  // gaze only: grid position of both pupils
        nn::ParamId gaze_skip = 0;  // gaze only: previous-gaze encoding to logits
        nn::ParamId gaze_stay = 0;  // gaze only: one shared bonus on the previous label's logit
        nn::RecurrentLayer core;
        nn::Linear head;
    };

    const Branch& branch(Cue cue) const { return branches_[static_cast<std::size_t>(cue)]; }
    CueStep run(Graph& g, const Branch& b, LstmState& s, Var cue_in, Var audio, Var e) const;

    ModelConfig cfg_;
    nn::ParameterSet params_;
    FeatureStats stats_;
    nn::Embedding emotion_;
    std::array<Branch, 3> branches_;
    nn::Linear classifier_;
};

/// Stage 2: latent keypoint sequentializer S_Key.
class KeypointModel {
public:
    explicit KeypointModel(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    nn::ParameterSet& params() { return params_; }
    const nn::ParameterSet& params() const { return params_; }
    FeatureStats& stats() { return stats_; }
    const FeatureStats& stats() const { return stats_; }
    std::uint64_t oracle_seed() const { return oracle_seed_; }
    void set_oracle_seed(std::uint64_t s) { oracle_seed_ = s; }

    void initialize(const std::array<double, kKeypointValues>& mean_keypoints);

    Var embed_emotion(Graph& g, int k) const;
    Var encode_audio(Graph& g, std::span<const Var> window) const;
    LstmState initial(Graph& g) const;
    /// relocated is R_n divided by the scale factor.
    Var keypoint_step(Graph& g, LstmState& s, Var prev_keypoints, Var relocated, Var audio, Var e) const;

private:
    ModelConfig cfg_;
    nn::ParameterSet params_;
    FeatureStats stats_;
    std::uint64_t oracle_seed_ = 0;
    nn::Embedding emotion_;
    AudioEncoder audio_;
    nn::Linear prev_encoder_;
    nn::Linear relocated_encoder_;
    nn::RecurrentLayer core_;
    nn::Linear head_;
    nn::ParamId skip_ = 0;  // linear path from R_n to K_n, no bias
};

/// Flattened relocated landmarks divided by the scale factor.
std::vector<double> scaled_relocated(const geometry::Landmarks& relocated, double scale_factor);

// Checkpoints. Meta records the model kind, config, feature statistics and
// the number of completed epochs.

std::string save_stage1(const std::filesystem::path& path, const Stage1Model& m, const nn::Adam* adam = nullptr,
                        int epochs_done = 0);
std::string save_keypoint(const std::filesystem::path& path, const KeypointModel& m, const nn::Adam* adam = nullptr,
                          int epochs_done = 0);

struct LoadedStage1 {
    Stage1Model model;
    nn::Checkpoint checkpoint;
    int epochs_done = 0;
};
struct LoadedKeypoint {
    KeypointModel model;
    nn::Checkpoint checkpoint;
    int epochs_done = 0;
};

/// Usage error when the file is missing; data error on checksum or kind mismatch.
LoadedStage1 load_stage1(const std::filesystem::path& path);
LoadedKeypoint load_keypoint(const std::filesystem::path& path);

/// Everything synthesized for one clip.
struct Bundle {
    int emotion = 0;
    std::uint64_t seed = 0;
    double scale_factor = geometry::kDefaultScaleFactor;
    std::string stage1_digest;
    std::string stage2_digest;

    std::vector<geometry::Landmarks> landmarks;   // C_n
    std::vector<geometry::HeadPose> poses;        // r_n
    std::vector<gaze::GazeLabel> gaze;
    std::vector<geometry::Landmarks> relocated;   // R_n
    std::vector<corpus::Keypoints> keypoints;     // K_n, empty without stage 2

    std::size_t length() const { return landmarks.size(); }
};

struct SynthesisInput {
    std::vector<audio::AudioFeatureFrame> features;  // raw MFCC, one per frame
    int emotion = 0;
    Reference reference;
    std::uint64_t seed = 0;  // recorded in the bundle
};

/// Fully auto-regressive: every cue is fed its own previous output. Without a
/// keypoint model the bundle stops at R_n.
Bundle synthesize(const Stage1Model& stage1, const KeypointModel* stage2, const SynthesisInput& in,
                  const std::string& stage1_digest = {}, const std::string& stage2_digest = {});

Bundle bundle_from_sequence(const corpus::SequenceRecord& seq, double scale_factor);

/// <dir>/bundle.json and <dir>/bundle.frames. Returns the bundle hash
/// (sha256 over the frames file followed by the manifest).
std::string write_bundle(const std::filesystem::path& dir, const Bundle& b);
Bundle read_bundle(const std::filesystem::path& dir);
std::string bundle_hash(const std::filesystem::path& dir);

}  // namespace talkface::model
