#pragma once

#include <functional>
#include <span>
#include <vector>

#include "talkface/corpus.hpp"
#include "talkface/neural/optim.hpp"
#include "talkface/parallel.hpp"
#include "talkface/sequentializers.hpp"

namespace talkface::model {

struct TrainConfig {
    int epochs = 50;
    std::size_t batch_size = 4;
    nn::AdamConfig adam;
    double clip_norm = 5.0;  // global gradient norm, 0 disables
    std::uint64_t shuffle_seed = 11;
    Execution execution = Execution::parallel;
};

/// A training sequence with the reference it starts from.
struct Sample {
    const corpus::SequenceRecord* sequence = nullptr;
    Reference reference;
};

/// Per-epoch means over training sequences. total is the sum of the
/// components.
struct Stage1Loss {
    int epoch = 0;
    double landmarks = 0.0;
    double pose = 0.0;
    double gaze = 0.0;
    double emotion = 0.0;
    double total = 0.0;
};

struct Stage2Loss {
    int epoch = 0;
    double keypoints = 0.0;
    double total = 0.0;
};

/// Loss nodes of one teacher-forced pass over a sequence.
struct Stage1Terms {
    Var landmarks;
    Var pose;
    Var gaze;
    Var emotion;
    Var total;
};

Stage1Terms stage1_sequence_loss(const Stage1Model& m, Graph& g, const Sample& s);
Var stage2_sequence_loss(const KeypointModel& m, Graph& g, const Sample& s);

/// Teacher-forcing start of a corpus sequence: the identity's neutral face,
/// frontal pose and the sequence's own first gaze label.
Reference training_reference(const corpus::Corpus& corpus, const corpus::SequenceRecord& seq);
/// Samples over seqs, which must outlive them.
std::vector<Sample> make_samples(const corpus::Corpus& corpus, std::span<const corpus::SequenceRecord> seqs);

/// Data error when any sample is misaligned, before any training happens.
void check_samples(std::span<const Sample> samples, bool need_keypoints);

/// Training means for bias initialization.
geometry::Landmarks mean_landmarks(std::span<const Sample> samples);
std::array<double, kPoseValues> mean_pose(std::span<const Sample> samples);
std::array<double, kKeypointValues> mean_keypoints(std::span<const Sample> samples);
/// log(rho (V - 1) / (1 - rho)) for the training rate rho at which a frame
/// keeps the previous joint gaze label (the reference counts for frame 0):
/// over otherwise equal logits it gives the previous label probability rho.
double stay_logit(std::span<const Sample> samples);

using EpochHook1 = std::function<void(const Stage1Loss&)>;
using EpochHook2 = std::function<void(const Stage2Loss&)>;

/// Runs epochs [first_epoch, cfg.epochs). Batch order for an epoch depends
/// only on (shuffle_seed, epoch), so a resumed run continues the same curve.
/// Serial and parallel execution produce bit-identical weights.
std::vector<Stage1Loss> train_stage1(Stage1Model& m, nn::Adam& opt, std::span<const Sample> samples,
                                     const TrainConfig& cfg, int first_epoch = 0, const EpochHook1& hook = {});
std::vector<Stage2Loss> train_stage2(KeypointModel& m, nn::Adam& opt, std::span<const Sample> samples,
                                     const TrainConfig& cfg, int first_epoch = 0, const EpochHook2& hook = {});

/// Teacher-forced held-out scores.
struct Stage1Eval {
    double landmark_error = 0.0;   // mean Euclidean per point
    double pose_error = 0.0;       // mean absolute per component
    double gaze_accuracy = 0.0;    // joint label, per frame
    double emotion_accuracy = 0.0; // classifier argmax, per frame
    std::size_t frames = 0;
};

struct Stage2Eval {
    double keypoint_error = 0.0;  // mean absolute per coordinate
    std::size_t frames = 0;
};

Stage1Eval evaluate_stage1(const Stage1Model& m, std::span<const Sample> samples,
                           Execution exec = Execution::parallel);
Stage2Eval evaluate_stage2(const KeypointModel& m, std::span<const Sample> samples,
                           Execution exec = Execution::parallel);

/// Batch order of one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

}  // namespace talkface::model
