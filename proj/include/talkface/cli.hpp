#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkface/error.hpp"
#include "talkface/metrics.hpp"
#include "talkface/training.hpp"

namespace talkface::cli {

/// Every parameter of every command, all defaulted. Serialized as one flat
/// JSON object; keys match the field names and the long flags (with '-' for
/// '_').
struct RunConfig {
    // corpus
    std::string corpus_dir = "corpus";
    std::uint64_t seed = 20240601;
    int emotions = 8;
    int sequences_per_emotion = 6;
    int length = 90;
    int identities = 4;
    double keypoint_noise = 0.01;
    int fps = 30;

    // model
    int hidden = 128;
    int audio_hidden = 32;
    int audio_radius = 2;
    int cue_dim = 64;
    int emotion_dim = 16;
    int gaze_embedding = 16;
    int keypoint_hidden = 64;
    double y_weight = 2.0;
    double scale_factor = 128.0;
    std::uint64_t model_seed = 1;

    // train
    std::string checkpoint_dir = "checkpoints";
    int epochs = 50;
    int stage2_epochs = 20;
    int batch_size = 4;
    double learning_rate = 1e-3;
    double clip_norm = 5.0;
    std::uint64_t shuffle_seed = 11;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 5;
    int checkpoint_every = 10;
    bool resume = false;
    bool serial = false;

    // synthesize
    std::string audio;
    std::string emotion = "neutral";
    int identity = 0;
    std::uint64_t synth_seed = 0;
    std::string out_dir = "synth";
    bool previews = true;
    bool use_stage2 = true;

    // evaluate
    std::string pred;
    std::string gt;
    std::string report_dir = "report";

    // plot
    std::string input;
    std::string plot_dir = "plots";

    nlohmann::json to_json() const;
    /// Applies the keys present in j. Config error on an unknown key or a
    /// value of the wrong type.
    void merge(const nlohmann::json& j);
    /// One flag override; the value is parsed as JSON unless the field is a string.
    void set(const std::string& key, const std::string& value);
    /// Config error naming the first invalid field.
    void validate() const;

    model::ModelConfig model_config() const;
    model::TrainConfig train_config(int epochs) const;
    corpus::GeneratorConfig generator_config() const;
};

RunConfig load_config(const std::filesystem::path& path);
/// sha256 of the canonical JSON dump.
std::string config_hash(const RunConfig& cfg);
std::vector<std::string> config_keys();

/// Documented exit codes.
enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kConfigError = 2,
    kDataError = 3,
    kNumericError = 4,
    kUsageError = 5,
};
int exit_code(ErrorKind kind);

struct TrainResult {
    std::vector<model::Stage1Loss> stage1;
    std::vector<model::Stage2Loss> stage2;
    model::Stage1Eval heldout;
    std::string stage1_digest;
    std::string stage2_digest;
};

// Commands. Each writes manifest.<command>.json into its output directory
// with the config, its hash and the sha256 of every input and output file.

corpus::Corpus cmd_gen_corpus(const RunConfig& cfg, std::ostream& log);
TrainResult cmd_train(const RunConfig& cfg, std::ostream& log);
/// Returns the bundle hash.
std::string cmd_synthesize(const RunConfig& cfg, std::ostream& log);
metrics::MetricReport cmd_evaluate(const RunConfig& cfg, std::ostream& log);
void cmd_plot(const RunConfig& cfg, std::ostream& log);

/// Loss CSV writers shared with the tests.
std::string format_stage1_losses(const std::vector<model::Stage1Loss>& losses);
std::string format_stage2_losses(const std::vector<model::Stage2Loss>& losses);
std::vector<model::Stage1Loss> parse_stage1_losses(std::string_view text, const std::string& name);
std::vector<model::Stage2Loss> parse_stage2_losses(std::string_view text, const std::string& name);

/// Schematic 256x256 drawing of relocated landmarks: points and the fixed
/// contour edge list, nose tip at the canvas center.
void render_preview(const geometry::Landmarks& relocated, const std::filesystem::path& path);

/// Reference for synthesis: neutral face of a synthetic identity.
model::Reference identity_reference(std::uint64_t corpus_seed, int identity);

/// Parses argv, runs one subcommand and maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace talkface::cli
