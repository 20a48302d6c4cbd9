#include <CLI11.hpp>

#include <map>
#include <ostream>

#include "talkface/cli.hpp"

namespace talkface::cli {

namespace {

struct Command {
    const char* name;
    const char* help;
    std::vector<const char*> keys;  // flags offered on this subcommand; a config file may set any key
    void (*run)(const RunConfig&, std::ostream&);
};

const std::vector<Command>& commands()
{
    static const std::vector<Command> table = {
        {"gen-corpus", "Generate the seeded synthetic corpus",
         {"corpus_dir", "seed", "emotions", "sequences_per_emotion", "length", "identities", "keypoint_noise", "fps",
          "scale_factor"},
         [](const RunConfig& c, std::ostream& o) { cmd_gen_corpus(c, o); }},
        {"train", "Train stage 1 (landmarks, pose, gaze, emotion) and optionally stage 2 (keypoints)",
         {"corpus_dir", "checkpoint_dir", "epochs", "stage2_epochs", "batch_size", "learning_rate", "clip_norm",
          "shuffle_seed", "train_fraction", "split_seed", "checkpoint_every", "resume", "serial", "hidden",
          "audio_hidden", "audio_radius", "cue_dim", "emotion_dim", "gaze_embedding", "keypoint_hidden", "y_weight",
          "scale_factor", "model_seed"},
         [](const RunConfig& c, std::ostream& o) { cmd_train(c, o); }},
        {"synthesize", "Generate a cue bundle and preview frames from a WAV file",
         {"checkpoint_dir", "audio", "emotion", "identity", "seed", "synth_seed", "out_dir", "previews", "use_stage2"},
         [](const RunConfig& c, std::ostream& o) { cmd_synthesize(c, o); }},
        {"evaluate", "Compare a predicted bundle with a ground-truth bundle or sequence manifest",
         {"pred", "gt", "report_dir", "scale_factor", "serial"},
         [](const RunConfig& c, std::ostream& o) { cmd_evaluate(c, o); }},
        {"plot", "Write pose curves and gaze histograms for a bundle or report",
         {"input", "plot_dir"},
         [](const RunConfig& c, std::ostream& o) { cmd_plot(c, o); }},
    };
    return table;
}

std::string dashed(std::string key)
{
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Emotion-conditioned talking-face cue generation"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::map<std::string, std::vector<CLI::Option*>> options;
    for (const auto& cmd : commands()) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        for (const char* key : cmd.keys)
            options[key].push_back(sub->add_option("--" + dashed(key), overrides[key]));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        for (const auto& [key, opts] : options)
            for (const auto* o : opts)
                if (o->count() > 0)
                    cfg.set(key, overrides[key]);
        for (const auto& cmd : commands())
            if (app.got_subcommand(cmd.name)) {
                cmd.run(cfg, out);
                return kOk;
            }
        return kUsageError;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace talkface::cli
