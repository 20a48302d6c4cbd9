#include <cmath>
#include <limits>
#include <set>

#include "talkface/cli.hpp"
#include "talkface/hash.hpp"

namespace talkface::cli {

namespace {

using nlohmann::json;

// Visits (name, member) for every field; the order is the serialization order.
template <class C, class F>
void fields(C& c, F&& f)
{
    f("corpus_dir", c.corpus_dir);
    f("seed", c.seed);
    f("emotions", c.emotions);
    f("sequences_per_emotion", c.sequences_per_emotion);
    f("length", c.length);
    f("identities", c.identities);
    f("keypoint_noise", c.keypoint_noise);
    f("fps", c.fps);
    f("hidden", c.hidden);
    f("audio_hidden", c.audio_hidden);
    f("audio_radius", c.audio_radius);
    f("cue_dim", c.cue_dim);
    f("emotion_dim", c.emotion_dim);
    f("gaze_embedding", c.gaze_embedding);
    f("keypoint_hidden", c.keypoint_hidden);
    f("y_weight", c.y_weight);
    f("scale_factor", c.scale_factor);
    f("model_seed", c.model_seed);
    f("checkpoint_dir", c.checkpoint_dir);
    f("epochs", c.epochs);
    f("stage2_epochs", c.stage2_epochs);
    f("batch_size", c.batch_size);
    f("learning_rate", c.learning_rate);
    f("clip_norm", c.clip_norm);
    f("shuffle_seed", c.shuffle_seed);
    f("train_fraction", c.train_fraction);
    f("split_seed", c.split_seed);
    f("checkpoint_every", c.checkpoint_every);
    f("resume", c.resume);
    f("serial", c.serial);
    f("audio", c.audio);
    f("emotion", c.emotion);
    f("identity", c.identity);
    f("synth_seed", c.synth_seed);
    f("out_dir", c.out_dir);
    f("previews", c.previews);
    f("use_stage2", c.use_stage2);
    f("pred", c.pred);
    f("gt", c.gt);
    f("report_dir", c.report_dir);
    f("input", c.input);
    f("plot_dir", c.plot_dir);
}

template <class T>
void assign(T& dst, const json& v, const std::string& key)
{
    const auto bad = [&](std::string_view want) {
        fail(ErrorKind::config, "config key '" + key + "' expects " + std::string(want) + ", got " + v.dump());
    };
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean())
            bad("a boolean");
        dst = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string())
            bad("a string");
        dst = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned())
            bad("a non-negative integer");
        dst = v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer())
            bad("an integer");
        const auto x = v.get<long long>();
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
            bad("an integer in range");
        dst = static_cast<T>(x);
    } else {
        if (!v.is_number())
            bad("a number");
        dst = v.get<double>();
    }
}

void check(bool ok, const std::string& what)
{
    require(ok, ErrorKind::config, what);
}

}  // namespace

json RunConfig::to_json() const
{
    json j = json::object();
    fields(*this, [&](const char* name, const auto& v) { j[name] = v; });
    return j;
}

void RunConfig::merge(const json& j)
{
    require(j.is_object(), ErrorKind::config, "config must be a JSON object");
    const auto keys = config_keys();
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items())
        require(known.count(key) > 0, ErrorKind::config, "unknown config key '" + key + "'");
    fields(*this, [&](const char* name, auto& v) {
        if (j.contains(name))
            assign(v, j.at(name), name);
    });
}

void RunConfig::validate() const
{
    check(emotions >= 1 && emotions <= 8, "emotions must be in [1, 8], got " + std::to_string(emotions));
    check(sequences_per_emotion >= 1, "sequences_per_emotion must be at least 1");
    check(length >= 30, "length must be at least 30 frames");
    check(identities >= 1, "identities must be at least 1");
    check(std::isfinite(keypoint_noise) && keypoint_noise >= 0.0, "keypoint_noise must be finite and >= 0");
    check(fps == audio::kFps, "only fps = 30 is supported, got " + std::to_string(fps));
    check(hidden > 0 && audio_hidden > 0 && cue_dim > 0 && emotion_dim > 0 && gaze_embedding > 0 &&
              keypoint_hidden > 0,
          "layer sizes must be positive");
    check(audio_radius >= 0, "audio_radius must be >= 0");
    check(std::isfinite(y_weight) && y_weight > 0.0, "y_weight must be positive");
    check(std::isfinite(scale_factor) && scale_factor > 0.0, "scale_factor must be positive");
    check(epochs >= 0 && stage2_epochs >= 0, "epoch counts must be >= 0");
    check(batch_size >= 1, "batch_size must be at least 1");
    check(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be positive");
    check(std::isfinite(clip_norm) && clip_norm >= 0.0, "clip_norm must be >= 0");
    check(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must be in (0, 1)");
    check(checkpoint_every >= 1, "checkpoint_every must be at least 1");
    check(identity >= 0, "identity must be >= 0");
    try {
        corpus::emotion_from_name(emotion);
    } catch (const Error&) {
        fail(ErrorKind::config, "unknown emotion '" + emotion + "'");
    }
}

model::ModelConfig RunConfig::model_config() const
{
    model::ModelConfig m;
    m.hidden = static_cast<std::size_t>(hidden);
    m.audio_hidden = static_cast<std::size_t>(audio_hidden);
    m.audio_radius = static_cast<std::size_t>(audio_radius);
    m.cue_dim = static_cast<std::size_t>(cue_dim);
    m.emotion_dim = static_cast<std::size_t>(emotion_dim);
    m.gaze_embedding = static_cast<std::size_t>(gaze_embedding);
    m.keypoint_hidden = static_cast<std::size_t>(keypoint_hidden);
    m.y_weight = y_weight;
    m.scale_factor = scale_factor;
    m.seed = model_seed;
    return m;
}

model::TrainConfig RunConfig::train_config(int n_epochs) const
{
    model::TrainConfig t;
    t.epochs = n_epochs;
    t.batch_size = static_cast<std::size_t>(batch_size);
    t.adam.learning_rate = learning_rate;
    t.clip_norm = clip_norm;
    t.shuffle_seed = shuffle_seed;
    t.execution = serial ? Execution::serial : Execution::parallel;
    return t;
}

corpus::GeneratorConfig RunConfig::generator_config() const
{
    corpus::GeneratorConfig g;
    g.sequences_per_emotion = sequences_per_emotion;
    g.length = length;
    g.seed = seed;
    g.identities = identities;
    g.keypoint_noise = keypoint_noise;
    g.scale_factor = scale_factor;
    return g;
}

RunConfig load_config(const std::filesystem::path& path)
{
    require(std::filesystem::exists(path), ErrorKind::config, "config file not found: " + path.string());
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::config, path.string() + ": " + e.what());
    }
    RunConfig cfg;
    cfg.merge(j);
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    bool found = false;
    fields(*this, [&](const char* name, auto& v) {
        using T = std::decay_t<decltype(v)>;
        if (key != name)
            return;
        found = true;
        json parsed;
        if constexpr (std::is_same_v<T, std::string>) {
            parsed = value;
        } else {
            parsed = json::parse(value, nullptr, false);
            if (parsed.is_discarded())
                fail(ErrorKind::config, "--" + key + ": cannot parse '" + value + "'");
        }
        assign(v, parsed, key);
    });
    require(found, ErrorKind::config, "unknown config key '" + key + "'");
}

std::string config_hash(const RunConfig& cfg)
{
    return sha256_hex(cfg.to_json().dump());
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    RunConfig c;
    fields(c, [&](const char* name, const auto&) { out.emplace_back(name); });
    return out;
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::config:
        return kConfigError;
    case ErrorKind::data:
    case ErrorKind::structural:
        return kDataError;
    case ErrorKind::numeric:
    case ErrorKind::geometry:
        return kNumericError;
    case ErrorKind::usage:
    case ErrorKind::domain:
        return kUsageError;
    }
    return kInternal;
}

}  // namespace talkface::cli
