#include "talkface/sequentializers.hpp"

#include <algorithm>
#include <cmath>

#include "talkface/error.hpp"
#include "talkface/textio.hpp"

namespace talkface::model {

namespace {

std::string hexfloat(double v)
{
    std::string s;
    textio::append_hexfloat(s, v);
    return s;
}

const std::string& meta_value(const std::map<std::string, std::string>& meta, const std::string& key)
{
    const auto it = meta.find(key);
    require(it != meta.end(), ErrorKind::data, "checkpoint meta lacks '" + key + "'");
    return it->second;
}

std::size_t meta_size(const std::map<std::string, std::string>& meta, const std::string& key)
{
    long v = 0;
    require(textio::parse_int(meta_value(meta, key), v) && v > 0, ErrorKind::data, "bad checkpoint meta '" + key + "'");
    return static_cast<std::size_t>(v);
}

double meta_real(const std::map<std::string, std::string>& meta, const std::string& key)
{
    double v = 0.0;
    require(textio::parse_hexfloat(meta_value(meta, key), v), ErrorKind::data, "bad checkpoint meta '" + key + "'");
    return v;
}

// Cell centers scaled to [-1, 1], so rarely seen zones sit between their neighbours.
std::array<double, kGazePosition> grid_position(const gaze::GazeLabel& label)
{
    const auto col = [](int z) { return (z % gaze::kCols) * 2.0 / (gaze::kCols - 1) - 1.0; };
    const auto row = [](int z) { return (z / gaze::kCols) * 2.0 / (gaze::kRows - 1) - 1.0; };
    return {col(label.left), row(label.left), col(label.right), row(label.right)};
}

void check_emotion(int k)
{
    require(k >= 0 && k < corpus::kEmotions, ErrorKind::domain, "emotion label out of range: " + std::to_string(k));
}

AudioEncoder make_audio(nn::ParameterSet& ps, const std::string& name, const ModelConfig& cfg)
{
    return {nn::RecurrentLayer(ps, name, audio::kCoefficients, cfg.audio_hidden, nn::Direction::bidirectional)};
}

}  // namespace

std::map<std::string, std::string> ModelConfig::to_meta() const
{
    return {
        {"hidden", std::to_string(hidden)},
        {"audio_hidden", std::to_string(audio_hidden)},
        {"audio_radius", std::to_string(audio_radius)},
        {"cue_dim", std::to_string(cue_dim)},
        {"emotion_dim", std::to_string(emotion_dim)},
        {"gaze_embedding", std::to_string(gaze_embedding)},
        {"keypoint_hidden", std::to_string(keypoint_hidden)},
        {"y_weight", hexfloat(y_weight)},
        {"scale_factor", hexfloat(scale_factor)},
        {"seed", std::to_string(seed)},
    };
}

ModelConfig ModelConfig::from_meta(const std::map<std::string, std::string>& meta)
{
    ModelConfig c;
    c.hidden = meta_size(meta, "hidden");
    c.audio_hidden = meta_size(meta, "audio_hidden");
    long r = 0;
    require(textio::parse_int(meta_value(meta, "audio_radius"), r) && r >= 0, ErrorKind::data,
            "bad checkpoint meta 'audio_radius'");
    c.audio_radius = static_cast<std::size_t>(r);
    c.cue_dim = meta_size(meta, "cue_dim");
    c.emotion_dim = meta_size(meta, "emotion_dim");
    c.gaze_embedding = meta_size(meta, "gaze_embedding");
    c.keypoint_hidden = meta_size(meta, "keypoint_hidden");
    c.y_weight = meta_real(meta, "y_weight");
    c.scale_factor = meta_real(meta, "scale_factor");
    c.seed = std::stoull(meta_value(meta, "seed"));
    return c;
}

FeatureStats FeatureStats::fit(std::span<const corpus::SequenceRecord> sequences)
{
    FeatureStats s;
    std::size_t n = 0;
    audio::AudioFeatureFrame sum{}, sq{};
    for (const auto& seq : sequences)
        for (const auto& a : seq.audio) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                sum[i] += a[i];
                sq[i] += a[i] * a[i];
            }
            ++n;
        }
    require(n > 0, ErrorKind::data, "no audio frames to fit feature statistics");
    for (std::size_t i = 0; i < sum.size(); ++i) {
        s.mean[i] = sum[i] / static_cast<double>(n);
        const double var = std::max(0.0, sq[i] / static_cast<double>(n) - s.mean[i] * s.mean[i]);
        s.stdev[i] = var > 1e-16 ? std::sqrt(var) : 1.0;
    }
    return s;
}

audio::AudioFeatureFrame FeatureStats::apply(const audio::AudioFeatureFrame& a) const
{
    audio::AudioFeatureFrame out{};
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = (a[i] - mean[i]) / stdev[i];
    return out;
}

std::string FeatureStats::encode() const
{
    std::string out;
    for (double v : mean) {
        textio::append_hexfloat(out, v);
        out += ' ';
    }
    for (std::size_t i = 0; i < stdev.size(); ++i) {
        textio::append_hexfloat(out, stdev[i]);
        if (i + 1 < stdev.size())
            out += ' ';
    }
    return out;
}

FeatureStats FeatureStats::decode(const std::string& text)
{
    const auto tokens = textio::split(text);
    require(tokens.size() == 2 * audio::kCoefficients, ErrorKind::data, "feature statistics need 56 values");
    FeatureStats s;
    for (std::size_t i = 0; i < audio::kCoefficients; ++i) {
        require(textio::parse_hexfloat(tokens[i], s.mean[i]), ErrorKind::data, "bad feature statistic");
        require(textio::parse_hexfloat(tokens[i + audio::kCoefficients], s.stdev[i]) && s.stdev[i] > 0.0,
                ErrorKind::data, "bad feature statistic");
    }
    return s;
}

Reference synthetic_reference(const corpus::Corpus& corpus, int identity)
{
    const double width = corpus.sequences.empty() ? 1.0 : corpus.sequences.front().canonical_width;
    Reference r;
    r.landmarks = corpus::identity_face(corpus.seed, identity, width);
    return r;
}

std::vector<Var> audio_inputs(Graph& g, const FeatureStats& stats, std::span<const audio::AudioFeatureFrame> frames)
{
    std::vector<Var> out;
    out.reserve(frames.size());
    for (const auto& a : frames) {
        const auto z = stats.apply(a);
        out.push_back(g.input(z));
    }
    return out;
}

std::vector<Var> audio_window(std::span<const Var> inputs, std::size_t n, std::size_t radius)
{
    require(!inputs.empty(), ErrorKind::domain, "empty audio sequence");
    require(n < inputs.size(), ErrorKind::domain, "audio window center out of range");
    std::vector<Var> w;
    w.reserve(2 * radius + 1);
    const auto last = static_cast<long>(inputs.size()) - 1;
    for (long d = -static_cast<long>(radius); d <= static_cast<long>(radius); ++d) {
        const long i = std::clamp(static_cast<long>(n) + d, 0L, last);
        w.push_back(inputs[static_cast<std::size_t>(i)]);
    }
    return w;
}

std::vector<double> scaled_relocated(const geometry::Landmarks& relocated, double scale_factor)
{
    std::vector<double> out;
    out.reserve(kLandmarkValues);
    for (const Vec3& p : relocated) {
        out.push_back(p.x / scale_factor);
        out.push_back(p.y / scale_factor);
        out.push_back(p.z / scale_factor);
    }
    return out;
}

// ---------------------------------------------------------------- stage 1

Stage1Model::Stage1Model(const ModelConfig& cfg) : cfg_(cfg)
{
    emotion_ = nn::Embedding::create(params_, "emotion", cfg.emotion_dim, corpus::kEmotions);
    const std::size_t audio_out = 2 * cfg.audio_hidden;
    const char* names[] = {"landmark", "pose", "gaze"};
    const std::size_t outputs[] = {kLandmarkValues, kPoseValues, gaze::kJointClasses};
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string n = names[i];
        Branch& b = branches_[i];
        b.audio = make_audio(params_, n + ".audio", cfg);
        std::size_t cue_width = cfg.cue_dim;
        if (i == 0)
            b.cue_encoder = nn::Linear::create(params_, n + ".cue", kLandmarkValues, cfg.cue_dim);
        else if (i == 1)
            b.cue_encoder = nn::Linear::create(params_, n + ".cue", kPoseValues, cfg.cue_dim);
        else {
            b.gaze_prev = nn::Linear::create(params_, n + ".prev", kGazePosition, cfg.gaze_embedding);
            cue_width = cfg.gaze_embedding;
        }
        b.core = nn::RecurrentLayer(params_, n + ".core", cue_width + audio_out + cfg.emotion_dim, cfg.hidden,
                                    nn::Direction::causal);
        b.head = nn::Linear::create(params_, n + ".head", cfg.hidden, outputs[i]);
        if (i == 2) {
            b.gaze_skip = params_.add(n + ".skip.weight", {gaze::kJointClasses, cfg.gaze_embedding}, cfg.gaze_embedding);
            b.gaze_stay = params_.add(n + ".stay.weight", {1, 1}, 1);
        }
    }
    classifier_ = nn::Linear::create(params_, "classifier", 3 * cfg.hidden, corpus::kEmotions);
}

void Stage1Model::initialize(const geometry::Landmarks& mean_landmarks, const std::array<double, kPoseValues>& mean_pose,
                             double stay_logit)
{
    params_.initialize(cfg_.seed);
    auto& lb = params_[branch(Cue::landmark).head.bias].value.values;
    std::copy_n(&mean_landmarks[0].x, kLandmarkValues, lb.begin());
    auto& pb = params_[branch(Cue::pose).head.bias].value.values;
    std::copy(mean_pose.begin(), mean_pose.end(), pb.begin());
    params_[branch(Cue::gaze).gaze_stay].value.values[0] = stay_logit;
}

Var Stage1Model::embed_emotion(Graph& g, int k) const
{
    check_emotion(k);
    return emotion_(g, static_cast<std::size_t>(k));
}

Var Stage1Model::encode_audio(Graph& g, Cue cue, std::span<const Var> window) const
{
    return branch(cue).audio(g, window);
}

LstmState Stage1Model::initial(Graph& g, Cue cue) const
{
    return branch(cue).core.initial(g);
}

CueStep Stage1Model::run(Graph& g, const Branch& b, LstmState& s, Var cue_in, Var audio, Var e) const
{
    const Var parts[] = {cue_in, audio, e};
    s = b.core.step(g, g.concat(parts), s);
    return {s.h, b.head(g, s.h)};
}

CueStep Stage1Model::landmark_step(Graph& g, LstmState& s, Var prev_landmarks, Var audio, Var e) const
{
    require(g.size(prev_landmarks) == kLandmarkValues, ErrorKind::structural, "landmark step needs 441 values");
    const Branch& b = branch(Cue::landmark);
    return run(g, b, s, g.tanh(b.cue_encoder(g, prev_landmarks)), audio, e);
}

CueStep Stage1Model::pose_step(Graph& g, LstmState& s, Var prev_pose, Var audio, Var e) const
{
    require(g.size(prev_pose) == kPoseValues, ErrorKind::structural, "pose step needs 6 values");
    const Branch& b = branch(Cue::pose);
    return run(g, b, s, g.tanh(b.cue_encoder(g, prev_pose)), audio, e);
}

CueStep Stage1Model::gaze_step(Graph& g, LstmState& s, int prev_joint, Var audio, Var e) const
{
    require(prev_joint >= 0 && prev_joint < gaze::kJointClasses, ErrorKind::domain,
            "previous gaze label out of range: " + std::to_string(prev_joint));
    const Branch& b = branch(Cue::gaze);
    const auto where = grid_position(gaze::decode_joint(prev_joint));
    const Var prev = g.tanh(b.gaze_prev(g, g.input(where)));
    const CueStep step = run(g, b, s, prev, audio, e);
    // Shared across classes, so labels rarely seen in training still persist.
    const double one = 1.0;
    const Var stay = g.linear(b.gaze_stay, g.input(std::span(&one, 1)));
    std::vector<double> hot(gaze::kJointClasses, 0.0);
    hot[static_cast<std::size_t>(prev_joint)] = 1.0;
    const std::vector<Var> spread(gaze::kJointClasses, stay);
    const Var bonus = g.mul(g.concat(spread), g.input(hot));
    return {step.feature, g.add(g.add(step.output, g.linear(b.gaze_skip, prev)), bonus)};
}

Var Stage1Model::classify_emotion(Graph& g, Var f_l, Var f_r, Var f_g) const
{
    require(f_l.valid() && f_r.valid() && f_g.valid(), ErrorKind::usage,
            "emotion classifier needs landmark, pose and gaze features");
    const Var parts[] = {f_l, f_r, f_g};
    return classifier_(g, g.concat(parts));
}

std::vector<nn::ParamId> Stage1Model::branch_params(Cue cue) const
{
    const Branch& b = branch(cue);
    std::vector<nn::ParamId> ids = b.audio.rnn.params();
    if (cue == Cue::gaze) {
        ids.push_back(b.gaze_prev.weight);
        ids.push_back(b.gaze_prev.bias);
        ids.push_back(b.gaze_skip);
        ids.push_back(b.gaze_stay);
    }
    else {
        ids.push_back(b.cue_encoder.weight);
        ids.push_back(b.cue_encoder.bias);
    }
    for (auto id : b.core.params())
        ids.push_back(id);
    ids.push_back(b.head.weight);
    ids.push_back(b.head.bias);
    return ids;
}

// ---------------------------------------------------------------- stage 2

KeypointModel::KeypointModel(const ModelConfig& cfg) : cfg_(cfg)
{
    emotion_ = nn::Embedding::create(params_, "emotion", cfg.emotion_dim, corpus::kEmotions);
    audio_ = make_audio(params_, "keypoint.audio", cfg);
    prev_encoder_ = nn::Linear::create(params_, "keypoint.prev", kKeypointValues, cfg.cue_dim);
    relocated_encoder_ = nn::Linear::create(params_, "keypoint.relocated", kLandmarkValues, cfg.cue_dim);
    core_ = nn::RecurrentLayer(params_, "keypoint.core", 2 * cfg.cue_dim + 2 * cfg.audio_hidden + cfg.emotion_dim,
                               cfg.keypoint_hidden, nn::Direction::causal);
    head_ = nn::Linear::create(params_, "keypoint.head", cfg.keypoint_hidden, kKeypointValues);
    skip_ = params_.add("keypoint.skip.weight", {kKeypointValues, kLandmarkValues}, kLandmarkValues);
}

void KeypointModel::initialize(const std::array<double, kKeypointValues>& mean_keypoints)
{
    params_.initialize(cfg_.seed + 1);
    auto& b = params_[head_.bias].value.values;
    std::copy(mean_keypoints.begin(), mean_keypoints.end(), b.begin());
}

Var KeypointModel::embed_emotion(Graph& g, int k) const
{
    check_emotion(k);
    return emotion_(g, static_cast<std::size_t>(k));
}

Var KeypointModel::encode_audio(Graph& g, std::span<const Var> window) const
{
    return audio_(g, window);
}

LstmState KeypointModel::initial(Graph& g) const
{
    return core_.initial(g);
}

Var KeypointModel::keypoint_step(Graph& g, LstmState& s, Var prev_keypoints, Var relocated, Var audio, Var e) const
{
    require(g.size(prev_keypoints) == kKeypointValues, ErrorKind::structural, "keypoint step needs 30 values");
    require(g.size(relocated) == kLandmarkValues, ErrorKind::structural, "keypoint step needs 441 relocated values");
    const Var parts[] = {g.tanh(prev_encoder_(g, prev_keypoints)), g.tanh(relocated_encoder_(g, relocated)), audio, e};
    s = core_.step(g, g.concat(parts), s);
    return g.add(head_(g, s.h), g.linear(skip_, relocated));
}

// ---------------------------------------------------------------- checkpoints

namespace {

std::map<std::string, std::string> base_meta(const ModelConfig& cfg, const FeatureStats& stats, const char* kind,
                                             int epochs_done)
{
    auto meta = cfg.to_meta();
    meta["kind"] = kind;
    meta["audio_stats"] = stats.encode();
    meta["epochs_done"] = std::to_string(epochs_done);
    return meta;
}

nn::Checkpoint open_checkpoint(const std::filesystem::path& path, const char* kind)
{
    require(std::filesystem::exists(path), ErrorKind::usage, "checkpoint not found: " + path.string());
    nn::Checkpoint ck = nn::load_checkpoint(path);
    require(meta_value(ck.meta, "kind") == kind, ErrorKind::data,
            path.string() + ": expected a " + kind + " checkpoint");
    return ck;
}

int epochs_of(const nn::Checkpoint& ck)
{
    long e = 0;
    require(textio::parse_int(meta_value(ck.meta, "epochs_done"), e) && e >= 0, ErrorKind::data,
            "bad checkpoint meta 'epochs_done'");
    return static_cast<int>(e);
}

}  // namespace

std::string save_stage1(const std::filesystem::path& path, const Stage1Model& m, const nn::Adam* adam, int epochs_done)
{
    return nn::save_checkpoint(path, m.params(), base_meta(m.config(), m.stats(), "stage1", epochs_done), adam);
}

std::string save_keypoint(const std::filesystem::path& path, const KeypointModel& m, const nn::Adam* adam,
                          int epochs_done)
{
    auto meta = base_meta(m.config(), m.stats(), "keypoint", epochs_done);
    meta["oracle_seed"] = std::to_string(m.oracle_seed());
    return nn::save_checkpoint(path, m.params(), meta, adam);
}

LoadedStage1 load_stage1(const std::filesystem::path& path)
{
    nn::Checkpoint ck = open_checkpoint(path, "stage1");
    Stage1Model m(ModelConfig::from_meta(ck.meta));
    nn::restore_params(m.params(), ck);
    m.stats() = FeatureStats::decode(meta_value(ck.meta, "audio_stats"));
    const int epochs = epochs_of(ck);
    return {std::move(m), std::move(ck), epochs};
}

LoadedKeypoint load_keypoint(const std::filesystem::path& path)
{
    nn::Checkpoint ck = open_checkpoint(path, "keypoint");
    KeypointModel m(ModelConfig::from_meta(ck.meta));
    nn::restore_params(m.params(), ck);
    m.stats() = FeatureStats::decode(meta_value(ck.meta, "audio_stats"));
    m.set_oracle_seed(std::stoull(meta_value(ck.meta, "oracle_seed")));
    const int epochs = epochs_of(ck);
    return {std::move(m), std::move(ck), epochs};
}

// ---------------------------------------------------------------- synthesis

Bundle synthesize(const Stage1Model& stage1, const KeypointModel* stage2, const SynthesisInput& in,
                  const std::string& stage1_digest, const std::string& stage2_digest)
{
    require(!in.features.empty(), ErrorKind::domain, "no audio frames to synthesize from");
    check_emotion(in.emotion);
    const ModelConfig& cfg = stage1.config();
    const double width = geometry::face_width(in.reference.landmarks);
    require(width > 0.0, ErrorKind::geometry, "reference face has zero width");

    Bundle out;
    out.emotion = in.emotion;
    out.seed = in.seed;
    out.scale_factor = cfg.scale_factor;
    out.stage1_digest = stage1_digest;
    out.stage2_digest = stage2 ? stage2_digest : std::string();

    Graph g(stage1.params());
    const auto audio = audio_inputs(g, stage1.stats(), in.features);
    const Var e = stage1.embed_emotion(g, in.emotion);
    LstmState sl = stage1.initial(g, Cue::landmark);
    LstmState sp = stage1.initial(g, Cue::pose);
    LstmState sg = stage1.initial(g, Cue::gaze);
    Var prev_lm = g.input({&in.reference.landmarks[0].x, kLandmarkValues});
    Var prev_pose = g.input(in.reference.pose.to_array());
    int prev_gaze = in.reference.gaze.joint;

    for (std::size_t n = 0; n < in.features.size(); ++n) {
        const auto window = audio_window(audio, n, cfg.audio_radius);
        const CueStep l = stage1.landmark_step(g, sl, prev_lm, stage1.encode_audio(g, Cue::landmark, window), e);
        const CueStep p = stage1.pose_step(g, sp, prev_pose, stage1.encode_audio(g, Cue::pose, window), e);
        const CueStep z = stage1.gaze_step(g, sg, prev_gaze, stage1.encode_audio(g, Cue::gaze, window), e);

        geometry::Landmarks c{};
        const auto lv = g.value(l.output);
        std::copy(lv.begin(), lv.end(), &c[0].x);
        auto pose = geometry::HeadPose::from_array(g.value(p.output));
        pose.yaw = geometry::wrap_angle(pose.yaw);
        pose.pitch = geometry::wrap_angle(pose.pitch);
        pose.roll = geometry::wrap_angle(pose.roll);
        const gaze::GazeLabel label = gaze::classify_gaze(g.value(g.softmax(z.output)));

        out.landmarks.push_back(c);
        out.poses.push_back(pose);
        out.gaze.push_back(label);
        out.relocated.push_back(
            geometry::relocate({c, width}, pose, label, cfg.scale_factor).points);

        prev_lm = l.output;
        prev_pose = g.input(pose.to_array());
        prev_gaze = label.joint;
    }

    if (stage2) {
        const ModelConfig& kc = stage2->config();
        const corpus::KeypointOracle oracle(stage2->oracle_seed(), kc.scale_factor);
        const auto ref_relocated = geometry::relocate({in.reference.landmarks, width}, in.reference.pose,
                                                      in.reference.gaze, kc.scale_factor);
        const corpus::Keypoints k0 = oracle.project(ref_relocated.points);

        Graph h(stage2->params());
        const auto audio2 = audio_inputs(h, stage2->stats(), in.features);
        const Var e2 = stage2->embed_emotion(h, in.emotion);
        LstmState s = stage2->initial(h);
        Var prev = h.input({&k0[0].x, kKeypointValues});
        for (std::size_t n = 0; n < in.features.size(); ++n) {
            const auto window = audio_window(audio2, n, kc.audio_radius);
            const Var r = h.input(scaled_relocated(out.relocated[n], kc.scale_factor));
            const Var k = stage2->keypoint_step(h, s, prev, r, stage2->encode_audio(h, window), e2);
            corpus::Keypoints kp{};
            const auto kv = h.value(k);
            std::copy(kv.begin(), kv.end(), &kp[0].x);
            out.keypoints.push_back(kp);
            prev = k;
        }
    }
    return out;
}

Bundle bundle_from_sequence(const corpus::SequenceRecord& seq, double scale_factor)
{
    Bundle b;
    b.emotion = seq.emotion;
    b.seed = seq.seed;
    b.scale_factor = scale_factor;
    b.landmarks = seq.landmarks;
    b.poses = seq.poses;
    b.gaze = seq.gaze;
    b.keypoints = seq.keypoints;
    for (std::size_t n = 0; n < seq.length(); ++n)
        b.relocated.push_back(
            geometry::relocate({seq.landmarks[n], seq.canonical_width}, seq.poses[n], seq.gaze[n], scale_factor).points);
    return b;
}

}  // namespace talkface::model
