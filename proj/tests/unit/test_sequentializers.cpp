#include <doctest.h>

#include "support.hpp"
#include "talkface/hash.hpp"
#include "talkface/neural/grad_check.hpp"
#include "talkface/training.hpp"

using namespace talkface;
using namespace talkface::model;

namespace {

ModelConfig tiny_config()
{
    ModelConfig c;
    c.hidden = 8;
    c.audio_hidden = 4;
    c.audio_radius = 1;
    c.cue_dim = 6;
    c.emotion_dim = 4;
    c.gaze_embedding = 4;
    c.keypoint_hidden = 6;
    c.seed = 3;
    return c;
}

const corpus::Corpus& small_corpus()
{
    static const corpus::Corpus c = [] {
        corpus::GeneratorConfig g;
        g.sequences_per_emotion = 1;
        g.length = 30;
        g.seed = 99;
        return corpus::generate_synthetic(corpus::default_profiles(), g);
    }();
    return c;
}

/// First n frames of a corpus sequence.
corpus::SequenceRecord prefix(const corpus::SequenceRecord& s, std::size_t n)
{
    corpus::SequenceRecord r = s;
    r.audio.resize(n);
    r.landmarks.resize(n);
    r.poses.resize(n);
    r.gaze.resize(n);
    r.keypoints.resize(n);
    return r;
}

Stage1Model ready_stage1(const ModelConfig& cfg, std::span<const Sample> samples)
{
    Stage1Model m(cfg);
    std::vector<corpus::SequenceRecord> seqs;
    for (const auto& s : samples)
        seqs.push_back(*s.sequence);
    m.stats() = FeatureStats::fit(seqs);
    m.initialize(mean_landmarks(samples), mean_pose(samples));
    return m;
}

KeypointModel ready_stage2(const ModelConfig& cfg, std::span<const Sample> samples)
{
    KeypointModel m(cfg);
    std::vector<corpus::SequenceRecord> seqs;
    for (const auto& s : samples)
        seqs.push_back(*s.sequence);
    m.stats() = FeatureStats::fit(seqs);
    m.set_oracle_seed(small_corpus().keypoint_seed);
    m.initialize(mean_keypoints(samples));
    return m;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n)
{
    std::vector<double> v(n);
    for (double& x : v)
        x = support::uniform(rng, -1, 1);
    return v;
}

std::vector<double> values(const nn::Graph& g, nn::Var v)
{
    const auto s = g.value(v);
    return {s.begin(), s.end()};
}

std::vector<Var> random_window(nn::Graph& g, std::mt19937_64& rng, std::size_t r)
{
    std::vector<Var> w;
    for (std::size_t i = 0; i < 2 * r + 1; ++i)
        w.push_back(g.input(random_vec(rng, audio::kCoefficients)));
    return w;
}

audio::Waveform one_second_tone()
{
    auto x = support::sine(220, 1.0, 0.3);
    const auto y = support::sine(1250, 1.0, 0.1);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += y[i] * std::sin(3.0 * static_cast<double>(i) / 16000.0);
    return {x, 16000};
}

}  // namespace

TEST_CASE("zero network: every head emits its bias whatever the input")
{
    Stage1Model m(tiny_config());
    m.params().fill(0.0);
    std::mt19937_64 rng(1);
    auto& ps = m.params();
    const auto lm_bias = random_vec(rng, kLandmarkValues);
    const auto pose_bias = random_vec(rng, kPoseValues);
    ps[ps.find("landmark.head.bias")].value.values = lm_bias;
    ps[ps.find("pose.head.bias")].value.values = pose_bias;

    for (int trial = 0; trial < 2; ++trial) {
        nn::Graph g(ps);
        const Var e = m.embed_emotion(g, trial * 5);
        LstmState sl = m.initial(g, Cue::landmark), sp = m.initial(g, Cue::pose), sg = m.initial(g, Cue::gaze);
        const auto w = random_window(g, rng, 1);
        const CueStep l = m.landmark_step(g, sl, g.input(random_vec(rng, kLandmarkValues)),
                                          m.encode_audio(g, Cue::landmark, w), e);
        const CueStep p = m.pose_step(g, sp, g.input(random_vec(rng, kPoseValues)), m.encode_audio(g, Cue::pose, w), e);
        const CueStep z = m.gaze_step(g, sg, static_cast<int>(rng() % 100), m.encode_audio(g, Cue::gaze, w), e);
        CHECK(values(g, l.output) == lm_bias);
        CHECK(values(g, p.output) == pose_bias);

        const auto probs = values(g, g.softmax(z.output));
        for (double q : probs)
            CHECK(q == doctest::Approx(0.01).epsilon(1e-12));
        CHECK(gaze::classify_gaze(probs) == gaze::GazeLabel{0, 0, 0});

        const auto logits = values(g, m.classify_emotion(g, l.feature, p.feature, z.feature));
        for (double v : logits)
            CHECK(v == 0.0);
        CHECK(gaze::argmax_class(g.value(g.softmax(g.input(logits)))) == 0);
    }
}

TEST_CASE("zero network keypoint step is constant")
{
    KeypointModel m(tiny_config());
    m.params().fill(0.0);
    std::mt19937_64 rng(2);
    const auto bias = random_vec(rng, kKeypointValues);
    m.params()[m.params().find("keypoint.head.bias")].value.values = bias;
    for (int trial = 0; trial < 3; ++trial) {
        nn::Graph g(m.params());
        LstmState s = m.initial(g);
        const auto w = random_window(g, rng, 1);
        const Var k = m.keypoint_step(g, s, g.input(random_vec(rng, kKeypointValues)),
                                      g.input(random_vec(rng, kLandmarkValues)), m.encode_audio(g, w),
                                      m.embed_emotion(g, trial));
        CHECK(values(g, k) == bias);
    }
}

TEST_CASE("gaze distribution of a random network sums to one")
{
    Stage1Model m(tiny_config());
    m.params().initialize(8);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        nn::Graph g(m.params());
        LstmState s = m.initial(g, Cue::gaze);
        const auto w = random_window(g, rng, 1);
        const auto z = m.gaze_step(g, s, static_cast<int>(rng() % 100), m.encode_audio(g, Cue::gaze, w),
                                   m.embed_emotion(g, static_cast<int>(rng() % 8)));
        double sum = 0.0;
        for (double p : g.value(g.softmax(z.output)))
            sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("invalid inputs to the steps")
{
    Stage1Model m(tiny_config());
    m.params().initialize(1);
    nn::Graph g(m.params());
    CHECK(support::error_kind([&] { m.embed_emotion(g, 8); }) == ErrorKind::domain);
    LstmState s = m.initial(g, Cue::gaze);
    std::mt19937_64 rng(4);
    const auto w = random_window(g, rng, 1);
    const Var a = m.encode_audio(g, Cue::gaze, w);
    const Var e = m.embed_emotion(g, 0);
    CHECK(support::error_kind([&] { m.gaze_step(g, s, 100, a, e); }) == ErrorKind::domain);
    CHECK(support::error_kind([&] { m.classify_emotion(g, Var{}, a, a); }) == ErrorKind::usage);
}

TEST_CASE("stepping is deterministic for a fixed seed")
{
    auto run = [] {
        Stage1Model m(tiny_config());
        m.params().initialize(5);
        std::mt19937_64 rng(6);
        nn::Graph g(m.params());
        LstmState s = m.initial(g, Cue::landmark);
        Var prev = g.input(random_vec(rng, kLandmarkValues));
        const Var e = m.embed_emotion(g, 2);
        for (int t = 0; t < 5; ++t)
            prev = m.landmark_step(g, s, prev, m.encode_audio(g, Cue::landmark, random_window(g, rng, 1)), e).output;
        return values(g, prev);
    };
    CHECK(run() == run());
}

TEST_CASE("classifier predictions follow a permutation of the batch")
{
    Stage1Model m(tiny_config());
    m.params().initialize(9);
    std::mt19937_64 rng(7);
    std::vector<std::array<std::vector<double>, 3>> batch(5);
    for (auto& b : batch)
        for (auto& f : b)
            f = random_vec(rng, 8);
    auto predict = [&](const std::vector<std::size_t>& order) {
        nn::Graph g(m.params());
        std::vector<std::vector<double>> out;
        for (std::size_t i : order)
            out.push_back(values(g, m.classify_emotion(g, g.input(batch[i][0]), g.input(batch[i][1]),
                                                       g.input(batch[i][2]))));
        return out;
    };
    const auto fwd = predict({0, 1, 2, 3, 4});
    const auto perm = predict({3, 0, 4, 2, 1});
    const std::size_t p[] = {3, 0, 4, 2, 1};
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(perm[i] == fwd[p[i]]);
}

TEST_CASE("full stage-1 teacher-forced pass passes the gradient check")
{
    const auto seq = prefix(small_corpus().sequences[3], 3);
    const std::vector<corpus::SequenceRecord> seqs{seq};
    const auto samples = make_samples(small_corpus(), seqs);
    Stage1Model m = ready_stage1(tiny_config(), samples);
    for (int part = 0; part < 4; ++part) {
        const auto r = nn::grad_check(m.params(), [&](nn::Graph& g) {
            const Stage1Terms t = stage1_sequence_loss(m, g, samples[0]);
            const Var parts[] = {t.landmarks, t.pose, t.gaze, t.emotion};
            return parts[part];
        });
        INFO("loss term ", part, " worst parameter ", r.worst_parameter);
        CHECK(r.entries_checked == m.params().scalar_count());
        CHECK(r.max_relative_error < 1e-4);
    }
}

TEST_CASE("stage-2 keypoint pass passes the gradient check")
{
    const auto seq = prefix(small_corpus().sequences[6], 3);
    const std::vector<corpus::SequenceRecord> seqs{seq};
    const auto samples = make_samples(small_corpus(), seqs);
    KeypointModel m = ready_stage2(tiny_config(), samples);
    const auto r = nn::grad_check(m.params(), [&](nn::Graph& g) { return stage2_sequence_loss(m, g, samples[0]); });
    INFO("worst parameter ", r.worst_parameter);
    CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("loss components are non-negative and sum to the total")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, c.sequences);
    Stage1Model m = ready_stage1(tiny_config(), samples);
    for (const auto& s : samples) {
        nn::Graph g(m.params());
        const Stage1Terms t = stage1_sequence_loss(m, g, s);
        const double sum = g.scalar(t.landmarks) + g.scalar(t.pose) + g.scalar(t.gaze) + g.scalar(t.emotion);
        CHECK(g.scalar(t.landmarks) >= 0.0);
        CHECK(g.scalar(t.pose) >= 0.0);
        CHECK(g.scalar(t.gaze) >= 0.0);
        CHECK(g.scalar(t.emotion) >= 0.0);
        CHECK(std::abs(g.scalar(t.total) - sum) < 1e-9);
    }
}

TEST_CASE("emotion classifier gradient reaches every cue branch")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, std::span(c.sequences).first(4));
    Stage1Model m = ready_stage1(tiny_config(), samples);
    nn::Gradients grads(m.params());
    for (const auto& s : samples) {
        nn::Graph g(m.params());
        g.backward(stage1_sequence_loss(m, g, s).emotion, grads);
    }
    for (Cue cue : {Cue::landmark, Cue::pose, Cue::gaze}) {
        const auto ids = m.branch_params(cue);
        CHECK(grads.squared_norm(ids) > 0.0);
    }
}

TEST_CASE("outputs never depend on audio beyond the encoder window")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, c.sequences);
    const ModelConfig cfg = tiny_config();
    Stage1Model m = ready_stage1(cfg, samples);
    KeypointModel k = ready_stage2(cfg, samples);
    SynthesisInput in;
    in.features = c.sequences[1].audio;
    in.emotion = 2;
    in.reference = synthetic_reference(c, 0);
    const Bundle full = synthesize(m, &k, in);
    for (std::size_t cut : {5u, 12u, 20u}) {
        SynthesisInput part = in;
        part.features.resize(cut + 1);
        const Bundle b = synthesize(m, &k, part);
        REQUIRE(b.length() == cut + 1);
        for (std::size_t n = 0; n + cfg.audio_radius <= cut; ++n) {
            CHECK(b.landmarks[n] == full.landmarks[n]);
            CHECK(b.poses[n] == full.poses[n]);
            CHECK(b.gaze[n] == full.gaze[n]);
            CHECK(b.keypoints[n] == full.keypoints[n]);
        }
    }
}

TEST_CASE("synthesized pose angles are wrapped")
{
    Stage1Model m(tiny_config());
    m.params().fill(0.0);
    auto& ps = m.params();
    const auto face = corpus::identity_face(5, 0);
    std::copy_n(&face[0].x, kLandmarkValues, ps[ps.find("landmark.head.bias")].value.values.begin());
    ps[ps.find("pose.head.bias")].value.values = {0.0, std::numbers::pi + 0.1, 0.0, 0.0, 0.0, 0.0};
    SynthesisInput in;
    in.features.assign(4, audio::AudioFeatureFrame{});
    in.reference.landmarks = face;
    const Bundle b = synthesize(m, nullptr, in);
    for (const auto& p : b.poses)
        CHECK(p.pitch == doctest::Approx(-std::numbers::pi + 0.1).epsilon(1e-14));
}

TEST_CASE("one second of audio gives 30 frames of every cue and recomposes exactly")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, c.sequences);
    Stage1Model m = ready_stage1(tiny_config(), samples);
    KeypointModel k = ready_stage2(tiny_config(), samples);
    SynthesisInput in;
    in.features = audio::mfcc_sequence(one_second_tone());
    in.emotion = 7;
    in.reference = synthetic_reference(c, 1);
    const Bundle b = synthesize(m, &k, in);
    CHECK(b.landmarks.size() == 30);
    CHECK(b.poses.size() == 30);
    CHECK(b.gaze.size() == 30);
    CHECK(b.relocated.size() == 30);
    CHECK(b.keypoints.size() == 30);
    CHECK(b.landmarks[0].size() == 147);
    CHECK(b.keypoints[0].size() == 10);

    double worst = 0.0;
    for (std::size_t n = 0; n < 30; ++n) {
        gaze::validate(b.gaze[n]);
        const auto placed = geometry::place_pupils(b.landmarks[n], b.gaze[n]);
        const auto rot = support::hand_rotation(b.poses[n].yaw, b.poses[n].pitch, b.poses[n].roll);
        for (std::size_t i = 0; i < 147; ++i) {
            const Vec3 o = support::dense_transform(rot, b.scale_factor, placed[i], b.poses[n].translation);
            worst = std::max({worst, std::abs(o.x - b.relocated[n][i].x), std::abs(o.y - b.relocated[n][i].y),
                              std::abs(o.z - b.relocated[n][i].z)});
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("synthesis is deterministic and bundles round-trip")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, c.sequences);
    Stage1Model m = ready_stage1(tiny_config(), samples);
    KeypointModel k = ready_stage2(tiny_config(), samples);
    SynthesisInput in;
    in.features = audio::mfcc_sequence(one_second_tone());
    in.emotion = 4;
    in.reference = synthetic_reference(c, 2);
    in.seed = 42;
    support::TempDir dir("bundle");
    const std::string h1 = write_bundle(dir / "a", synthesize(m, &k, in, "d1", "d2"));
    const std::string h2 = write_bundle(dir / "b", synthesize(m, &k, in, "d1", "d2"));
    CHECK(h1 == h2);
    CHECK(bundle_hash(dir / "a") == h1);
    CHECK(read_file(dir / "a" / "bundle.frames") == read_file(dir / "b" / "bundle.frames"));

    const Bundle back = read_bundle(dir / "a");
    const Bundle orig = synthesize(m, &k, in, "d1", "d2");
    CHECK(back.landmarks == orig.landmarks);
    CHECK(back.poses == orig.poses);
    CHECK(back.gaze == orig.gaze);
    CHECK(back.relocated == orig.relocated);
    CHECK(back.keypoints == orig.keypoints);
    CHECK(back.seed == 42);
    CHECK(back.stage1_digest == "d1");
}

TEST_CASE("missing checkpoints are usage errors")
{
    support::TempDir dir("missing");
    CHECK(support::error_kind([&] { load_stage1(dir / "nope.ckpt"); }) == ErrorKind::usage);
    CHECK(support::error_kind([&] { load_keypoint(dir / "nope.ckpt"); }) == ErrorKind::usage);
}

TEST_CASE("misaligned training data is rejected before training")
{
    auto seq = small_corpus().sequences[0];
    seq.poses.pop_back();
    const std::vector<corpus::SequenceRecord> seqs{seq};
    const auto samples = make_samples(small_corpus(), seqs);
    CHECK(support::error_kind([&] { check_samples(samples, false); }) == ErrorKind::data);
}

TEST_CASE("serial and parallel training are bit-identical and deterministic")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, c.sequences);
    TrainConfig tc;
    tc.epochs = 2;
    auto run = [&](Execution exec) {
        Stage1Model m = ready_stage1(tiny_config(), samples);
        nn::Adam opt(m.params(), tc.adam);
        TrainConfig t = tc;
        t.execution = exec;
        const auto losses = train_stage1(m, opt, samples, t);
        KeypointModel k = ready_stage2(tiny_config(), samples);
        nn::Adam opt2(k.params(), tc.adam);
        const auto l2 = train_stage2(k, opt2, samples, t);
        return std::tuple(m.params().all(), losses, k.params().all(), l2);
    };
    const auto [ps, ls, pk, lk] = run(Execution::serial);
    const auto [pp, lp, pkp, lkp] = run(Execution::parallel);
    const auto [pa, la, pka, lka] = run(Execution::parallel);
    REQUIRE(ls.size() == 2);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        CHECK(ps[i].value == pp[i].value);
        CHECK(pp[i].value == pa[i].value);
    }
    for (std::size_t i = 0; i < pk.size(); ++i)
        CHECK(pk[i].value == pkp[i].value);
    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(ls[e].total == lp[e].total);
        CHECK(lp[e].total == la[e].total);
        CHECK(lk[e].total == lkp[e].total);
        CHECK(std::abs(ls[e].total - (ls[e].landmarks + ls[e].pose + ls[e].gaze + ls[e].emotion)) < 1e-9);
        CHECK(lk[e].total == lk[e].keypoints);
    }
}

TEST_CASE("resuming from a checkpoint continues the uninterrupted curve")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, c.sequences);
    TrainConfig tc;
    tc.epochs = 4;

    Stage1Model straight = ready_stage1(tiny_config(), samples);
    nn::Adam opt(straight.params(), tc.adam);
    const auto full = train_stage1(straight, opt, samples, tc);

    support::TempDir dir("resume");
    Stage1Model first = ready_stage1(tiny_config(), samples);
    nn::Adam opt1(first.params(), tc.adam);
    TrainConfig half = tc;
    half.epochs = 2;
    auto curve = train_stage1(first, opt1, samples, half);
    save_stage1(dir / "s1.ckpt", first, &opt1, 2);

    LoadedStage1 loaded = load_stage1(dir / "s1.ckpt");
    CHECK(loaded.epochs_done == 2);
    nn::Adam opt2(loaded.model.params(), tc.adam);
    nn::restore_optimizer(opt2, loaded.checkpoint);
    const auto rest = train_stage1(loaded.model, opt2, samples, tc, 2);
    curve.insert(curve.end(), rest.begin(), rest.end());

    REQUIRE(curve.size() == full.size());
    for (std::size_t e = 0; e < full.size(); ++e) {
        CHECK(curve[e].epoch == full[e].epoch);
        CHECK(curve[e].total == full[e].total);
    }
    for (std::size_t i = 0; i < straight.params().size(); ++i)
        CHECK(loaded.model.params()[i].value == straight.params()[i].value);
}

TEST_CASE("a few epochs reduce the training loss")
{
    const auto& c = small_corpus();
    const auto samples = make_samples(c, c.sequences);
    Stage1Model m = ready_stage1(tiny_config(), samples);
    TrainConfig tc;
    tc.epochs = 6;
    tc.adam.learning_rate = 3e-3;
    nn::Adam opt(m.params(), tc.adam);
    const auto l = train_stage1(m, opt, samples, tc);
    CHECK(l.back().total < l.front().total);
}

TEST_CASE("stay logit makes the previous label as likely as the observed persistence rate")
{
    corpus::SequenceRecord seq = small_corpus().sequences[0];
    Sample s{&seq, {}};
    s.reference.gaze = gaze::make_label(2, 2);
    // 2 2 | 3 3 3 | 2: stays at frames 0, 1, 3, 4 of 6
    const int zones[] = {2, 2, 3, 3, 3, 2};
    seq.gaze.clear();
    for (int z : zones)
        seq.gaze.push_back(gaze::make_label(z, z));
    const double b = stay_logit(std::span(&s, 1));
    CHECK(std::exp(b) / (std::exp(b) + 99.0) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));

    for (auto& g : seq.gaze)
        g = gaze::make_label(2, 2);
    CHECK(std::exp(b) < std::exp(stay_logit(std::span(&s, 1))));
    CHECK(std::isfinite(stay_logit(std::span(&s, 1))));
}

TEST_CASE("with a zero network the stay logit alone favours the previous gaze label")
{
    Stage1Model m(tiny_config());
    m.params().fill(0.0);
    auto& ps = m.params();
    ps[ps.find("gaze.stay.weight")].value.values = {2.5};
    std::mt19937_64 rng(4);
    nn::Graph g(ps);
    LstmState s = m.initial(g, Cue::gaze);
    const int prev = gaze::encode_joint(7, 7);
    const CueStep z = m.gaze_step(g, s, prev, m.encode_audio(g, Cue::gaze, random_window(g, rng, 1)),
                                  m.embed_emotion(g, 3));
    const auto logits = values(g, z.output);
    for (int k = 0; k < gaze::kJointClasses; ++k)
        CHECK(logits[static_cast<std::size_t>(k)] == (k == prev ? 2.5 : 0.0));
}
