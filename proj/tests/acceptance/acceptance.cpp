// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: talkface_acceptance [work_dir]

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "talkface/cli.hpp"
#include "talkface/hash.hpp"
#include "talkface/metrics.hpp"
#include "talkface/neural/grad_check.hpp"
#include "talkface/training.hpp"

using namespace talkface;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path g_work;
std::ofstream g_log;

// ------------------------------------------------------------------ 1-3

Outcome geometry_round_trip()
{
    std::mt19937_64 rng(101);
    double worst = 0.0;
    const auto label = gaze::make_label(gaze::kCenterZone, gaze::kCenterZone);
    for (int t = 0; t < 100; ++t) {
        const auto c = support::random_normalized_frame(rng);
        const auto pose = support::random_pose(rng);
        const auto r = geometry::relocate({c, 1.0}, pose, label, support::uniform(rng, 10, 200));
        const auto back = geometry::normalize_frame(r.points, pose, 1.0);
        for (std::size_t i = 0; i < landmarks::kCount; ++i)
            if (!landmarks::is_pupil_point(i))
                worst = std::max({worst, std::abs(back.points[i].x - c[i].x), std::abs(back.points[i].y - c[i].y),
                                  std::abs(back.points[i].z - c[i].z)});
    }
    return {worst < 1e-6, fmt("max error %.2e over 100 pairs", worst)};
}

Outcome rotation_validity()
{
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const auto m = geometry::euler_to_rotation(support::uniform(rng, -4, 4), support::uniform(rng, -4, 4),
                                                   support::uniform(rng, -4, 4));
        worst = std::max(worst, std::abs(m.determinant() - 1.0));
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k)
                    s += m(r, k) * m(c, k);
                worst = std::max(worst, std::abs(s - (r == c ? 1.0 : 0.0)));
            }
    }
    return {worst < 1e-9, fmt("max deviation %.2e over 10000 triples", worst)};
}

Outcome gaze_codec()
{
    std::vector<int> hits(gaze::kJointClasses, 0);
    int bad = 0;
    for (int l = 0; l < gaze::kZones; ++l)
        for (int r = 0; r < gaze::kZones; ++r) {
            const int v = gaze::encode_joint(l, r);
            if (v < 0 || v >= gaze::kJointClasses) {
                ++bad;
                continue;
            }
            ++hits[static_cast<std::size_t>(v)];
            const auto d = gaze::decode_joint(v);
            bad += d.left != l || d.right != r;
        }
    for (int h : hits)
        bad += h != 1;
    const auto face = corpus::identity_face(1, 0);
    for (const auto& grid : {geometry::left_eye_grid(face), geometry::right_eye_grid(face)})
        for (int z = 0; z < gaze::kZones; ++z)
            bad += gaze::assign_zone(gaze::place_pupil(z, grid), grid) != z;
    return {bad == 0, fmt("%d failures over 100 pairs and 2x10 zones", bad)};
}

// ------------------------------------------------------------------ 4

std::vector<double> randn(std::mt19937_64& rng, std::size_t n)
{
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (double& x : v)
        x = d(rng);
    return v;
}

model::ModelConfig tiny_model()
{
    model::ModelConfig c;
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

Outcome gradient_checks()
{
    using namespace nn;
    std::vector<std::pair<std::string, double>> results;
    std::mt19937_64 rng(103);
    {
        ParameterSet ps;
        const Linear lin = Linear::create(ps, "lin", 12, 9);
        ps.initialize(1);
        const auto x = randn(rng, 12), y = randn(rng, 9);
        results.emplace_back("linear",
                             grad_check(ps, [&](Graph& g) { return g.weighted_l1(lin(g, g.input(x)), y, 2.0); })
                                 .max_relative_error);
    }
    {
        ParameterSet ps;
        const Embedding e = Embedding::create(ps, "emb", 6, 8);
        const Linear lin = Linear::create(ps, "lin", 6, 10);
        ps.initialize(2);
        results.emplace_back("embedding",
                             grad_check(ps, [&](Graph& g) { return g.cross_entropy(g.softmax(lin(g, e(g, 3))), 7); })
                                 .max_relative_error);
    }
    {
        ParameterSet ps;
        const RecurrentLayer rnn(ps, "rnn", 5, 6, Direction::causal);
        const Linear head = Linear::create(ps, "head", 6, 4);
        ps.initialize(3);
        const auto x = randn(rng, 15);
        results.emplace_back("lstm", grad_check(ps, [&](Graph& g) {
                                         LstmState s = rnn.initial(g);
                                         for (std::size_t t = 0; t < 3; ++t)
                                             s = rnn.step(g, g.input(std::span(x).subspan(t * 5, 5)), s);
                                         return g.cross_entropy_logits(head(g, s.h), 2);
                                     }).max_relative_error);
    }
    {
        ParameterSet ps;
        const RecurrentLayer enc(ps, "enc", 4, 5, Direction::bidirectional);
        const Linear head = Linear::create(ps, "head", 10, 3);
        ps.initialize(4);
        const auto x = randn(rng, 20), y = randn(rng, 3);
        results.emplace_back("bidirectional", grad_check(ps, [&](Graph& g) {
                                                  std::vector<Var> w;
                                                  for (std::size_t t = 0; t < 5; ++t)
                                                      w.push_back(g.input(std::span(x).subspan(t * 4, 4)));
                                                  return g.weighted_l1(head(g, enc.encode(g, w)), y, 2.0);
                                              }).max_relative_error);
    }

    corpus::GeneratorConfig gc;
    gc.sequences_per_emotion = 1;
    gc.length = 30;
    gc.seed = 99;
    const corpus::Corpus c = corpus::generate_synthetic(corpus::default_profiles(), gc);
    corpus::SequenceRecord s = c.sequences[3];
    s.landmarks.resize(3);
    s.audio.resize(3);
    s.poses.resize(3);
    s.gaze.resize(3);
    s.keypoints.resize(3);
    const std::vector<corpus::SequenceRecord> seqs{s};
    const auto samples = model::make_samples(c, seqs);
    model::Stage1Model m1(tiny_model());
    m1.stats() = model::FeatureStats::fit(seqs);
    m1.initialize(model::mean_landmarks(samples), model::mean_pose(samples), model::stay_logit(samples));
    const char* names[] = {"landmark step", "pose step", "gaze step", "emotion classifier"};
    const auto terms = grad_check_terms(m1.params(), [&](Graph& g) {
        const auto t = model::stage1_sequence_loss(m1, g, samples[0]);
        return std::vector<Var>{t.landmarks, t.pose, t.gaze, t.emotion};
    });
    for (std::size_t part = 0; part < terms.size(); ++part)
        results.emplace_back(names[part], terms[part].max_relative_error);
    model::KeypointModel m2(tiny_model());
    m2.stats() = model::FeatureStats::fit(seqs);
    m2.set_oracle_seed(c.keypoint_seed);
    m2.initialize(model::mean_keypoints(samples));
    results.emplace_back("keypoint step",
                         grad_check(m2.params(), [&](Graph& g) { return model::stage2_sequence_loss(m2, g, samples[0]); })
                             .max_relative_error);

    double worst = 0.0;
    std::string where;
    for (const auto& [name, e] : results)
        if (e >= worst) {
            worst = e;
            where = name;
        }
    return {worst < 1e-4, fmt("%zu checks, max relative error %.2e (%s)", results.size(), worst, where.c_str())};
}

// ------------------------------------------------------------------ 5-6

Outcome dtw_oracle()
{
    const auto seqs = support::all_sequences(6, 3);
    std::vector<std::vector<std::vector<std::vector<std::uint8_t>>>> paths(7, decltype(paths)::value_type(7));
    for (int n = 1; n <= 6; ++n)
        for (int m = 1; m <= 6; ++m)
            paths[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] = support::all_alignments(n, m);
    long mismatches = 0, pairs = 0;
    for (const auto& a : seqs)
        for (const auto& b : seqs) {
            mismatches += metrics::dtw(a, b) != support::enumerate_dtw(a, b, paths[a.size()][b.size()]);
            ++pairs;
        }

    std::mt19937_64 rng(105);
    long property_failures = 0;
    for (int t = 0; t < 500; ++t) {
        std::vector<double> a(1 + rng() % 40), b(1 + rng() % 40);
        for (double& x : a)
            x = support::uniform(rng, -3, 3);
        for (double& x : b)
            x = support::uniform(rng, -3, 3);
        const double d = metrics::dtw(a, b);
        property_failures += metrics::dtw(a, a) != 0.0;
        property_failures += d != metrics::dtw(b, a);
        property_failures += d < 0.0;
        const double c = std::ldexp(1.0, static_cast<int>(rng() % 9) - 4);
        for (double& x : a)
            x *= c;
        for (double& x : b)
            x *= c;
        property_failures += metrics::dtw(a, b) != c * d;
    }
    return {mismatches == 0 && property_failures == 0,
            fmt("%ld/%ld oracle mismatches, %ld property failures", mismatches, pairs, property_failures)};
}

Outcome mfcc_oracle()
{
    audio::Waveform w;
    w.samples = support::sine(440, 1.0);
    const auto f = audio::mfcc_sequence(w);
    const auto ref = support::naive_mfcc(w.samples, 5);
    double worst = 0.0;
    for (std::size_t n = 0; n < 5; ++n)
        for (std::size_t k = 0; k < audio::kCoefficients; ++k)
            worst = std::max(worst, std::abs(f[n][k] - ref[n][k]));
    int bad_counts = 0;
    for (double d : {0.5, 1.0, 2.0}) {
        audio::Waveform x;
        x.samples.assign(static_cast<std::size_t>(std::lround(d * 16000)), 0.1);
        bad_counts += audio::mfcc_sequence(x).size() != static_cast<std::size_t>(std::lround(d * 30));
    }
    return {worst < 1e-6 && bad_counts == 0, fmt("max abs error %.2e, %d frame-count mismatches", worst, bad_counts)};
}

// ------------------------------------------------------------------ 7-9

cli::RunConfig default_run()
{
    cli::RunConfig c;
    c.corpus_dir = (g_work / "corpus").string();
    c.checkpoint_dir = (g_work / "checkpoints").string();
    c.out_dir = (g_work / "synth").string();
    return c;
}

bool g_trained = false;

Outcome training_convergence()
{
    const cli::RunConfig cfg = default_run();
    cli::cmd_gen_corpus(cfg, g_log);
    const auto r = cli::cmd_train(cfg, g_log);
    g_trained = true;
    const double ratio = r.stage1.back().total / r.stage1.front().total;
    const bool ok = static_cast<int>(r.stage1.size()) == cfg.epochs && ratio <= 0.2 && r.heldout.gaze_accuracy >= 0.9 &&
                    r.heldout.emotion_accuracy >= 0.9;
    return {ok, fmt("%zu epochs, loss ratio %.4f, held-out gaze %.3f, emotion %.3f", r.stage1.size(), ratio,
                    r.heldout.gaze_accuracy, r.heldout.emotion_accuracy)};
}

double binomial_tail(int n, int k)
{
    double p = 0.0;
    for (int i = k; i <= n; ++i) {
        double c = 1.0;
        for (int j = 0; j < i; ++j)
            c = c * (n - j) / (j + 1);
        p += c * std::pow(0.5, n);
    }
    return p;
}

Outcome emotion_direction()
{
    if (!g_trained)
        return {false, "no trained model"};
    const cli::RunConfig cfg = default_run();
    const auto s1 = model::load_stage1(fs::path(cfg.checkpoint_dir) / "stage1.ckpt");
    const auto profiles = corpus::default_profiles();
    const int contempt = corpus::emotion_from_name("contempt"), surprised = corpus::emotion_from_name("surprised");
    const bool profiles_agree = profiles[static_cast<std::size_t>(contempt)].eye_opening_scale <
                                    profiles[static_cast<std::size_t>(surprised)].eye_opening_scale &&
                                profiles[static_cast<std::size_t>(contempt)].pitch_bias >
                                    profiles[static_cast<std::size_t>(surprised)].pitch_bias;

    // unseen clips: audio from a corpus with a different seed
    corpus::GeneratorConfig gc = cfg.generator_config();
    gc.seed = cfg.seed + 7919;
    gc.sequences_per_emotion = 20;
    const corpus::Corpus clips = corpus::generate_synthetic({profiles[0]}, gc);

    int narrower = 0, higher = 0;
    for (int i = 0; i < 20; ++i) {
        model::SynthesisInput in;
        in.features = audio::mfcc_sequence(clips.sequences[static_cast<std::size_t>(i)].waveform);
        in.reference = cli::identity_reference(cfg.seed, i % cfg.identities);
        in.seed = static_cast<std::uint64_t>(i);
        std::array<double, 2> eye{}, pitch{};
        for (int k = 0; k < 2; ++k) {
            in.emotion = k == 0 ? contempt : surprised;
            const auto b = model::synthesize(s1.model, nullptr, in);
            for (std::size_t n = 0; n < b.length(); ++n) {
                eye[static_cast<std::size_t>(k)] += geometry::eye_opening(b.landmarks[n]);
                pitch[static_cast<std::size_t>(k)] += b.poses[n].pitch;
            }
        }
        narrower += eye[0] < eye[1];
        higher += pitch[0] > pitch[1];
    }
    const double p_eye = binomial_tail(20, narrower), p_pitch = binomial_tail(20, higher);
    return {profiles_agree && p_eye < 0.01 && p_pitch < 0.01,
            fmt("contempt narrower eyes %d/20 (p=%.2g), higher pitch %d/20 (p=%.2g)", narrower, p_eye, higher,
                p_pitch)};
}

Outcome shape_contract()
{
    if (!g_trained)
        return {false, "no trained model"};
    cli::RunConfig cfg = default_run();
    audio::Waveform w;
    w.samples = support::sine(220, 1.0, 0.3);
    cfg.audio = (g_work / "one_second.wav").string();
    audio::write_wav_float(cfg.audio, w);
    cli::cmd_synthesize(cfg, g_log);
    const model::Bundle b = model::read_bundle(cfg.out_dir);

    bool shapes = b.landmarks.size() == 30 && b.poses.size() == 30 && b.gaze.size() == 30 && b.relocated.size() == 30 &&
                  b.keypoints.size() == 30;
    double worst = 0.0;
    for (std::size_t n = 0; shapes && n < 30; ++n) {
        shapes = shapes && b.landmarks[n].size() == 147 && b.relocated[n].size() == 147 && b.keypoints[n].size() == 10 &&
                 b.poses[n].to_array().size() == 6;
        gaze::validate(b.gaze[n]);
        const auto placed = geometry::place_pupils(b.landmarks[n], b.gaze[n]);
        const auto rot = support::hand_rotation(b.poses[n].yaw, b.poses[n].pitch, b.poses[n].roll);
        for (std::size_t i = 0; i < 147; ++i) {
            const Vec3 o = support::dense_transform(rot, b.scale_factor, placed[i], b.poses[n].translation);
            worst = std::max({worst, std::abs(o.x - b.relocated[n][i].x), std::abs(o.y - b.relocated[n][i].y),
                              std::abs(o.z - b.relocated[n][i].z)});
        }
    }
    return {shapes && worst < 1e-9, fmt("%zu frames, shapes %s, recomposition error %.2e", b.length(),
                                        shapes ? "ok" : "wrong", worst)};
}

// ------------------------------------------------------------------ 10

struct RunBytes {
    std::map<std::string, std::string> corpus;
    std::string stage1_csv, stage2_csv;
    std::string bundle_hash;
};

RunBytes pipeline_once()
{
    const fs::path root = g_work / "determinism";
    fs::remove_all(root);
    cli::RunConfig cfg;
    cfg.corpus_dir = (root / "corpus").string();
    cfg.checkpoint_dir = (root / "ckpt").string();
    cfg.out_dir = (root / "synth").string();
    cfg.sequences_per_emotion = 2;
    cfg.length = 45;
    cfg.epochs = 3;
    cfg.stage2_epochs = 2;
    cli::cmd_gen_corpus(cfg, g_log);
    cli::cmd_train(cfg, g_log);
    audio::Waveform w;
    w.samples = support::sine(330, 1.0, 0.3);
    cfg.audio = (root / "clip.wav").string();
    audio::write_wav_float(cfg.audio, w);

    RunBytes out;
    out.bundle_hash = cli::cmd_synthesize(cfg, g_log);
    for (const auto& e : fs::directory_iterator(cfg.corpus_dir))
        out.corpus[e.path().filename().string()] = read_file(e.path());
    out.stage1_csv = read_file(root / "ckpt" / "stage1_loss.csv");
    out.stage2_csv = read_file(root / "ckpt" / "stage2_loss.csv");
    return out;
}

Outcome determinism()
{
    const RunBytes a = pipeline_once(), b = pipeline_once();
    const bool corpus = a.corpus == b.corpus, curves = a.stage1_csv == b.stage1_csv && a.stage2_csv == b.stage2_csv;
    const bool bundle = a.bundle_hash == b.bundle_hash;
    return {corpus && curves && bundle,
            fmt("corpus files (%zu) %s, loss curves %s, bundle hash %s", a.corpus.size(), corpus ? "identical" : "differ",
                curves ? "identical" : "differ", bundle ? "identical" : "differ")};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0: no limit
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv)
{
    g_work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_work");
    fs::remove_all(g_work);
    fs::create_directories(g_work);
    g_log.open(g_work / "acceptance.log");

    const std::vector<Criterion> criteria = {
        {1, "geometry round-trip", 1, geometry_round_trip},
        {2, "rotation validity", 1, rotation_validity},
        {3, "gaze codec", 1, gaze_codec},
        {4, "gradient correctness", 30, gradient_checks},
        {5, "DTW oracle equivalence", 60, dtw_oracle},
        {6, "MFCC oracle", 10, mfcc_oracle},
        {7, "training convergence", 600, training_convergence},
        {8, "emotion-alignment direction", 120, emotion_direction},
        {9, "end-to-end shape contract", 0, shape_contract},
        {10, "determinism", 0, determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.budget_seconds == 0 || secs < c.budget_seconds;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::string budget = c.budget_seconds > 0 ? fmt(" / %.0f s", c.budget_seconds) : std::string();
        std::printf("criterion %2d %-28s %s  (%.2f s%s)  %s%s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                    budget.c_str(), o.detail.c_str(), in_time ? "" : "  [over time budget]");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
