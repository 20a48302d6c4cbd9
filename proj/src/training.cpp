#include "talkface/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "talkface/error.hpp"

namespace talkface::model {

namespace {

std::span<const double> flat(const geometry::Landmarks& p)
{
    return {&p[0].x, kLandmarkValues};
}

std::span<const double> flat(const corpus::Keypoints& k)
{
    return {&k[0].x, kKeypointValues};
}

int argmax_softmax(Graph& g, Var logits)
{
    return gaze::argmax_class(g.value(g.softmax(logits)));
}

// Runs body(i) for i in [0, n), in parallel when asked. The first exception
// (lowest index) is rethrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, Execution exec, Body body)
{
    std::vector<std::exception_ptr> errors(n);
    const bool parallel = exec == Execution::parallel && n > 1;
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// Shared mini-batch loop. loss(g, sample, components) builds one sequence's
// graph, writes its component values and returns the scalar to minimize.
template <typename LossFn, typename EpochFn>
void train_loop(nn::ParameterSet& params, nn::Adam& opt, std::span<const Sample> samples, const TrainConfig& cfg,
                int first_epoch, std::size_t components, LossFn loss, EpochFn on_epoch)
{
    require(cfg.batch_size >= 1, ErrorKind::config, "batch size must be positive");
    require(cfg.epochs >= 0 && first_epoch >= 0, ErrorKind::config, "epoch counts must be non-negative");
    require(!samples.empty(), ErrorKind::data, "no training sequences");
    const std::size_t n = samples.size();
    const std::size_t width = std::min(cfg.batch_size, n);

    std::vector<nn::Gradients> per_sequence(width, nn::Gradients(params));
    nn::Gradients total(params);
    std::vector<double> batch_components(width * components);

    for (int epoch = first_epoch; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(n, cfg.shuffle_seed, epoch);
        std::vector<double> sums(components, 0.0);
        for (std::size_t start = 0; start < n; start += width) {
            const std::size_t count = std::min(width, n - start);
            for_each_index(count, cfg.execution, [&](std::size_t b) {
                Graph g(params);
                per_sequence[b].zero();
                const Var root = loss(g, samples[order[start + b]], &batch_components[b * components]);
                g.backward(root, per_sequence[b]);
            });
            total.zero();
            for (std::size_t b = 0; b < count; ++b) {
                total.add(per_sequence[b]);
                for (std::size_t c = 0; c < components; ++c)
                    sums[c] += batch_components[b * components + c];
            }
            total.scale(1.0 / static_cast<double>(count));
            if (cfg.clip_norm > 0.0) {
                const double norm = std::sqrt(total.squared_norm());
                if (norm > cfg.clip_norm)
                    total.scale(cfg.clip_norm / norm);
            }
            opt.step(params, total);
        }
        for (double& s : sums)
            s /= static_cast<double>(n);
        on_epoch(epoch, sums);
    }
}

}  // namespace

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

Reference training_reference(const corpus::Corpus& corpus, const corpus::SequenceRecord& seq)
{
    require(!seq.gaze.empty(), ErrorKind::data, seq.id + ": empty sequence");
    Reference r;
    r.landmarks = corpus::identity_face(corpus.seed, seq.identity, seq.canonical_width);
    r.gaze = seq.gaze.front();
    return r;
}

std::vector<Sample> make_samples(const corpus::Corpus& corpus, std::span<const corpus::SequenceRecord> seqs)
{
    std::vector<Sample> out;
    out.reserve(seqs.size());
    for (const auto& s : seqs)
        out.push_back({&s, training_reference(corpus, s)});
    return out;
}

void check_samples(std::span<const Sample> samples, bool need_keypoints)
{
    require(!samples.empty(), ErrorKind::data, "no training sequences");
    for (const auto& s : samples) {
        require(s.sequence != nullptr, ErrorKind::usage, "sample without a sequence");
        corpus::validate(*s.sequence);
        require(!need_keypoints || !s.sequence->keypoints.empty(), ErrorKind::data,
                "sequence '" + s.sequence->id + "' has no latent keypoints");
        for (const Vec3& p : s.reference.landmarks)
            require(is_finite(p), ErrorKind::data, "non-finite reference frame for '" + s.sequence->id + "'");
        gaze::validate(s.reference.gaze);
    }
}

geometry::Landmarks mean_landmarks(std::span<const Sample> samples)
{
    geometry::Landmarks sum{};
    std::size_t n = 0;
    for (const auto& s : samples)
        for (const auto& f : s.sequence->landmarks) {
            for (std::size_t i = 0; i < f.size(); ++i)
                sum[i] += f[i];
            ++n;
        }
    require(n > 0, ErrorKind::data, "no frames");
    for (Vec3& p : sum)
        p = (1.0 / static_cast<double>(n)) * p;
    return sum;
}

std::array<double, kPoseValues> mean_pose(std::span<const Sample> samples)
{
    std::array<double, kPoseValues> sum{};
    std::size_t n = 0;
    for (const auto& s : samples)
        for (const auto& p : s.sequence->poses) {
            const auto a = p.to_array();
            for (std::size_t i = 0; i < a.size(); ++i)
                sum[i] += a[i];
            ++n;
        }
    require(n > 0, ErrorKind::data, "no frames");
    for (double& v : sum)
        v /= static_cast<double>(n);
    return sum;
}

double stay_logit(std::span<const Sample> samples)
{
    std::size_t stays = 0, n = 0;
    for (const auto& s : samples) {
        int prev = s.reference.gaze.joint;
        for (const auto& g : s.sequence->gaze) {
            stays += g.joint == prev;
            prev = g.joint;
            ++n;
        }
    }
    require(n > 0, ErrorKind::data, "no frames");
    constexpr double classes = gaze::kJointClasses;
    // keep the logit finite on runs that never switch
    const double rho = std::clamp(static_cast<double>(stays) / static_cast<double>(n), 1.0 / classes, 1.0 - 1e-3);
    return std::log(rho * (classes - 1.0) / (1.0 - rho));
}

std::array<double, kKeypointValues> mean_keypoints(std::span<const Sample> samples)
{
    std::array<double, kKeypointValues> sum{};
    std::size_t n = 0;
    for (const auto& s : samples)
        for (const auto& k : s.sequence->keypoints) {
            const auto f = flat(k);
            for (std::size_t i = 0; i < f.size(); ++i)
                sum[i] += f[i];
            ++n;
        }
    require(n > 0, ErrorKind::data, "no keypoint frames");
    for (double& v : sum)
        v /= static_cast<double>(n);
    return sum;
}

Stage1Terms stage1_sequence_loss(const Stage1Model& m, Graph& g, const Sample& s)
{
    const auto& seq = *s.sequence;
    const std::size_t n_frames = seq.length();
    const auto& cfg = m.config();
    const auto audio = audio_inputs(g, m.stats(), seq.audio);
    const Var e = m.embed_emotion(g, seq.emotion);
    LstmState sl = m.initial(g, Cue::landmark);
    LstmState sp = m.initial(g, Cue::pose);
    LstmState sg = m.initial(g, Cue::gaze);
    Var prev_lm = g.input(flat(s.reference.landmarks));
    Var prev_pose = g.input(s.reference.pose.to_array());
    int prev_gaze = s.reference.gaze.joint;

    std::vector<Var> lm, pose, gz, emo;
    for (std::size_t n = 0; n < n_frames; ++n) {
        const auto window = audio_window(audio, n, cfg.audio_radius);
        const CueStep l = m.landmark_step(g, sl, prev_lm, m.encode_audio(g, Cue::landmark, window), e);
        const CueStep p = m.pose_step(g, sp, prev_pose, m.encode_audio(g, Cue::pose, window), e);
        const CueStep z = m.gaze_step(g, sg, prev_gaze, m.encode_audio(g, Cue::gaze, window), e);
        const auto target_pose = seq.poses[n].to_array();
        lm.push_back(g.weighted_l1(l.output, flat(seq.landmarks[n]), cfg.y_weight));
        pose.push_back(g.l1(p.output, target_pose));
        gz.push_back(g.cross_entropy_logits(z.output, static_cast<std::size_t>(seq.gaze[n].joint)));
        emo.push_back(g.cross_entropy_logits(m.classify_emotion(g, l.feature, p.feature, z.feature),
                                             static_cast<std::size_t>(seq.emotion)));
        // teacher forcing
        prev_lm = g.input(flat(seq.landmarks[n]));
        prev_pose = g.input(target_pose);
        prev_gaze = seq.gaze[n].joint;
    }
    const double inv = 1.0 / static_cast<double>(n_frames);
    Stage1Terms t;
    t.landmarks = g.scale(g.add_n(lm), inv);
    t.pose = g.scale(g.add_n(pose), inv);
    t.gaze = g.scale(g.add_n(gz), inv);
    t.emotion = g.scale(g.add_n(emo), inv);
    const Var parts[] = {t.landmarks, t.pose, t.gaze, t.emotion};
    t.total = g.add_n(parts);
    return t;
}

namespace {

corpus::Keypoints reference_keypoints(const KeypointModel& m, const Reference& ref)
{
    const double scale = m.config().scale_factor;
    const corpus::KeypointOracle oracle(m.oracle_seed(), scale);
    const double width = geometry::face_width(ref.landmarks);
    return oracle.project(geometry::relocate({ref.landmarks, width}, ref.pose, ref.gaze, scale).points);
}

}  // namespace

Var stage2_sequence_loss(const KeypointModel& m, Graph& g, const Sample& s)
{
    const auto& seq = *s.sequence;
    require(seq.keypoints.size() == seq.length(), ErrorKind::data, "sequence '" + seq.id + "' lacks keypoints");
    const auto& cfg = m.config();
    const auto audio = audio_inputs(g, m.stats(), seq.audio);
    const Var e = m.embed_emotion(g, seq.emotion);
    LstmState st = m.initial(g);
    const corpus::Keypoints k0 = reference_keypoints(m, s.reference);
    Var prev = g.input(flat(k0));
    std::vector<Var> terms;
    for (std::size_t n = 0; n < seq.length(); ++n) {
        const auto window = audio_window(audio, n, cfg.audio_radius);
        const auto rel = geometry::relocate({seq.landmarks[n], seq.canonical_width}, seq.poses[n], seq.gaze[n],
                                            cfg.scale_factor);
        const Var r = g.input(scaled_relocated(rel.points, cfg.scale_factor));
        const Var k = m.keypoint_step(g, st, prev, r, m.encode_audio(g, window), e);
        terms.push_back(g.l1(k, flat(seq.keypoints[n])));
        prev = g.input(flat(seq.keypoints[n]));
    }
    return g.scale(g.add_n(terms), 1.0 / static_cast<double>(seq.length()));
}

std::vector<Stage1Loss> train_stage1(Stage1Model& m, nn::Adam& opt, std::span<const Sample> samples,
                                     const TrainConfig& cfg, int first_epoch, const EpochHook1& hook)
{
    check_samples(samples, false);
    std::vector<Stage1Loss> curve;
    train_loop(
        m.params(), opt, samples, cfg, first_epoch, 4,
        [&](Graph& g, const Sample& s, double* comp) {
            const Stage1Terms t = stage1_sequence_loss(m, g, s);
            comp[0] = g.scalar(t.landmarks);
            comp[1] = g.scalar(t.pose);
            comp[2] = g.scalar(t.gaze);
            comp[3] = g.scalar(t.emotion);
            return t.total;
        },
        [&](int epoch, const std::vector<double>& c) {
            Stage1Loss l{epoch, c[0], c[1], c[2], c[3], c[0] + c[1] + c[2] + c[3]};
            curve.push_back(l);
            if (hook)
                hook(l);
        });
    return curve;
}

std::vector<Stage2Loss> train_stage2(KeypointModel& m, nn::Adam& opt, std::span<const Sample> samples,
                                     const TrainConfig& cfg, int first_epoch, const EpochHook2& hook)
{
    check_samples(samples, true);
    std::vector<Stage2Loss> curve;
    train_loop(
        m.params(), opt, samples, cfg, first_epoch, 1,
        [&](Graph& g, const Sample& s, double* comp) {
            const Var loss = stage2_sequence_loss(m, g, s);
            comp[0] = g.scalar(loss);
            return loss;
        },
        [&](int epoch, const std::vector<double>& c) {
            Stage2Loss l{epoch, c[0], c[0]};
            curve.push_back(l);
            if (hook)
                hook(l);
        });
    return curve;
}

Stage1Eval evaluate_stage1(const Stage1Model& m, std::span<const Sample> samples, Execution exec)
{
    check_samples(samples, false);
    struct Partial {
        double lm = 0, pose = 0;
        std::size_t gaze_hits = 0, emotion_hits = 0, frames = 0;
    };
    std::vector<Partial> parts(samples.size());
    for_each_index(samples.size(), exec, [&](std::size_t i) {
        const Sample& s = samples[i];
        const auto& seq = *s.sequence;
        const auto& cfg = m.config();
        Graph g(m.params());
        const auto audio = audio_inputs(g, m.stats(), seq.audio);
        const Var e = m.embed_emotion(g, seq.emotion);
        LstmState sl = m.initial(g, Cue::landmark), sp = m.initial(g, Cue::pose), sg = m.initial(g, Cue::gaze);
        Var prev_lm = g.input(flat(s.reference.landmarks));
        Var prev_pose = g.input(s.reference.pose.to_array());
        int prev_gaze = s.reference.gaze.joint;
        Partial& out = parts[i];
        for (std::size_t n = 0; n < seq.length(); ++n) {
            const auto window = audio_window(audio, n, cfg.audio_radius);
            const CueStep l = m.landmark_step(g, sl, prev_lm, m.encode_audio(g, Cue::landmark, window), e);
            const CueStep p = m.pose_step(g, sp, prev_pose, m.encode_audio(g, Cue::pose, window), e);
            const CueStep z = m.gaze_step(g, sg, prev_gaze, m.encode_audio(g, Cue::gaze, window), e);
            const auto lv = g.value(l.output);
            for (std::size_t k = 0; k < landmarks::kCount; ++k) {
                const Vec3 pred{lv[3 * k], lv[3 * k + 1], lv[3 * k + 2]};
                out.lm += distance(pred, seq.landmarks[n][k]);
            }
            const auto pv = g.value(p.output);
            const auto target_pose = seq.poses[n].to_array();
            for (std::size_t k = 0; k < kPoseValues; ++k)
                out.pose += std::abs(pv[k] - target_pose[k]);
            out.gaze_hits += argmax_softmax(g, z.output) == seq.gaze[n].joint;
            out.emotion_hits += argmax_softmax(g, m.classify_emotion(g, l.feature, p.feature, z.feature)) == seq.emotion;
            ++out.frames;
            prev_lm = g.input(flat(seq.landmarks[n]));
            prev_pose = g.input(target_pose);
            prev_gaze = seq.gaze[n].joint;
        }
    });
    Stage1Eval r;
    double lm = 0, pose = 0;
    std::size_t gh = 0, eh = 0;
    for (const auto& p : parts) {
        lm += p.lm;
        pose += p.pose;
        gh += p.gaze_hits;
        eh += p.emotion_hits;
        r.frames += p.frames;
    }
    const auto f = static_cast<double>(r.frames);
    r.landmark_error = lm / (f * landmarks::kCount);
    r.pose_error = pose / (f * kPoseValues);
    r.gaze_accuracy = static_cast<double>(gh) / f;
    r.emotion_accuracy = static_cast<double>(eh) / f;
    return r;
}

Stage2Eval evaluate_stage2(const KeypointModel& m, std::span<const Sample> samples, Execution exec)
{
    check_samples(samples, true);
    std::vector<double> sums(samples.size());
    std::vector<std::size_t> frames(samples.size());
    for_each_index(samples.size(), exec, [&](std::size_t i) {
        Graph g(m.params());
        const Var loss = stage2_sequence_loss(m, g, samples[i]);
        frames[i] = samples[i].sequence->length();
        sums[i] = g.scalar(loss) * static_cast<double>(frames[i]);
    });
    Stage2Eval r;
    double total = 0.0;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        total += sums[i];
        r.frames += frames[i];
    }
    r.keypoint_error = total / static_cast<double>(r.frames);
    return r;
}

}  // namespace talkface::model
