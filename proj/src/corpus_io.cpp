#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <json.hpp>

#include "talkface/corpus.hpp"
#include "talkface/error.hpp"
#include "talkface/hash.hpp"
#include "talkface/textio.hpp"

namespace talkface::corpus {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kEmotions> kNames = {"neutral", "angry", "contempt", "disgusted",
                                                            "fear",    "happy", "sad",      "surprised"};

constexpr std::size_t kLandmarkValues = landmarks::kCount * 3;

void append_values(std::string& out, std::string_view tag, std::span<const double> values)
{
    out += ' ';
    out += tag;
    for (double v : values) {
        out += ' ';
        textio::append_double(out, v);
    }
}

json sequence_manifest(const SequenceRecord& seq)
{
    json j;
    j["schema"] = kSequenceSchema;
    j["id"] = seq.id;
    j["emotion"] = emotion_name(seq.emotion);
    j["identity"] = seq.identity;
    j["fps"] = seq.fps;
    j["seed"] = seq.seed;
    j["frames"] = seq.length();
    j["canonical_width"] = seq.canonical_width;
    j["has_keypoints"] = !seq.keypoints.empty();
    j["frames_file"] = seq.id + ".frames";
    j["audio_file"] = seq.id + ".wav";
    return j;
}

template <typename T>
T field(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        fail(ErrorKind::data, where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorKind::data, where + ": bad type for field '" + key + "'");
    }
}

}  // namespace

std::string_view emotion_name(int label)
{
    require(label >= 0 && label < kEmotions, ErrorKind::domain, "emotion label out of range: " + std::to_string(label));
    return kNames[static_cast<std::size_t>(label)];
}

int emotion_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name)
            return static_cast<int>(i);
    fail(ErrorKind::data, "unknown emotion '" + std::string(name) + "'");
}

void validate(const SequenceRecord& seq)
{
    const std::string where = "sequence '" + seq.id + "'";
    auto check = [&](bool ok, const std::string& msg) { require(ok, ErrorKind::data, where + ": " + msg); };
    check(seq.emotion >= 0 && seq.emotion < kEmotions, "emotion out of range");
    check(seq.fps == audio::kFps, "fps must be 30");
    check(seq.canonical_width > 0.0 && std::isfinite(seq.canonical_width), "canonical width must be positive");
    const std::size_t n = seq.length();
    check(n > 0, "empty sequence");
    check(seq.audio.size() == n, "audio length " + std::to_string(seq.audio.size()) + " != " + std::to_string(n));
    check(seq.poses.size() == n, "pose length " + std::to_string(seq.poses.size()) + " != " + std::to_string(n));
    check(seq.gaze.size() == n, "gaze length " + std::to_string(seq.gaze.size()) + " != " + std::to_string(n));
    check(seq.keypoints.empty() || seq.keypoints.size() == n, "keypoint length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        const std::string at = "frame " + std::to_string(i) + ": ";
        for (double a : seq.audio[i])
            check(std::isfinite(a), at + "non-finite audio feature");
        for (const Vec3& p : seq.landmarks[i])
            check(is_finite(p), at + "non-finite landmark");
        for (double v : seq.poses[i].to_array())
            check(std::isfinite(v), at + "non-finite pose");
        for (double a : {seq.poses[i].yaw, seq.poses[i].pitch, seq.poses[i].roll})
            check(a > -std::numbers::pi && a <= std::numbers::pi, at + "angle outside (-pi, pi]");
        const auto& g = seq.gaze[i];
        check(g.left >= 0 && g.left < gaze::kZones && g.right >= 0 && g.right < gaze::kZones, at + "gaze zone out of range");
        check(g.joint == g.left + gaze::kZones * g.right, at + "gaze joint index inconsistent");
        if (!seq.keypoints.empty())
            for (const Vec3& k : seq.keypoints[i])
                check(is_finite(k), at + "non-finite keypoint");
    }
}

std::string format_frames(const SequenceRecord& seq)
{
    std::string out(kFramesSchema);
    out += '\n';
    for (std::size_t i = 0; i < seq.length(); ++i) {
        out += "frame ";
        out += std::to_string(i);
        append_values(out, "audio", seq.audio[i]);
        append_values(out, "lm", {&seq.landmarks[i][0].x, kLandmarkValues});
        append_values(out, "pose", seq.poses[i].to_array());
        const auto& g = seq.gaze[i];
        out += " gaze " + std::to_string(g.left) + ' ' + std::to_string(g.right) + ' ' + std::to_string(g.joint);
        if (!seq.keypoints.empty())
            append_values(out, "kp", {&seq.keypoints[i][0].x, static_cast<std::size_t>(kKeypoints * 3)});
        out += '\n';
    }
    return out;
}

void parse_frames(std::string_view text, const std::string& name, SequenceRecord& seq)
{
    seq.audio.clear();
    seq.landmarks.clear();
    seq.poses.clear();
    seq.gaze.clear();
    seq.keypoints.clear();

    bool header = false;
    for (const auto& [line, line_offset, line_no] : textio::lines(text, name)) {
        if (!header) {
            if (line != kFramesSchema)
                fail(ErrorKind::data, name + ":1: expected header '" + std::string(kFramesSchema) + "' (byte 0)");
            header = true;
            continue;
        }
        if (line.empty())
            continue;

        textio::TokenCursor r(line, line_offset, line_no, name);
        r.expect("frame");
        const std::size_t index_token = r.position();
        if (r.integer() != static_cast<long>(seq.audio.size()))
            r.error("frame index out of sequence", index_token);

        audio::AudioFeatureFrame a{};
        r.expect("audio");
        for (double& v : a)
            v = r.real();
        geometry::Landmarks lm{};
        r.expect("lm");
        for (Vec3& p : lm)
            p = {r.real(), r.real(), r.real()};
        r.expect("pose");
        std::array<double, 6> pose{};
        for (double& v : pose)
            v = r.real();
        r.expect("gaze");
        const std::size_t gaze_token = r.position();
        gaze::GazeLabel g;
        g.left = static_cast<int>(r.integer());
        g.right = static_cast<int>(r.integer());
        g.joint = static_cast<int>(r.integer());
        if (g.left < 0 || g.left >= gaze::kZones || g.right < 0 || g.right >= gaze::kZones)
            r.error("gaze zone out of range", gaze_token);
        if (g.joint != g.left + gaze::kZones * g.right)
            r.error("gaze joint index " + std::to_string(g.joint) + " != u_left + 10 * u_right", gaze_token + 2);

        const bool has_kp = r.peek("kp");
        if (!seq.audio.empty() && has_kp != !seq.keypoints.empty())
            r.error("keypoints present on some frames only", r.position());
        if (has_kp) {
            r.expect("kp");
            Keypoints k{};
            for (Vec3& p : k)
                p = {r.real(), r.real(), r.real()};
            seq.keypoints.push_back(k);
        }
        if (!r.done())
            r.error("trailing tokens", r.position());

        seq.audio.push_back(a);
        seq.landmarks.push_back(lm);
        seq.poses.push_back(geometry::HeadPose::from_array(pose));
        seq.gaze.push_back(g);
    }
    if (!header)
        fail(ErrorKind::data, name + ": empty frames file (byte 0)");
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus)
{
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["schema"] = kCorpusSchema;
    manifest["seed"] = corpus.seed;
    manifest["keypoint_seed"] = corpus.keypoint_seed;
    manifest["profile_hash"] = corpus.profile_hash;
    manifest["fps"] = audio::kFps;
    json counts = json::object();
    for (int e = 0; e < kEmotions; ++e)
        counts[std::string(emotion_name(e))] = 0;
    std::size_t total = 0;
    json ids = json::array();
    for (const auto& seq : corpus.sequences) {
        validate(seq);
        counts[std::string(emotion_name(seq.emotion))] = counts[std::string(emotion_name(seq.emotion))].get<int>() + 1;
        total += seq.length();
        ids.push_back(seq.id);
        write_file(dir / (seq.id + ".json"), sequence_manifest(seq).dump(2) + "\n");
        write_file(dir / (seq.id + ".frames"), format_frames(seq));
        audio::write_wav_float(dir / (seq.id + ".wav"), seq.waveform);
    }
    manifest["counts"] = counts;
    manifest["total_frames"] = total;
    manifest["sequences"] = ids;
    write_file(dir / "corpus.json", manifest.dump(2) + "\n");
}

SequenceRecord load_sequence(const std::filesystem::path& manifest_path)
{
    const std::string where = manifest_path.string();
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        fail(ErrorKind::data, where + ": malformed JSON: " + e.what());
    }
    if (field<std::string>(j, "schema", where) != kSequenceSchema)
        fail(ErrorKind::data, where + ": unsupported schema");
    SequenceRecord seq;
    seq.id = field<std::string>(j, "id", where);
    seq.emotion = emotion_from_name(field<std::string>(j, "emotion", where));
    seq.identity = field<int>(j, "identity", where);
    seq.fps = field<int>(j, "fps", where);
    seq.seed = field<std::uint64_t>(j, "seed", where);
    seq.canonical_width = field<double>(j, "canonical_width", where);
    const auto frames = field<std::size_t>(j, "frames", where);
    const auto has_kp = field<bool>(j, "has_keypoints", where);

    const auto dir = manifest_path.parent_path();
    const auto frames_path = dir / field<std::string>(j, "frames_file", where);
    parse_frames(read_file(frames_path), frames_path.string(), seq);
    require(seq.length() == frames, ErrorKind::data,
            frames_path.string() + ": " + std::to_string(seq.length()) + " frames, manifest says " +
                std::to_string(frames));
    require(has_kp == !seq.keypoints.empty(), ErrorKind::data, where + ": keypoint presence disagrees with frames");

    seq.audio_path = dir / field<std::string>(j, "audio_file", where);
    if (std::filesystem::exists(seq.audio_path))
        seq.waveform = audio::read_wav(seq.audio_path);
    validate(seq);
    return seq;
}

Corpus load_corpus(const std::filesystem::path& dir)
{
    const auto path = dir / "corpus.json";
    require(std::filesystem::exists(path), ErrorKind::data, "no corpus manifest at " + path.string());
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::data, path.string() + ": malformed JSON: " + e.what());
    }
    const std::string where = path.string();
    if (field<std::string>(j, "schema", where) != kCorpusSchema)
        fail(ErrorKind::data, where + ": unsupported schema");
    Corpus c;
    c.seed = field<std::uint64_t>(j, "seed", where);
    c.keypoint_seed = field<std::uint64_t>(j, "keypoint_seed", where);
    c.profile_hash = field<std::string>(j, "profile_hash", where);
    for (const auto& id : field<std::vector<std::string>>(j, "sequences", where))
        c.sequences.push_back(load_sequence(dir / (id + ".json")));
    return c;
}

Split split(const std::vector<SequenceRecord>& sequences, double train_fraction, std::uint64_t seed)
{
    require(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::domain, "train fraction must be in (0, 1)");
    const std::size_t n = sequences.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (n >= 2)
        n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, n)));
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, n)), order.end());
    Split s;
    for (std::size_t i = 0; i < n; ++i)
        (i < n_train ? s.train : s.heldout).push_back(sequences[order[i]]);
    return s;
}

}  // namespace talkface::corpus
