#include <json.hpp>

#include "talkface/error.hpp"
#include "talkface/hash.hpp"
#include "talkface/sequentializers.hpp"
#include "talkface/textio.hpp"

namespace talkface::model {

namespace {

using nlohmann::json;

constexpr std::string_view kBundleSchema = "talkface-bundle/1";
constexpr std::string_view kBundleFrames = "talkface-bundle-frames 1";

void append_values(std::string& out, std::string_view tag, std::span<const double> values)
{
    out += ' ';
    out += tag;
    for (double v : values) {
        out += ' ';
        textio::append_double(out, v);
    }
}

std::string format(const Bundle& b)
{
    std::string out(kBundleFrames);
    out += '\n';
    for (std::size_t n = 0; n < b.length(); ++n) {
        out += "frame " + std::to_string(n);
        append_values(out, "lm", {&b.landmarks[n][0].x, kLandmarkValues});
        append_values(out, "pose", b.poses[n].to_array());
        const auto& g = b.gaze[n];
        out += " gaze " + std::to_string(g.left) + ' ' + std::to_string(g.right) + ' ' + std::to_string(g.joint);
        append_values(out, "reloc", {&b.relocated[n][0].x, kLandmarkValues});
        if (!b.keypoints.empty())
            append_values(out, "kp", {&b.keypoints[n][0].x, kKeypointValues});
        out += '\n';
    }
    return out;
}

void read_points(textio::TokenCursor& r, double* dst, std::size_t count)
{
    for (std::size_t i = 0; i < count; ++i)
        dst[i] = r.real();
}

}  // namespace

std::string write_bundle(const std::filesystem::path& dir, const Bundle& b)
{
    require(b.poses.size() == b.length() && b.gaze.size() == b.length() && b.relocated.size() == b.length() &&
                (b.keypoints.empty() || b.keypoints.size() == b.length()),
            ErrorKind::structural, "bundle cue sequences differ in length");
    std::filesystem::create_directories(dir);
    json m;
    m["schema"] = kBundleSchema;
    m["emotion"] = corpus::emotion_name(b.emotion);
    m["seed"] = b.seed;
    m["scale_factor"] = b.scale_factor;
    m["frames"] = b.length();
    m["fps"] = audio::kFps;
    m["has_keypoints"] = !b.keypoints.empty();
    m["stage1_checkpoint"] = b.stage1_digest;
    m["stage2_checkpoint"] = b.stage2_digest;
    m["frames_file"] = "bundle.frames";
    write_file(dir / "bundle.frames", format(b));
    write_file(dir / "bundle.json", m.dump(2) + "\n");
    return bundle_hash(dir);
}

std::string bundle_hash(const std::filesystem::path& dir)
{
    return sha256_hex(read_file(dir / "bundle.frames") + read_file(dir / "bundle.json"));
}

Bundle read_bundle(const std::filesystem::path& dir)
{
    const auto mpath = dir / "bundle.json";
    require(std::filesystem::exists(mpath), ErrorKind::data, "no bundle manifest at " + mpath.string());
    json m;
    try {
        m = json::parse(read_file(mpath));
        require(m.at("schema").get<std::string>() == kBundleSchema, ErrorKind::data,
                mpath.string() + ": unsupported schema");
    } catch (const json::exception& e) {
        fail(ErrorKind::data, mpath.string() + ": " + e.what());
    }

    Bundle b;
    std::size_t frames = 0;
    bool has_kp = false;
    try {
        b.emotion = corpus::emotion_from_name(m.at("emotion").get<std::string>());
        b.seed = m.at("seed").get<std::uint64_t>();
        b.scale_factor = m.at("scale_factor").get<double>();
        b.stage1_digest = m.at("stage1_checkpoint").get<std::string>();
        b.stage2_digest = m.at("stage2_checkpoint").get<std::string>();
        frames = m.at("frames").get<std::size_t>();
        has_kp = m.at("has_keypoints").get<bool>();
    } catch (const json::exception& e) {
        fail(ErrorKind::data, mpath.string() + ": " + e.what());
    }

    const auto fpath = dir / "bundle.frames";
    const std::string name = fpath.string();
    const std::string text = read_file(fpath);
    bool header = false;
    for (const auto& [line, offset, number] : textio::lines(text, name)) {
        if (!header) {
            require(line == kBundleFrames, ErrorKind::data, name + ":1: bad header (byte 0)");
            header = true;
            continue;
        }
        if (line.empty())
            continue;
        textio::TokenCursor r(line, offset, number, name);
        r.expect("frame");
        if (r.integer() != static_cast<long>(b.length()))
            r.error("frame index out of sequence", 1);
        geometry::Landmarks c{}, rel{};
        r.expect("lm");
        read_points(r, &c[0].x, kLandmarkValues);
        r.expect("pose");
        std::array<double, kPoseValues> pose{};
        read_points(r, pose.data(), kPoseValues);
        r.expect("gaze");
        const std::size_t at = r.position();
        const long ul = r.integer(), ur = r.integer(), v = r.integer();
        if (ul < 0 || ul >= gaze::kZones || ur < 0 || ur >= gaze::kZones || v != ul + gaze::kZones * ur)
            r.error("inconsistent gaze label", at);
        r.expect("reloc");
        read_points(r, &rel[0].x, kLandmarkValues);
        if (has_kp) {
            r.expect("kp");
            corpus::Keypoints k{};
            read_points(r, &k[0].x, kKeypointValues);
            b.keypoints.push_back(k);
        }
        if (!r.done())
            r.error("trailing tokens");
        b.landmarks.push_back(c);
        b.poses.push_back(geometry::HeadPose::from_array(pose));
        b.gaze.push_back(gaze::make_label(static_cast<int>(ul), static_cast<int>(ur)));
        b.relocated.push_back(rel);
    }
    require(b.length() == frames, ErrorKind::data,
            name + ": " + std::to_string(b.length()) + " frames, manifest says " + std::to_string(frames));
    return b;
}

}  // namespace talkface::model
