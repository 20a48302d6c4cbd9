#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>

#include "talkface/cli.hpp"
#include "talkface/hash.hpp"
#include "talkface/raster.hpp"
#include "talkface/textio.hpp"

namespace talkface::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kPreviewSize = 256;

void write_manifest(const fs::path& dir, std::string_view command, const RunConfig& cfg,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs)
{
    const auto list = [](const std::vector<fs::path>& paths) {
        json a = json::array();
        for (const auto& p : paths)
            a.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
        return a;
    };
    json m;
    m["command"] = command;
    m["config"] = cfg.to_json();
    m["config_sha256"] = config_hash(cfg);
    m["inputs"] = list(inputs);
    m["outputs"] = list(outputs);
    write_file(dir / ("manifest." + std::string(command) + ".json"), m.dump(2) + "\n");
}

std::string frame_name(std::string_view stem, std::size_t n, std::string_view ext)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04zu", n);
    return std::string(stem) + "_" + buf + std::string(ext);
}

std::string csv_row(std::initializer_list<double> values, long lead)
{
    std::string out = std::to_string(lead);
    for (double v : values) {
        out += ',';
        textio::append_double(out, v);
    }
    return out + '\n';
}

std::vector<std::vector<double>> parse_rows(std::string_view text, const std::string& name, std::string_view header,
                                            std::size_t columns)
{
    const auto rows = textio::lines(text, name);
    require(!rows.empty() && rows.front().text == header, ErrorKind::data, name + ":1: bad loss header (byte 0)");
    std::vector<std::vector<double>> out;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].text.empty())
            continue;
        std::vector<double> v;
        std::string_view rest = rows[k].text;
        for (;;) {
            const auto comma = rest.find(',');
            double x = 0.0;
            require(textio::parse_double(rest.substr(0, comma), x), ErrorKind::data,
                    name + ":" + std::to_string(rows[k].number) + ": bad number (byte " +
                        std::to_string(rows[k].offset + (rest.data() - rows[k].text.data())) + ")");
            v.push_back(x);
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        require(v.size() == columns, ErrorKind::data,
                name + ":" + std::to_string(rows[k].number) + ": expected " + std::to_string(columns) + " columns");
        out.push_back(std::move(v));
    }
    return out;
}

constexpr std::string_view kStage1Header = "epoch,landmarks,pose,gaze,emotion,total";
constexpr std::string_view kStage2Header = "epoch,keypoints,total";

template <class Loss>
std::vector<Loss> resumed_prefix(const fs::path& csv, int epochs_done,
                                 std::vector<Loss> (*parse)(std::string_view, const std::string&))
{
    require(fs::exists(csv), ErrorKind::data, "resume: missing loss file " + csv.string());
    auto losses = parse(read_file(csv), csv.string());
    require(losses.size() >= static_cast<std::size_t>(epochs_done), ErrorKind::data,
            "resume: " + csv.string() + " has fewer rows than the checkpoint's epochs");
    losses.resize(static_cast<std::size_t>(epochs_done));
    return losses;
}

bool is_bundle_dir(const fs::path& p)
{
    return fs::is_directory(p) && fs::exists(p / "bundle.json");
}

/// A bundle directory, or a corpus sequence manifest turned into a bundle.
model::Bundle load_reference_bundle(const fs::path& p, double scale_factor)
{
    if (is_bundle_dir(p))
        return model::read_bundle(p);
    require(fs::is_regular_file(p), ErrorKind::data, "not a bundle directory or sequence manifest: " + p.string());
    return model::bundle_from_sequence(corpus::load_sequence(p), scale_factor);
}

std::vector<fs::path> bundle_files(const fs::path& dir)
{
    return {dir / "bundle.json", dir / "bundle.frames"};
}

// Polylines through the schematic contours; closed ones wrap around.
struct Chain {
    std::size_t first;
    std::size_t count;
    bool closed;
};

std::vector<Chain> preview_chains()
{
    namespace lm = landmarks;
    std::vector<Chain> c;
    c.push_back({lm::kOval.first, lm::kOval.count, true});
    c.push_back({lm::kLeftBrow.first, lm::kLeftBrow.count, false});
    c.push_back({lm::kRightBrow.first, lm::kRightBrow.count, false});
    for (auto ring : {lm::kLeftEyeRing, lm::kRightEyeRing}) {
        c.push_back({ring.first, lm::kLowerLidCount, false});
        c.push_back({ring.first + lm::kLowerLidCount, ring.count - lm::kLowerLidCount, false});
    }
    c.push_back({lm::kNose.first, lm::kNose.count, false});
    // outer lower 11, outer upper 9, inner lower 11, inner upper 9
    std::size_t at = lm::kMouth.first;
    for (std::size_t len : {11u, 9u, 11u, 9u}) {
        c.push_back({at, len, false});
        at += len;
    }
    return c;
}

void line_plot(const std::vector<std::vector<double>>& series, const std::vector<raster::Rgb>& colors,
               const fs::path& path)
{
    constexpr int w = 512, h = 256, pad = 16;
    raster::Image img(w, h);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t n = 0;
    for (const auto& s : series) {
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        n = std::max(n, s.size());
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const double mid = hi > lo ? lo : lo - 0.5;
    const auto px = [&](std::size_t i) { return pad + (w - 2.0 * pad) * (n > 1 ? double(i) / double(n - 1) : 0.5); };
    const auto py = [&](double v) { return h - pad - (h - 2.0 * pad) * (v - mid) / span; };
    img.line(pad, h - pad, w - pad, h - pad, raster::kGrey);
    img.line(pad, pad, pad, h - pad, raster::kGrey);
    for (std::size_t k = 0; k < series.size(); ++k)
        for (std::size_t i = 1; i < series[k].size(); ++i)
            img.line(px(i - 1), py(series[k][i - 1]), px(i), py(series[k][i]), colors[k % colors.size()]);
    img.write_ppm(path);
}

void bar_plot(const std::vector<std::array<double, gaze::kZones>>& groups, const std::vector<raster::Rgb>& colors,
              const fs::path& path)
{
    constexpr int w = 512, h = 256, pad = 16;
    raster::Image img(w, h);
    double hi = 0.0;
    for (const auto& g : groups)
        hi = std::max(hi, *std::max_element(g.begin(), g.end()));
    if (hi <= 0.0)
        hi = 1.0;
    const int slot = (w - 2 * pad) / gaze::kZones;
    const int bar = std::max(1, (slot - 4) / static_cast<int>(std::max<std::size_t>(groups.size(), 1)));
    for (int z = 0; z < gaze::kZones; ++z)
        for (std::size_t k = 0; k < groups.size(); ++k) {
            const int x0 = pad + z * slot + 2 + static_cast<int>(k) * bar;
            const int top = h - pad - static_cast<int>(std::lround((h - 2 * pad) * groups[k][z] / hi));
            img.fill_rect(x0, top, x0 + bar, h - pad, colors[k % colors.size()]);
        }
    img.line(pad, h - pad, w - pad, h - pad, raster::kGrey);
    img.write_ppm(path);
}

std::array<double, gaze::kZones> as_doubles(const std::array<long, gaze::kZones>& counts)
{
    std::array<double, gaze::kZones> out{};
    std::copy(counts.begin(), counts.end(), out.begin());
    return out;
}

std::string histogram_csv(const std::vector<std::string>& names, const std::vector<std::array<long, gaze::kZones>>& cols)
{
    std::string out = "zone";
    for (const auto& n : names)
        out += "," + n;
    out += '\n';
    for (int z = 0; z < gaze::kZones; ++z) {
        out += std::to_string(z);
        for (const auto& c : cols)
            out += "," + std::to_string(c[static_cast<std::size_t>(z)]);
        out += '\n';
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- losses

std::string format_stage1_losses(const std::vector<model::Stage1Loss>& losses)
{
    std::string out(kStage1Header);
    out += '\n';
    for (const auto& l : losses)
        out += csv_row({l.landmarks, l.pose, l.gaze, l.emotion, l.total}, l.epoch);
    return out;
}

std::string format_stage2_losses(const std::vector<model::Stage2Loss>& losses)
{
    std::string out(kStage2Header);
    out += '\n';
    for (const auto& l : losses)
        out += csv_row({l.keypoints, l.total}, l.epoch);
    return out;
}

std::vector<model::Stage1Loss> parse_stage1_losses(std::string_view text, const std::string& name)
{
    std::vector<model::Stage1Loss> out;
    for (const auto& r : parse_rows(text, name, kStage1Header, 6))
        out.push_back({static_cast<int>(r[0]), r[1], r[2], r[3], r[4], r[5]});
    return out;
}

std::vector<model::Stage2Loss> parse_stage2_losses(std::string_view text, const std::string& name)
{
    std::vector<model::Stage2Loss> out;
    for (const auto& r : parse_rows(text, name, kStage2Header, 3))
        out.push_back({static_cast<int>(r[0]), r[1], r[2]});
    return out;
}

// ---------------------------------------------------------------- preview

void render_preview(const geometry::Landmarks& relocated, const fs::path& path)
{
    raster::Image img(kPreviewSize, kPreviewSize);
    const double c = kPreviewSize / 2.0;
    const auto at = [&](std::size_t i) { return std::pair{c + relocated[i].x, c + relocated[i].y}; };
    for (const auto& ch : preview_chains()) {
        const std::size_t segments = ch.closed ? ch.count : ch.count - 1;
        for (std::size_t k = 0; k < segments; ++k) {
            const auto [x0, y0] = at(ch.first + k);
            const auto [x1, y1] = at(ch.first + (k + 1) % ch.count);
            img.line(x0, y0, x1, y1, raster::kGrey);
        }
    }
    for (std::size_t i = 0; i < relocated.size(); ++i) {
        const auto [x, y] = at(i);
        if (landmarks::is_pupil_point(i))
            continue;
        img.set(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y)), raster::kBlack);
    }
    for (std::size_t i : {landmarks::kLeftIrisCenter, landmarks::kRightIrisCenter}) {
        const auto [x, y] = at(i);
        img.disc(x, y, 2.0, raster::kBlue);
    }
    img.write_ppm(path);
}

model::Reference identity_reference(std::uint64_t corpus_seed, int identity)
{
    model::Reference r;
    r.landmarks = corpus::identity_face(corpus_seed, identity);
    return r;
}

// ---------------------------------------------------------------- commands

corpus::Corpus cmd_gen_corpus(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    auto profiles = corpus::default_profiles();
    profiles.resize(static_cast<std::size_t>(cfg.emotions));
    corpus::Corpus c = corpus::generate_synthetic(profiles, cfg.generator_config());
    const fs::path dir = cfg.corpus_dir;
    corpus::write_corpus(dir, c);

    std::vector<fs::path> outputs{dir / "corpus.json"};
    std::size_t frames = 0;
    for (const auto& s : c.sequences) {
        for (const char* ext : {".json", ".frames", ".wav"})
            outputs.push_back(dir / (s.id + ext));
        frames += s.length();
    }
    write_manifest(dir, "gen-corpus", cfg, {}, outputs);
    log << "corpus " << dir.generic_string() << ": " << c.sequences.size() << " sequences, " << frames
        << " frames, seed " << c.seed << ", profiles " << c.profile_hash.substr(0, 16) << "\n";
    return c;
}

TrainResult cmd_train(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    const fs::path cdir = cfg.corpus_dir;
    const corpus::Corpus c = corpus::load_corpus(cdir);
    const corpus::Split sp = corpus::split(c.sequences, cfg.train_fraction, cfg.split_seed);
    const auto train = model::make_samples(c, sp.train);
    const auto held = model::make_samples(c, sp.heldout);
    const bool stage2 = cfg.stage2_epochs > 0;
    model::check_samples(train, stage2);
    model::check_samples(held, stage2);

    const fs::path dir = cfg.checkpoint_dir;
    fs::create_directories(dir);
    const fs::path ck1 = dir / "stage1.ckpt", csv1 = dir / "stage1_loss.csv";
    const fs::path ck2 = dir / "keypoint.ckpt", csv2 = dir / "stage2_loss.csv";
    const model::ModelConfig mc = cfg.model_config();
    log << "train: " << train.size() << " sequences, held out " << held.size() << "\n";

    TrainResult result;

    // Stage 1.
    std::optional<model::LoadedStage1> resumed1;
    if (cfg.resume && fs::exists(ck1)) {
        resumed1 = model::load_stage1(ck1);
        require(resumed1->model.config().to_meta() == mc.to_meta(), ErrorKind::config,
                "resume: " + ck1.string() + " was trained with a different model config");
    }
    model::Stage1Model m1 = resumed1 ? std::move(resumed1->model) : model::Stage1Model(mc);
    const auto tc1 = cfg.train_config(cfg.epochs);
    nn::Adam opt1(m1.params(), tc1.adam);
    int first1 = 0;
    if (resumed1) {
        nn::restore_optimizer(opt1, resumed1->checkpoint);
        first1 = std::min(resumed1->epochs_done, cfg.epochs);
        result.stage1 = resumed_prefix(csv1, first1, &parse_stage1_losses);
        log << "resuming stage 1 at epoch " << first1 << "\n";
    } else {
        m1.stats() = model::FeatureStats::fit(sp.train);
        m1.initialize(model::mean_landmarks(train), model::mean_pose(train), model::stay_logit(train));
    }
    result.stage1_digest = resumed1 ? resumed1->checkpoint.digest : model::save_stage1(ck1, m1, &opt1, 0);
    model::train_stage1(m1, opt1, train, tc1, first1, [&](const model::Stage1Loss& l) {
        result.stage1.push_back(l);
        write_file(csv1, format_stage1_losses(result.stage1));
        char line[160];
        std::snprintf(line, sizeof line, "stage1 epoch %3d  landmarks %.5f  pose %.5f  gaze %.4f  emotion %.4f  total %.4f\n",
                      l.epoch, l.landmarks, l.pose, l.gaze, l.emotion, l.total);
        log << line << std::flush;
        if ((l.epoch + 1) % cfg.checkpoint_every == 0 || l.epoch + 1 == cfg.epochs)
            result.stage1_digest = model::save_stage1(ck1, m1, &opt1, l.epoch + 1);
    });
    write_file(csv1, format_stage1_losses(result.stage1));

    result.heldout = model::evaluate_stage1(m1, held, tc1.execution);
    json ev;
    ev["frames"] = result.heldout.frames;
    ev["landmark_error"] = result.heldout.landmark_error;
    ev["pose_error"] = result.heldout.pose_error;
    ev["gaze_accuracy"] = result.heldout.gaze_accuracy;
    ev["emotion_accuracy"] = result.heldout.emotion_accuracy;
    if (!result.stage1.empty())
        ev["loss_ratio"] = result.stage1.back().total / result.stage1.front().total;
    log << "held out: landmark error " << result.heldout.landmark_error << ", gaze accuracy "
        << result.heldout.gaze_accuracy << ", emotion accuracy " << result.heldout.emotion_accuracy << "\n";

    // Stage 2.
    std::vector<fs::path> outputs{ck1, csv1};
    if (stage2) {
        std::optional<model::LoadedKeypoint> resumed2;
        if (cfg.resume && fs::exists(ck2)) {
            resumed2 = model::load_keypoint(ck2);
            require(resumed2->model.config().to_meta() == mc.to_meta(), ErrorKind::config,
                    "resume: " + ck2.string() + " was trained with a different model config");
        }
        model::KeypointModel m2 = resumed2 ? std::move(resumed2->model) : model::KeypointModel(mc);
        const auto tc2 = cfg.train_config(cfg.stage2_epochs);
        nn::Adam opt2(m2.params(), tc2.adam);
        int first2 = 0;
        if (resumed2) {
            nn::restore_optimizer(opt2, resumed2->checkpoint);
            first2 = std::min(resumed2->epochs_done, cfg.stage2_epochs);
            result.stage2 = resumed_prefix(csv2, first2, &parse_stage2_losses);
            result.stage2_digest = resumed2->checkpoint.digest;
            log << "resuming stage 2 at epoch " << first2 << "\n";
        } else {
            m2.stats() = model::FeatureStats::fit(sp.train);
            m2.set_oracle_seed(c.keypoint_seed);
            m2.initialize(model::mean_keypoints(train));
            result.stage2_digest = model::save_keypoint(ck2, m2, &opt2, 0);
        }
        model::train_stage2(m2, opt2, train, tc2, first2, [&](const model::Stage2Loss& l) {
            result.stage2.push_back(l);
            write_file(csv2, format_stage2_losses(result.stage2));
            char line[96];
            std::snprintf(line, sizeof line, "stage2 epoch %3d  keypoints %.6f\n", l.epoch, l.keypoints);
            log << line << std::flush;
            if ((l.epoch + 1) % cfg.checkpoint_every == 0 || l.epoch + 1 == cfg.stage2_epochs)
                result.stage2_digest = model::save_keypoint(ck2, m2, &opt2, l.epoch + 1);
        });
        write_file(csv2, format_stage2_losses(result.stage2));
        const auto ev2 = model::evaluate_stage2(m2, held, tc2.execution);
        ev["keypoint_error"] = ev2.keypoint_error;
        log << "held out: keypoint error " << ev2.keypoint_error << "\n";
        outputs.insert(outputs.end(), {ck2, csv2});
    }
    write_file(dir / "heldout.json", ev.dump(2) + "\n");
    outputs.push_back(dir / "heldout.json");

    std::vector<fs::path> inputs{cdir / "corpus.json"};
    for (const auto& s : c.sequences)
        inputs.push_back(cdir / (s.id + ".frames"));
    write_manifest(dir, "train", cfg, inputs, outputs);
    return result;
}

std::string cmd_synthesize(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.audio.empty(), ErrorKind::config, "synthesize needs an audio file (--audio)");
    const fs::path dir = cfg.checkpoint_dir;
    const fs::path ck1 = dir / "stage1.ckpt", ck2 = dir / "keypoint.ckpt";
    const auto s1 = model::load_stage1(ck1);
    std::optional<model::LoadedKeypoint> s2;
    if (cfg.use_stage2)
        s2 = model::load_keypoint(ck2);

    const auto wave = audio::read_wav(cfg.audio);
    require(wave.sample_rate == audio::kSampleRate, ErrorKind::data,
            cfg.audio + ": sample rate " + std::to_string(wave.sample_rate) + ", expected 16000");
    model::SynthesisInput in;
    in.features = audio::mfcc_sequence(wave);
    require(!in.features.empty(), ErrorKind::data, cfg.audio + ": audio shorter than one frame");
    in.emotion = corpus::emotion_from_name(cfg.emotion);
    in.reference = identity_reference(cfg.seed, cfg.identity);
    in.seed = cfg.synth_seed;

    const model::Bundle b = model::synthesize(s1.model, s2 ? &s2->model : nullptr, in, s1.checkpoint.digest,
                                              s2 ? s2->checkpoint.digest : std::string{});
    const fs::path out = cfg.out_dir;
    const std::string hash = model::write_bundle(out, b);
    std::vector<fs::path> outputs = bundle_files(out);
    if (cfg.previews) {
        fs::create_directories(out / "preview");
        for (std::size_t n = 0; n < b.length(); ++n) {
            const fs::path p = out / "preview" / frame_name("frame", n, ".ppm");
            render_preview(b.relocated[n], p);
            outputs.push_back(p);
        }
    }
    std::vector<fs::path> inputs{cfg.audio, ck1};
    if (s2)
        inputs.push_back(ck2);
    write_manifest(out, "synthesize", cfg, inputs, outputs);
    log << "bundle " << out.generic_string() << ": " << b.length() << " frames, " << cfg.emotion
        << (b.keypoints.empty() ? ", no keypoints" : ", with keypoints") << ", sha256 " << hash << "\n";
    return hash;
}

metrics::MetricReport cmd_evaluate(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.pred.empty() && !cfg.gt.empty(), ErrorKind::config, "evaluate needs --pred and --gt");
    const model::Bundle pred = model::read_bundle(cfg.pred);
    const model::Bundle gt = load_reference_bundle(cfg.gt, cfg.scale_factor);
    const std::vector<metrics::BundlePair> pairs{{"pred_vs_gt", &pred, &gt}};
    const auto reports = metrics::evaluate(pairs, cfg.serial ? Execution::serial : Execution::parallel);

    const fs::path out = cfg.report_dir;
    fs::create_directories(out);
    write_file(out / "report.csv", metrics::format_csv(reports));
    write_file(out / "report.json", metrics::format_json(reports));
    std::vector<fs::path> inputs = bundle_files(cfg.pred);
    if (is_bundle_dir(cfg.gt)) {
        const auto g = bundle_files(cfg.gt);
        inputs.insert(inputs.end(), g.begin(), g.end());
    } else {
        inputs.emplace_back(cfg.gt);
    }
    write_manifest(out, "evaluate", cfg, inputs, {out / "report.csv", out / "report.json"});

    const auto& r = reports.front().report;
    char line[256];
    std::snprintf(line, sizeof line,
                  "mld %.6f  fld %.6f  dtw pitch %.4f yaw %.4f roll %.4f  gaze speed left %.4f right %.4f\n", r.mld,
                  r.fld, r.dtw_pitch, r.dtw_yaw, r.dtw_roll, r.dtw_gaze_left, r.dtw_gaze_right);
    log << line;
    return r;
}

void cmd_plot(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.input.empty(), ErrorKind::config, "plot needs --input (bundle directory or report.json)");
    const fs::path in = cfg.input;
    const fs::path out = cfg.plot_dir;
    std::vector<fs::path> outputs, inputs;

    if (is_bundle_dir(in)) {
        const model::Bundle b = model::read_bundle(in);
        require(b.length() > 0, ErrorKind::data, in.string() + ": empty bundle, nothing to plot");
        fs::create_directories(out);
        std::vector<std::vector<double>> pose(3);
        std::string csv = "frame,pitch,yaw,roll\n";
        for (std::size_t n = 0; n < b.length(); ++n) {
            const auto& p = b.poses[n];
            pose[0].push_back(p.pitch);
            pose[1].push_back(p.yaw);
            pose[2].push_back(p.roll);
            csv += csv_row({p.pitch, p.yaw, p.roll}, static_cast<long>(n));
        }
        write_file(out / "pose.csv", csv);
        line_plot(pose, {raster::kRed, raster::kGreen, raster::kBlue}, out / "pose.ppm");

        const auto d = gaze::gaze_distribution(b.gaze);
        write_file(out / "gaze_hist.csv", histogram_csv({"left", "right"}, {d.left.counts, d.right.counts}));
        bar_plot({as_doubles(d.left.counts), as_doubles(d.right.counts)}, {raster::kBlue, raster::kRed},
                 out / "gaze_hist.ppm");
        outputs = {out / "pose.csv", out / "pose.ppm", out / "gaze_hist.csv", out / "gaze_hist.ppm"};
        inputs = bundle_files(in);
    } else {
        require(fs::is_regular_file(in), ErrorKind::data, "plot input not found: " + in.string());
        json j;
        try {
            j = json::parse(read_file(in));
        } catch (const json::exception& e) {
            fail(ErrorKind::data, in.string() + ": " + e.what());
        }
        require(j.value("schema", "") == "talkface-report/1", ErrorKind::data, in.string() + ": not a metric report");
        require(!j.at("reports").empty(), ErrorKind::data, in.string() + ": empty report");
        fs::create_directories(out);
        try {
            for (const auto& r : j.at("reports")) {
                const std::string pair = r.at("pair").get<std::string>();
                const auto& g = r.at("gaze");
                std::vector<std::array<long, gaze::kZones>> cols;
                for (const char* who : {"pred", "gt"})
                    for (const char* eye : {"left", "right"})
                        cols.push_back(g.at(who).at(eye).at("counts").get<std::array<long, gaze::kZones>>());
                const fs::path csv = out / ("gaze_hist_" + pair + ".csv");
                const fs::path img = out / ("gaze_hist_" + pair + ".ppm");
                write_file(csv, histogram_csv({"pred_left", "pred_right", "gt_left", "gt_right"}, cols));
                std::vector<std::array<double, gaze::kZones>> bars;
                for (const auto& col : cols)
                    bars.push_back(as_doubles(col));
                bar_plot(bars, {raster::kBlue, raster::kRed, raster::kGreen, raster::kGrey}, img);
                outputs.insert(outputs.end(), {csv, img});
            }
        } catch (const json::exception& e) {
            fail(ErrorKind::data, in.string() + ": " + e.what());
        }
        inputs = {in};
    }
    write_manifest(out, "plot", cfg, inputs, outputs);
    log << "plots " << out.generic_string() << ": " << outputs.size() << " files\n";
}

}  // namespace talkface::cli
