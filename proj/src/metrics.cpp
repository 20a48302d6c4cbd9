#include "talkface/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <json.hpp>

#include "talkface/error.hpp"
#include "talkface/textio.hpp"

namespace talkface::metrics {

namespace {

void check_aligned(std::size_t a, std::size_t b, std::string_view what)
{
    require(a == b, ErrorKind::data,
            std::string(what) + ": sequence lengths differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
    require(a > 0, ErrorKind::data, std::string(what) + ": empty sequence");
}

std::vector<double> channel(std::span<const geometry::HeadPose> poses, double geometry::HeadPose::*field)
{
    std::vector<double> out;
    out.reserve(poses.size());
    for (const auto& p : poses)
        out.push_back(p.*field);
    return out;
}

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            return out;
        start = comma + 1;
    }
}

std::string header_line()
{
    std::string out;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i)
            out += ',';
        out += kCsvColumns[i];
    }
    return out;
}

nlohmann::json histogram_json(const gaze::GazeDistribution& d)
{
    return {{"counts", d.counts}, {"frequencies", d.frequencies}};
}

}  // namespace

double landmark_distance(std::span<const Landmarks> pred, std::span<const Landmarks> gt,
                         std::span<const std::size_t> positions)
{
    check_aligned(pred.size(), gt.size(), "landmark distance");
    require(!positions.empty(), ErrorKind::domain, "landmark distance: empty point set");
    double total = 0.0;
    for (std::size_t n = 0; n < pred.size(); ++n) {
        double frame = 0.0;
        for (std::size_t p : positions) {
            require(p < landmarks::kCount, ErrorKind::domain, "landmark distance: point position out of range");
            frame += distance(pred[n][p], gt[n][p]);
        }
        total += frame / static_cast<double>(positions.size());
    }
    return total / static_cast<double>(pred.size());
}

double mld(std::span<const Landmarks> pred, std::span<const Landmarks> gt)
{
    return landmark_distance(pred, gt, landmarks::mouth_positions());
}

double fld(std::span<const Landmarks> pred, std::span<const Landmarks> gt)
{
    static const auto all = [] {
        std::array<std::size_t, landmarks::kCount> idx{};
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = i;
        return idx;
    }();
    return landmark_distance(pred, gt, all);
}

double dtw(std::span<const double> a, std::span<const double> b)
{
    require(!a.empty() && !b.empty(), ErrorKind::domain, "dtw: empty sequence");
    // Two rolling rows over b; D[i][j] = |a_i - b_j| + min(D[i-1][j-1], D[i-1][j], D[i][j-1]).
    const std::size_t m = b.size();
    std::vector<double> prev(m), cur(m);
    prev[0] = std::abs(a[0] - b[0]);
    for (std::size_t j = 1; j < m; ++j)
        prev[j] = prev[j - 1] + std::abs(a[0] - b[j]);
    for (std::size_t i = 1; i < a.size(); ++i) {
        cur[0] = prev[0] + std::abs(a[i] - b[0]);
        for (std::size_t j = 1; j < m; ++j)
            cur[j] = std::abs(a[i] - b[j]) + std::min({prev[j - 1], prev[j], cur[j - 1]});
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

PoseDtw pose_dtw(std::span<const geometry::HeadPose> pred, std::span<const geometry::HeadPose> gt)
{
    require(!pred.empty() && !gt.empty(), ErrorKind::domain, "pose dtw: empty sequence");
    using geometry::HeadPose;
    return {dtw(channel(pred, &HeadPose::pitch), channel(gt, &HeadPose::pitch)),
            dtw(channel(pred, &HeadPose::yaw), channel(gt, &HeadPose::yaw)),
            dtw(channel(pred, &HeadPose::roll), channel(gt, &HeadPose::roll))};
}

std::vector<double> pupil_speed(std::span<const gaze::GazeLabel> labels, const gaze::EyeGrid& grid, bool left)
{
    require(labels.size() >= 2, ErrorKind::domain, "pupil speed needs at least 2 frames");
    std::vector<double> out;
    out.reserve(labels.size() - 1);
    Vec2 last = gaze::place_pupil(left ? labels[0].left : labels[0].right, grid);
    for (std::size_t n = 1; n < labels.size(); ++n) {
        const Vec2 p = gaze::place_pupil(left ? labels[n].left : labels[n].right, grid);
        out.push_back(std::hypot(p.x - last.x, p.y - last.y));
        last = p;
    }
    return out;
}

GazeDtw gaze_speed_dtw(std::span<const gaze::GazeLabel> pred, std::span<const gaze::GazeLabel> gt,
                       const gaze::EyeGrid& left_grid, const gaze::EyeGrid& right_grid)
{
    return {dtw(pupil_speed(pred, left_grid, true), pupil_speed(gt, left_grid, true)),
            dtw(pupil_speed(pred, right_grid, false), pupil_speed(gt, right_grid, false))};
}

std::array<double, 7> MetricReport::values() const
{
    return {mld, fld, dtw_pitch, dtw_yaw, dtw_roll, dtw_gaze_left, dtw_gaze_right};
}

MetricReport report(const model::Bundle& pred, const model::Bundle& gt)
{
    check_aligned(pred.length(), gt.length(), "report");
    require(pred.poses.size() == pred.length() && gt.poses.size() == gt.length() &&
                pred.gaze.size() == pred.length() && gt.gaze.size() == gt.length(),
            ErrorKind::data, "report: bundle cue sequences differ in length");

    MetricReport r;
    r.mld = mld(pred.landmarks, gt.landmarks);
    r.fld = fld(pred.landmarks, gt.landmarks);
    const PoseDtw p = pose_dtw(pred.poses, gt.poses);
    r.dtw_pitch = p.pitch;
    r.dtw_yaw = p.yaw;
    r.dtw_roll = p.roll;
    if (gt.length() >= 2) {
        const auto& ref = gt.landmarks.front();
        const GazeDtw g = gaze_speed_dtw(pred.gaze, gt.gaze, geometry::left_eye_grid(ref), geometry::right_eye_grid(ref));
        r.dtw_gaze_left = g.left;
        r.dtw_gaze_right = g.right;
    }
    r.pred_gaze = gaze::gaze_distribution(pred.gaze);
    r.gt_gaze = gaze::gaze_distribution(gt.gaze);
    for (double v : r.values())
        require(std::isfinite(v), ErrorKind::numeric, "report: non-finite metric");
    return r;
}

std::vector<NamedReport> evaluate(std::span<const BundlePair> pairs, Execution exec)
{
    std::vector<NamedReport> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        require(pairs[i].pred && pairs[i].gt, ErrorKind::usage, "evaluate: null bundle in pair " + pairs[i].name);
        out[i].name = pairs[i].name;
    }
    const long n = static_cast<long>(pairs.size());
    if (exec == Execution::serial) {
        for (long i = 0; i < n; ++i)
            out[i].report = report(*pairs[i].pred, *pairs[i].gt);
        return out;
    }

    // Exceptions cannot cross the parallel region; keep the first by index.
    std::vector<std::exception_ptr> errors(pairs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            out[i].report = report(*pairs[i].pred, *pairs[i].gt);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

std::string format_csv(std::span<const NamedReport> reports)
{
    std::string out = header_line() + '\n';
    for (const auto& r : reports) {
        require(!r.name.empty() && r.name.find_first_of(",\n\r") == std::string::npos, ErrorKind::data,
                "report name must be non-empty without commas or newlines");
        out += r.name;
        for (double v : r.report.values()) {
            out += ',';
            textio::append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

std::vector<NamedReport> parse_csv(std::string_view text, const std::string& name)
{
    const auto rows = textio::lines(text, name);
    require(!rows.empty() && rows.front().text == header_line(), ErrorKind::data, name + ":1: bad report header (byte 0)");
    std::vector<NamedReport> out;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto& row = rows[k];
        if (row.text.empty())
            continue;
        const auto cells = split_commas(row.text);
        const std::string where = name + ":" + std::to_string(row.number) + ": ";
        require(cells.size() == kCsvColumns.size(), ErrorKind::data,
                where + "expected " + std::to_string(kCsvColumns.size()) + " columns (byte " +
                    std::to_string(row.offset) + ")");
        NamedReport r;
        r.name = std::string(cells[0]);
        std::array<double, 7> v{};
        std::size_t at = row.offset + cells[0].size() + 1;
        for (std::size_t c = 0; c < v.size(); ++c) {
            require(textio::parse_double(cells[c + 1], v[c]) && std::isfinite(v[c]) && v[c] >= 0.0, ErrorKind::data,
                    where + "bad value for " + std::string(kCsvColumns[c + 1]) + " (byte " + std::to_string(at) + ")");
            at += cells[c + 1].size() + 1;
        }
        auto& m = r.report;
        m.mld = v[0];
        m.fld = v[1];
        m.dtw_pitch = v[2];
        m.dtw_yaw = v[3];
        m.dtw_roll = v[4];
        m.dtw_gaze_left = v[5];
        m.dtw_gaze_right = v[6];
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_json(std::span<const NamedReport> reports)
{
    nlohmann::json root;
    root["schema"] = "talkface-report/1";
    root["columns"] = std::vector<std::string>(kCsvColumns.begin() + 1, kCsvColumns.end());
    auto& list = root["reports"] = nlohmann::json::array();
    for (const auto& [name, r] : reports) {
        nlohmann::json j;
        j["pair"] = name;
        const auto v = r.values();
        for (std::size_t c = 0; c < v.size(); ++c)
            j[std::string(kCsvColumns[c + 1])] = v[c];
        j["gaze"] = {
            {"pred", {{"left", histogram_json(r.pred_gaze.left)}, {"right", histogram_json(r.pred_gaze.right)}}},
            {"gt", {{"left", histogram_json(r.gt_gaze.left)}, {"right", histogram_json(r.gt_gaze.right)}}},
            {"l1_left", histogram_l1(r.pred_gaze.left, r.gt_gaze.left)},
            {"l1_right", histogram_l1(r.pred_gaze.right, r.gt_gaze.right)},
        };
        list.push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

double histogram_l1(const gaze::GazeDistribution& a, const gaze::GazeDistribution& b)
{
    double s = 0.0;
    for (std::size_t z = 0; z < a.frequencies.size(); ++z)
        s += std::abs(a.frequencies[z] - b.frequencies[z]);
    return s;
}

}  // namespace talkface::metrics
