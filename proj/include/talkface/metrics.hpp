#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "talkface/gaze.hpp"
#include "talkface/geometry.hpp"
#include "talkface/parallel.hpp"
#include "talkface/sequentializers.hpp"

namespace talkface::metrics {

using geometry::Landmarks;

/// Mean Euclidean distance over frames and the given point positions.
/// Data error on length mismatch or an empty sequence.
double landmark_distance(std::span<const Landmarks> pred, std::span<const Landmarks> gt,
                         std::span<const std::size_t> positions);
/// Mouth landmark distance over the lip rings.
double mld(std::span<const Landmarks> pred, std::span<const Landmarks> gt);
/// Face landmark distance over all 147 points.
double fld(std::span<const Landmarks> pred, std::span<const Landmarks> gt);

/// Classic DTW with |a_i - b_j| cost and match/insert/delete steps. Total
/// cost, no window and no length normalization. Domain error on empty input.
double dtw(std::span<const double> a, std::span<const double> b);

struct PoseDtw {
    double pitch = 0.0;
    double yaw = 0.0;
    double roll = 0.0;
};

PoseDtw pose_dtw(std::span<const geometry::HeadPose> pred, std::span<const geometry::HeadPose> gt);

/// Per-frame pupil displacement; length is labels.size() - 1.
std::vector<double> pupil_speed(std::span<const gaze::GazeLabel> labels, const gaze::EyeGrid& grid, bool left);

struct GazeDtw {
    double left = 0.0;
    double right = 0.0;
};

/// DTW between pupil speed sequences. Both inputs need at least 2 frames.
GazeDtw gaze_speed_dtw(std::span<const gaze::GazeLabel> pred, std::span<const gaze::GazeLabel> gt,
                       const gaze::EyeGrid& left_grid, const gaze::EyeGrid& right_grid);

struct MetricReport {
    double mld = 0.0;
    double fld = 0.0;
    double dtw_pitch = 0.0;
    double dtw_yaw = 0.0;
    double dtw_roll = 0.0;
    double dtw_gaze_left = 0.0;
    double dtw_gaze_right = 0.0;
    gaze::EyeDistributions pred_gaze;
    gaze::EyeDistributions gt_gaze;

    /// The seven scalar columns in CSV order.
    std::array<double, 7> values() const;
};

/// Column order of the CSV report; the first column is the pair name.
inline constexpr std::array<std::string_view, 8> kCsvColumns = {
    "pair", "mld", "fld", "dtw_pitch", "dtw_yaw", "dtw_roll", "dtw_gaze_left", "dtw_gaze_right"};

/// Compares two aligned bundles. Eye grids come from the first ground-truth
/// frame. Data error when lengths differ.
MetricReport report(const model::Bundle& pred, const model::Bundle& gt);

struct NamedReport {
    std::string name;
    MetricReport report;
};

struct BundlePair {
    std::string name;
    const model::Bundle* pred = nullptr;
    const model::Bundle* gt = nullptr;
};

/// One report per pair, in input order. The parallel path distributes pairs
/// over threads and matches the serial path bit for bit.
std::vector<NamedReport> evaluate(std::span<const BundlePair> pairs, Execution exec = Execution::parallel);

/// Scalars round-trip exactly through format_csv / parse_csv. Histograms are
/// only in the JSON form.
std::string format_csv(std::span<const NamedReport> reports);
std::vector<NamedReport> parse_csv(std::string_view text, const std::string& name);
std::string format_json(std::span<const NamedReport> reports);

/// L1 distance between two zone frequency histograms (0 to 2).
double histogram_l1(const gaze::GazeDistribution& a, const gaze::GazeDistribution& b);

}  // namespace talkface::metrics
