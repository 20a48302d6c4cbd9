#include "talkface/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "talkface/error.hpp"

namespace talkface::geometry {

namespace {

void check_finite(const Landmarks& points, const char* what)
{
    for (const Vec3& p : points)
        require(is_finite(p), ErrorKind::numeric, std::string("non-finite point in ") + what);
}

void check_pose(const HeadPose& pose)
{
    require(std::isfinite(pose.yaw) && std::isfinite(pose.pitch) && std::isfinite(pose.roll) &&
                is_finite(pose.translation),
            ErrorKind::numeric, "non-finite head pose");
}

std::array<Vec2, 16> ring_xy(const Landmarks& points, landmarks::Range ring)
{
    std::array<Vec2, 16> out{};
    for (std::size_t i = 0; i < ring.count; ++i)
        out[i] = {points[ring.first + i].x, points[ring.first + i].y};
    return out;
}

RotationMatrix multiply(const RotationMatrix& a, const RotationMatrix& b)
{
    RotationMatrix out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += a(r, k) * b(k, c);
            out.m[static_cast<std::size_t>(r * 3 + c)] = s;
        }
    return out;
}

void shift_iris(Landmarks& points, landmarks::Range iris, Vec2 target)
{
    const Vec3 center = points[iris.first];
    const Vec3 delta{target.x - center.x, target.y - center.y, 0.0};
    for (std::size_t i = 0; i < iris.count; ++i)
        points[iris.first + i] += delta;
}

}  // namespace

std::array<double, 6> HeadPose::to_array() const
{
    return {yaw, pitch, roll, translation.x, translation.y, translation.z};
}

HeadPose HeadPose::from_array(std::span<const double> v)
{
    require(v.size() == 6, ErrorKind::structural, "head pose needs 6 values");
    return {v[0], v[1], v[2], {v[3], v[4], v[5]}};
}

Vec3 RotationMatrix::apply(Vec3 v) const
{
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

RotationMatrix RotationMatrix::transpose() const
{
    return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
}

double RotationMatrix::determinant() const
{
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

double wrap_angle(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double k = std::ceil((a - std::numbers::pi) / two_pi);
    double w = a - k * two_pi;
    if (w <= -std::numbers::pi)
        w += two_pi;
    return w;
}

Landmarks select_147(std::span<const Vec3> raw)
{
    require(raw.size() == landmarks::kRawCount, ErrorKind::structural,
            "expected 478 raw landmarks, got " + std::to_string(raw.size()));
    Landmarks out{};
    for (std::size_t j = 0; j < landmarks::kCount; ++j)
        out[j] = raw[static_cast<std::size_t>(landmarks::kMeshIndex[j])];
    return out;
}

Landmarks select_147(const RawLandmarkFrame& raw)
{
    return select_147(std::span<const Vec3>(raw.points));
}

RotationMatrix euler_to_rotation(double yaw, double pitch, double roll)
{
    require(std::isfinite(yaw) && std::isfinite(pitch) && std::isfinite(roll), ErrorKind::numeric,
            "non-finite Euler angle");
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cr = std::cos(roll), sr = std::sin(roll);
    const RotationMatrix rz{{cr, -sr, 0, sr, cr, 0, 0, 0, 1}};
    const RotationMatrix ry{{cy, 0, sy, 0, 1, 0, -sy, 0, cy}};
    const RotationMatrix rx{{1, 0, 0, 0, cp, -sp, 0, sp, cp}};
    return multiply(multiply(rz, ry), rx);
}

RotationMatrix rotation(const HeadPose& pose)
{
    return euler_to_rotation(pose.yaw, pose.pitch, pose.roll);
}

double face_width(const Landmarks& points)
{
    return distance(points[landmarks::kLeftCheek], points[landmarks::kRightCheek]);
}

NormalizedLandmarkFrame normalize_frame(const Landmarks& frame, const HeadPose& pose, double canonical_width)
{
    require(std::isfinite(canonical_width) && canonical_width > 0.0, ErrorKind::domain,
            "canonical width must be positive");
    check_finite(frame, "frame");
    check_pose(pose);
    const double width = face_width(frame);
    require(width > 1e-12, ErrorKind::geometry, "degenerate face: zero inter-cheek width");

    const Vec3 nose = frame[landmarks::kNoseTip];
    const RotationMatrix inverse = rotation(pose).transpose();
    const double s = canonical_width / width;
    NormalizedLandmarkFrame out;
    out.canonical_width = canonical_width;
    for (std::size_t i = 0; i < frame.size(); ++i)
        out.points[i] = s * inverse.apply(frame[i] - nose);
    out.points[landmarks::kNoseTip] = {};
    return out;
}

gaze::EyeGrid left_eye_grid(const Landmarks& points)
{
    const auto ring = ring_xy(points, landmarks::kLeftEyeRing);
    return gaze::build_eye_grid(ring);
}

gaze::EyeGrid right_eye_grid(const Landmarks& points)
{
    const auto ring = ring_xy(points, landmarks::kRightEyeRing);
    return gaze::build_eye_grid(ring);
}

Landmarks place_pupils(const Landmarks& points, const gaze::GazeLabel& label)
{
    gaze::validate(label);
    Landmarks out = points;
    shift_iris(out, landmarks::kLeftIris, gaze::place_pupil(label.left, left_eye_grid(points)));
    shift_iris(out, landmarks::kRightIris, gaze::place_pupil(label.right, right_eye_grid(points)));
    return out;
}

RelocatedLandmarkFrame relocate(const NormalizedLandmarkFrame& norm, const HeadPose& pose,
                                const gaze::GazeLabel& label, double scale_factor)
{
    require(std::isfinite(scale_factor) && scale_factor > 0.0, ErrorKind::domain, "scale factor must be positive");
    check_finite(norm.points, "normalized frame");
    check_pose(pose);

    const Landmarks placed = place_pupils(norm.points, label);
    const RotationMatrix m = rotation(pose);
    RelocatedLandmarkFrame out;
    out.source_pose = pose;
    out.source_gaze = label;
    for (std::size_t i = 0; i < placed.size(); ++i)
        out.points[i] = scale_factor * m.apply(placed[i]) + pose.translation;
    return out;
}

gaze::GazeLabel measure_gaze(const Landmarks& points)
{
    const Vec3 l = points[landmarks::kLeftIrisCenter];
    const Vec3 r = points[landmarks::kRightIrisCenter];
    return gaze::make_label(gaze::assign_zone({l.x, l.y}, left_eye_grid(points)),
                            gaze::assign_zone({r.x, r.y}, right_eye_grid(points)));
}

double eye_opening(const Landmarks& points)
{
    using namespace landmarks;
    return 0.5 * (distance(points[kLeftUpperLidMid], points[kLeftLowerLidMid]) +
                  distance(points[kRightUpperLidMid], points[kRightLowerLidMid]));
}

NormalizedLandmarkFrame renormalize(const Landmarks& points, double canonical_width)
{
    return normalize_frame(points, HeadPose{}, canonical_width);
}

}  // namespace talkface::geometry
