#include <doctest.h>

#include <random>
#include <vector>

#include "support.hpp"
#include "talkface/error.hpp"
#include "talkface/gaze.hpp"

using namespace talkface;
using namespace talkface::gaze;

namespace {

const std::vector<Vec2> kUnitSquare = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
const EyeGrid kUnit = build_eye_grid(kUnitSquare);

}  // namespace

TEST_CASE("unit square grid")
{
    CHECK(kUnit.x_min == 0.0);
    CHECK(kUnit.x_max == 1.0);
    CHECK(kUnit.y_min == 0.0);
    CHECK(kUnit.y_max == 1.0);
    CHECK(kUnit.cell_width() == doctest::Approx(0.2));
    CHECK(kUnit.cell_height() == doctest::Approx(0.5));
}

TEST_CASE("degenerate rings are geometry errors")
{
    const std::vector<Vec2> collinear = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK(support::error_kind([&] { build_eye_grid(collinear); }) == ErrorKind::geometry);
    const std::vector<Vec2> flat = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    CHECK(support::error_kind([&] { build_eye_grid(flat); }) == ErrorKind::geometry);
    const std::vector<Vec2> three = {{0, 0}, {1, 0}, {1, 1}};
    CHECK(support::error_kind([&] { build_eye_grid(three); }) == ErrorKind::geometry);
}

TEST_CASE("grid is translation equivariant")
{
    std::vector<Vec2> moved;
    for (Vec2 p : kUnitSquare)
        moved.push_back({p.x + 5, p.y + 5});
    const EyeGrid g = build_eye_grid(moved);
    CHECK(g.x_min == 5.0);
    CHECK(g.x_max == 6.0);
    CHECK(g.y_min == 5.0);
    CHECK(g.y_max == 6.0);
    CHECK(g.cell_width() == doctest::Approx(kUnit.cell_width()));
    CHECK(g.cell_height() == doctest::Approx(kUnit.cell_height()));
}

TEST_CASE("assign_zone containment, tie-break and clamping")
{
    CHECK(assign_zone({0.5, 0.25}, kUnit) == 2);
    CHECK(assign_zone({0.2, 0.25}, kUnit) == 0);
    CHECK(assign_zone({-7, -7}, kUnit) == 0);
    CHECK(assign_zone({7, 7}, kUnit) == 9);
    CHECK(assign_zone({0.5, 0.5}, kUnit) == kCenterZone);
    CHECK(assign_zone({0.9, 0.75}, kUnit) == 9);
}

TEST_CASE("assign_zone is translation equivariant with its grid")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.5, 1.5), shift(-50, 50);
    for (int t = 0; t < 1000; ++t) {
        // grid-aligned offsets keep boundaries exactly representable
        const double dx = std::round(shift(rng)) * 0.25, dy = std::round(shift(rng)) * 0.25;
        std::vector<Vec2> moved;
        for (Vec2 p : kUnitSquare)
            moved.push_back({p.x + dx, p.y + dy});
        const Vec2 p{u(rng), u(rng)};
        CHECK(assign_zone({p.x + dx, p.y + dy}, build_eye_grid(moved)) == assign_zone(p, kUnit));
    }
}

TEST_CASE("place_pupil returns cell centres and inverts assign_zone")
{
    const Vec2 z0 = place_pupil(0, kUnit);
    CHECK(z0.x == doctest::Approx(0.1));
    CHECK(z0.y == doctest::Approx(0.25));
    const Vec2 z9 = place_pupil(9, kUnit);
    CHECK(z9.x == doctest::Approx(0.9));
    CHECK(z9.y == doctest::Approx(0.75));
    const EyeGrid skewed{-0.3, 0.17, 2.0, 2.04};
    for (int z = 0; z < kZones; ++z) {
        CHECK(assign_zone(place_pupil(z, kUnit), kUnit) == z);
        CHECK(assign_zone(place_pupil(z, skewed), skewed) == z);
    }
    CHECK(support::error_kind([] { place_pupil(10, kUnit); }) == ErrorKind::domain);
}

TEST_CASE("joint codec examples")
{
    CHECK(encode_joint(3, 7) == 73);
    CHECK(decode_joint(73) == GazeLabel{3, 7, 73});
    CHECK(encode_joint(0, 0) == 0);
    CHECK(support::error_kind([] { encode_joint(10, 0); }) == ErrorKind::domain);
    CHECK(support::error_kind([] { encode_joint(0, -1); }) == ErrorKind::domain);
    CHECK(support::error_kind([] { decode_joint(100); }) == ErrorKind::domain);
}

TEST_CASE("joint codec is a bijection over all 100 pairs")
{
    std::vector<int> hits(kJointClasses, 0);
    for (int l = 0; l < kZones; ++l)
        for (int r = 0; r < kZones; ++r) {
            const int v = encode_joint(l, r);
            REQUIRE(v >= 0);
            REQUIRE(v < kJointClasses);
            ++hits[static_cast<std::size_t>(v)];
            const GazeLabel d = decode_joint(v);
            CHECK(d.left == l);
            CHECK(d.right == r);
        }
    for (int h : hits)
        CHECK(h == 1);
}

TEST_CASE("validate catches an inconsistent joint index")
{
    CHECK_NOTHROW(validate(make_label(4, 6)));
    CHECK(support::error_kind([] { validate(GazeLabel{4, 6, 65}); }) == ErrorKind::data);
}

TEST_CASE("classify_gaze examples")
{
    std::vector<double> p(kJointClasses, 0.0);
    p[73] = 1.0;
    CHECK(classify_gaze(p) == GazeLabel{3, 7, 73});
    std::fill(p.begin(), p.end(), 0.01);
    CHECK(classify_gaze(p) == GazeLabel{0, 0, 0});
    std::fill(p.begin(), p.end(), 0.0);
    p[99] = 0.6;
    p[5] = 0.4;
    CHECK(classify_gaze(p) == GazeLabel{9, 9, 99});
}

TEST_CASE("classify_gaze rejects malformed vectors")
{
    std::vector<double> p(kJointClasses, 0.02);
    CHECK(support::error_kind([&] { classify_gaze(p); }) == ErrorKind::domain);
    p.assign(99, 1.0 / 99);
    CHECK(support::error_kind([&] { classify_gaze(p); }) == ErrorKind::domain);
    p.assign(kJointClasses, 0.0);
    p[0] = 1.5;
    p[1] = -0.5;
    CHECK(support::error_kind([&] { classify_gaze(p); }) == ErrorKind::domain);
}

TEST_CASE("argmax is invariant under positive rescaling")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1), c(1e-3, 1e3);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> p(kJointClasses);
        for (double& x : p)
            x = u(rng);
        const int before = argmax_class(p);
        const double k = c(rng);
        for (double& x : p)
            x *= k;
        CHECK(argmax_class(p) == before);
    }
}

TEST_CASE("gaze_distribution examples")
{
    const std::vector<GazeLabel> same(10, make_label(5, 5));
    const auto d = gaze_distribution(same);
    CHECK(d.left.frequencies[5] == 1.0);
    CHECK(d.right.counts[5] == 10);

    std::vector<GazeLabel> each;
    for (int z = 0; z < kZones; ++z)
        each.push_back(make_label(z, kZones - 1 - z));
    const auto u = gaze_distribution(each);
    for (int z = 0; z < kZones; ++z) {
        CHECK(u.left.frequencies[z] == doctest::Approx(0.1));
        CHECK(u.right.frequencies[z] == doctest::Approx(0.1));
    }
    CHECK(support::error_kind([] { gaze_distribution(std::vector<GazeLabel>{}); }) == ErrorKind::domain);
}

TEST_CASE("gaze_distribution matches a counting oracle")
{
    std::mt19937_64 rng(12);
    std::vector<GazeLabel> labels;
    int left[kZones] = {}, right[kZones] = {};
    for (int i = 0; i < 1000; ++i) {
        const int v = static_cast<int>(rng() % kJointClasses);
        labels.push_back(decode_joint(v));
        ++left[v % 10];
        ++right[v / 10];
    }
    const auto d = gaze_distribution(labels);
    double sl = 0.0, sr = 0.0;
    for (int z = 0; z < kZones; ++z) {
        CHECK(d.left.counts[z] == left[z]);
        CHECK(d.right.counts[z] == right[z]);
        CHECK(d.left.frequencies[z] == left[z] / 1000.0);
        sl += d.left.frequencies[z];
        sr += d.right.frequencies[z];
    }
    CHECK(std::abs(sl - 1.0) < 1e-9);
    CHECK(std::abs(sr - 1.0) < 1e-9);
}
