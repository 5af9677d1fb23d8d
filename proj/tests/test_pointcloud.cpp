#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "radarsr/errors.hpp"
#include "radarsr/pointcloud.hpp"
#include "radarsr/pointcloud_io.hpp"

using namespace radarsr;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed, bool intensity = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    Point3 p{u(rng), u(rng), u(rng), std::nullopt};
    if (intensity) p.intensity = std::abs(u(rng));
    c.points.push_back(p);
  }
  return c;
}

RigidTransform random_transform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-180.0, 180.0), t(-5.0, 5.0);
  return RigidTransform::from_euler_deg(ang(rng), ang(rng) / 2, ang(rng), {t(rng), t(rng), t(rng)});
}

}  // namespace

TEST(Transform, IdentityLeavesCloudUnchanged) {
  const PointCloud c = random_cloud(50, 1, true);
  EXPECT_EQ(transform(c, RigidTransform::identity()), c);
}

TEST(Transform, YawQuarterTurnMapsXToY) {
  PointCloud c;
  c.points.push_back({1.0, 0.0, 0.0, 0.7});
  const PointCloud out = transform(c, RigidTransform::from_euler_deg(90.0, 0.0, 0.0));
  EXPECT_NEAR(out.points[0].x, 0.0, 1e-12);
  EXPECT_NEAR(out.points[0].y, 1.0, 1e-12);
  EXPECT_NEAR(out.points[0].z, 0.0, 1e-12);
  EXPECT_EQ(out.points[0].intensity, 0.7);
}

TEST(Transform, RoundTripThroughInverse) {
  std::mt19937_64 rng(7);
  const PointCloud c = random_cloud(100, 2);
  const RigidTransform T = random_transform(rng);
  const PointCloud back = transform(transform(c, T), T.inverse());
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR((back.points[i].position() - c.points[i].position()).norm(), 0.0, 1e-9);
  }
}

TEST(Transform, PreservesPairwiseDistances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud c = random_cloud(30, 100 + trial);
    const PointCloud out = transform(c, random_transform(rng));
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        const double before = (c.points[i].position() - c.points[j].position()).norm();
        const double after = (out.points[i].position() - out.points[j].position()).norm();
        ASSERT_NEAR(before, after, 1e-9);
      }
    }
  }
}

TEST(RigidTransform, CompositionAndInverse) {
  std::mt19937_64 rng(3);
  const RigidTransform a = random_transform(rng), b = random_transform(rng);
  const Eigen::Vector3d p(0.3, -2.0, 1.5);
  EXPECT_NEAR(((a * b).apply(p) - a.apply(b.apply(p))).norm(), 0.0, 1e-12);
  const RigidTransform id = a * a.inverse();
  EXPECT_NEAR((id.rotation() - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(id.translation().norm(), 0.0, 1e-12);
  const Eigen::Matrix3d R = (a * b).rotation();
  EXPECT_NEAR((R.transpose() * R - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-9);
}

TEST(RigidTransform, RejectsReflection) {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  R(2, 2) = -1.0;
  EXPECT_THROW(RigidTransform(R, Eigen::Vector3d::Zero()), ValidationError);
}

namespace {

// Flat ground sampled on a grid (optionally pitched) plus a box whose
// points all sit between z = 0.5 and z = 1.5 above the ground.
struct LabeledScene {
  PointCloud cloud;
  std::size_t ground_count = 0;
};

LabeledScene ground_and_box(double pitch_deg) {
  LabeledScene s;
  const RigidTransform tilt = RigidTransform::from_euler_deg(0.0, pitch_deg, 0.0);
  for (double x = -10; x <= 10; x += 0.25) {
    for (double y = -10; y <= 10; y += 0.25) {
      const Eigen::Vector3d p = tilt.apply({x, y, 0.0});
      s.cloud.points.push_back({p.x(), p.y(), p.z(), std::nullopt});
    }
  }
  s.ground_count = s.cloud.size();
  for (double x = 2; x <= 4; x += 0.1) {
    for (double y = 2; y <= 3; y += 0.1) {
      for (double z = 0.5; z <= 1.5 + 1e-9; z += 0.25) {
        const Eigen::Vector3d p = tilt.apply({x, y, z});
        s.cloud.points.push_back({p.x(), p.y(), p.z(), std::nullopt});
      }
    }
  }
  return s;
}

}  // namespace

TEST(RemoveGround, FlatPlaneLeavesOnlyBox) {
  const LabeledScene s = ground_and_box(0.0);
  const PointCloud out = remove_ground(s.cloud);
  ASSERT_EQ(out.size(), s.cloud.size() - s.ground_count);
  for (const auto& p : out.points) EXPECT_GE(p.z, 0.5 - 1e-9);
}

TEST(RemoveGround, TiltedPlaneRemovesGroundKeepsBox) {
  const LabeledScene s = ground_and_box(5.0);
  const PointCloud out = remove_ground(s.cloud);
  const std::size_t box_count = s.cloud.size() - s.ground_count;
  // Box points are the tail of the input; output preserves order.
  std::size_t kept_box = 0, kept_ground = 0;
  for (const auto& p : out.points) {
    const bool is_box = std::find(s.cloud.points.begin() + static_cast<std::ptrdiff_t>(s.ground_count),
                                  s.cloud.points.end(), p) != s.cloud.points.end();
    (is_box ? kept_box : kept_ground)++;
  }
  EXPECT_EQ(kept_box, box_count);
  EXPECT_LE(static_cast<double>(kept_ground), 0.01 * static_cast<double>(s.ground_count));
}

TEST(RemoveGround, NoGroundWithPassthroughReturnsInput) {
  PointCloud c;
  for (int i = 0; i < 50; ++i) c.points.push_back({0.0, 0.0, 0.1 * i, std::nullopt});  // a vertical pole
  GroundCfg cfg;
  cfg.passthrough_on_failure = true;
  EXPECT_EQ(remove_ground(c, cfg), c);
  cfg.passthrough_on_failure = false;
  EXPECT_THROW(remove_ground(c, cfg), PlaneFitFailure);
}

TEST(RemoveGround, OutputIsSubsetAndNeverLarger) {
  const LabeledScene s = ground_and_box(2.0);
  const PointCloud out = remove_ground(s.cloud);
  EXPECT_LE(out.size(), s.cloud.size());
  for (const auto& p : out.points) {
    EXPECT_NE(std::find(s.cloud.points.begin(), s.cloud.points.end(), p), s.cloud.points.end());
  }
}

TEST(RemoveGround, EmptyCloudIsAnError) { EXPECT_THROW(remove_ground(PointCloud{}), EmptyCloud); }

TEST(FilterFov, CenterKeptSideDropped) {
  PointCloud c;
  c.points.push_back({0.0, 1.0, 0.0, std::nullopt});
  c.points.push_back({1.0, 0.0, 0.0, std::nullopt});
  const PointCloud out = filter_fov(c, 30.0, 150.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.points[0].y, 1.0);
}

TEST(FilterFov, RingCountIncludesBoundaries) {
  PointCloud ring;
  for (int k = 0; k < 360; ++k) {
    const double a = (k - 180) * std::numbers::pi / 180.0;  // yaw in [-180, 180)
    ring.points.push_back({std::cos(a), std::sin(a), 0.0, std::nullopt});
  }
  EXPECT_EQ(filter_fov(ring, 30.0, 150.0).size(), 121u);
}

TEST(FilterFov, Idempotent) {
  const PointCloud c = random_cloud(500, 5);
  const PointCloud once = filter_fov(c, 30.0, 150.0);
  EXPECT_EQ(filter_fov(once, 30.0, 150.0), once);
}

TEST(FilterFov, RejectsInvertedRange) { EXPECT_THROW(filter_fov(PointCloud{}, 10.0, 10.0), ValidationError); }

TEST(Aggregate, SingleIdentityFrame) {
  const PointCloud c = random_cloud(10, 9);
  EXPECT_EQ(aggregate({{c, RigidTransform::identity()}}).points, c.points);
}

TEST(Aggregate, CountIsSumOfFrames) {
  const PointCloud a = random_cloud(10, 1), b = random_cloud(17, 2);
  EXPECT_EQ(aggregate({{a, RigidTransform::identity()}, {a, RigidTransform::identity()}}).size(), 20u);
  std::mt19937_64 rng(1);
  EXPECT_EQ(aggregate({{a, random_transform(rng)}, {b, random_transform(rng)}}).size(), 27u);
}

TEST(Aggregate, CarriesIntensity) {
  const PointCloud a = random_cloud(5, 1, true);
  const PointCloud out = aggregate({{a, RigidTransform::from_euler_deg(10, 0, 0)}});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(out.points[i].intensity, a.points[i].intensity);
}

TEST(CloudIo, TextRoundTripIsExact) {
  for (bool intensity : {false, true}) {
    const PointCloud c = random_cloud(200, 21, intensity);
    std::stringstream ss;
    write_cloud_text(ss, c);
    EXPECT_EQ(read_cloud_text(ss).points, c.points);
  }
}

TEST(CloudIo, TextSkipsCommentsAndRejectsGarbage) {
  std::istringstream ok("# header\n1 2 3\n\n4 5 6 0.5 # trailing\n");
  const PointCloud c = read_cloud_text(ok);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[1].intensity, 0.5);
  std::istringstream bad("1 2\n");
  EXPECT_THROW(read_cloud_text(bad), FormatError);
  std::istringstream nan("1 nan 3\n");
  EXPECT_THROW(read_cloud_text(nan), FormatError);
}

TEST(CloudIo, BinaryRoundTripIsBitExact) {
  for (bool intensity : {false, true}) {
    // Values representable in float32 survive exactly.
    PointCloud c = random_cloud(100, 31, intensity);
    for (auto& p : c.points) {
      p.x = static_cast<float>(p.x);
      p.y = static_cast<float>(p.y);
      p.z = static_cast<float>(p.z);
      if (p.intensity) p.intensity = static_cast<float>(*p.intensity);
    }
    std::stringstream ss;
    write_cloud_binary(ss, c);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "PCB1");
    EXPECT_EQ(bytes.size(), 8 + c.size() * (intensity ? 16 : 12));
    const PointCloud back = read_cloud_binary(ss);
    EXPECT_EQ(back.points, c.points);
    std::stringstream again;
    write_cloud_binary(again, back);
    EXPECT_EQ(again.str(), bytes);
  }
}

TEST(CloudIo, BinaryRejectsBadInput) {
  std::istringstream bad_magic("PCB2\0\0\0\0");
  EXPECT_THROW(read_cloud_binary(bad_magic), FormatError);
  std::string truncated = "PCB1";
  truncated += std::string("\x02\0\0\0", 4) + std::string(12, '\0');
  std::istringstream tr(truncated);
  EXPECT_THROW(read_cloud_binary(tr), FormatError);
}
