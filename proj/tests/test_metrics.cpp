#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "radarsr/errors.hpp"
#include "radarsr/metrics.hpp"

using namespace radarsr;

namespace {

using Rng = std::mt19937_64;

PointCloud cloud2(std::initializer_list<std::pair<double, double>> xy) {
  PointCloud c;
  for (auto [x, y] : xy) c.points.push_back({x, y, 0.0, std::nullopt});
  return c;
}

PointCloud random_cloud(std::size_t n, Rng& rng, double extent = 10.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({u(rng), u(rng), u(rng), std::nullopt});
  return c;
}

}  // namespace

TEST(NnDists, IdenticalCloudsAreZero) {
  Rng rng(1);
  const PointCloud a = random_cloud(100, rng);
  for (double d : nn_dists(a, a, Dims::k3D)) EXPECT_EQ(d, 0.0);
}

TEST(NnDists, ThreeFourFive) {
  const auto d = nn_dists(cloud2({{0, 0}}), cloud2({{3, 4}}), Dims::k2D);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], 5.0);
}

TEST(NnDists, TwoDimensionalIgnoresHeight) {
  PointCloud a = cloud2({{0, 0}}), b = cloud2({{0, 1}});
  b.points[0].z = 100.0;
  EXPECT_EQ(nn_dists(a, b, Dims::k2D)[0], 1.0);
  EXPECT_NEAR(nn_dists(a, b, Dims::k3D)[0], std::hypot(1.0, 100.0), 1e-12);
}

TEST(NnDists, KdTreeEqualsBruteForceExactly) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud a = random_cloud(500, rng), b = random_cloud(500, rng);
    for (Dims dims : {Dims::k2D, Dims::k3D}) {
      ASSERT_EQ(nn_dists(a, b, dims, NnMethod::kKdTree), nn_dists(a, b, dims, NnMethod::kBruteForce))
          << "trial " << trial;
    }
  }
}

TEST(NnDists, KdTreeHandlesDuplicatesAndLattices) {
  PointCloud b;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      b.points.push_back({double(i), double(j), 0.0, std::nullopt});
      b.points.push_back({double(i), double(j), 0.0, std::nullopt});
    }
  }
  Rng rng(3);
  const PointCloud a = random_cloud(300, rng, 6.0);
  EXPECT_EQ(nn_dists(a, b, Dims::k3D, NnMethod::kKdTree), nn_dists(a, b, Dims::k3D, NnMethod::kBruteForce));
}

TEST(NnDists, EmptyReferenceThrows) {
  EXPECT_THROW(nn_dists(cloud2({{0, 0}}), PointCloud{}, Dims::k2D), EmptyReference);
  EXPECT_THROW(nn_dists(cloud2({{0, 0}}), PointCloud{}, Dims::k2D, NnMethod::kBruteForce), EmptyReference);
  EXPECT_TRUE(nn_dists(PointCloud{}, cloud2({{0, 0}}), Dims::k2D).empty());
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 9, 2}), 3.0);
  EXPECT_THROW(median({}), EmptyCloud);
}

TEST(Chamfer, HandValues) {
  EXPECT_EQ(chamfer(cloud2({{0, 0}}), cloud2({{1, 0}}), Dims::k2D), 1.0);
  // a->b: {1}; b->a: {1, 10} -> (1 + 5.5) / 2.
  EXPECT_EQ(chamfer(cloud2({{0, 0}}), cloud2({{1, 0}, {10, 0}}), Dims::k2D), 3.25);
}

TEST(Chamfer, UnitTranslationBoundedByOne) {
  PointCloud a;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) a.points.push_back({3.0 * i, 3.0 * j, 0.5 * i, std::nullopt});
  }
  const PointCloud b = transform(a, RigidTransform(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.6, 0.8, 0.0)));
  const double cd = chamfer(a, b, Dims::k3D);
  EXPECT_LE(cd, 1.0 + 1e-12);
  EXPECT_NEAR(cd, 1.0, 1e-12);
}

TEST(Mhd, HandValue) { EXPECT_EQ(mhd(cloud2({{0, 0}}), cloud2({{1, 0}, {10, 0}}), Dims::k2D), 3.25); }

TEST(Mhd, SingleOutlierShiftsMedianByAtMostOnePosition) {
  Rng rng(4);
  const PointCloud b = random_cloud(200, rng);
  PointCloud a = random_cloud(100, rng);
  std::vector<double> before = nn_dists(a, b, Dims::k3D);
  std::sort(before.begin(), before.end());
  a.points.push_back({1e6, 1e6, 1e6, std::nullopt});
  const double m = median(nn_dists(a, b, Dims::k3D));
  // n = 101 -> the median is element 50 of the new sorted list, which lies between old elements 49 and 50.
  EXPECT_GE(m, before[49]);
  EXPECT_LE(m, before[50]);
}

TEST(Unidirectional, HandValuesAndDirection) {
  EXPECT_EQ(ucd(cloud2({{0, 0}}), cloud2({{2, 0}}), Dims::k2D), 2.0);
  EXPECT_EQ(umhd(cloud2({{0, 0}}), cloud2({{2, 0}}), Dims::k2D), 2.0);
  const PointCloud lidar = cloud2({{0, 0}}), enhanced = cloud2({{0, 0}, {10, 0}});
  EXPECT_EQ(ucd(lidar, enhanced, Dims::k2D), 0.0);
  EXPECT_EQ(ucd(enhanced, lidar, Dims::k2D), 5.0);
}

TEST(Unidirectional, SupersetAndExtrasDoNotMatter) {
  Rng rng(5);
  const PointCloud lidar = random_cloud(200, rng);
  PointCloud enhanced = lidar;
  EXPECT_EQ(ucd(lidar, enhanced, Dims::k3D), 0.0);
  const PointCloud extra = random_cloud(500, rng, 50.0);
  enhanced.points.insert(enhanced.points.end(), extra.points.begin(), extra.points.end());
  EXPECT_EQ(ucd(lidar, enhanced, Dims::k3D), 0.0);
  EXPECT_EQ(umhd(lidar, enhanced, Dims::k3D), 0.0);
}

TEST(Metrics, SymmetryIdentityAndEquivariance) {
  Rng rng(6);
  const PointCloud a = random_cloud(300, rng), b = random_cloud(250, rng);
  for (Dims dims : {Dims::k2D, Dims::k3D}) {
    EXPECT_EQ(chamfer(a, b, dims), chamfer(b, a, dims));
    EXPECT_EQ(mhd(a, b, dims), mhd(b, a, dims));
    const MetricReport self = evaluate_metrics(a, a, dims);
    EXPECT_EQ(self.cd + self.mhd + self.ucd + self.umhd, 0.0);
  }
  EXPECT_NE(ucd(a, b, Dims::k3D), ucd(b, a, Dims::k3D));
  const RigidTransform T = RigidTransform::from_euler_deg(33, -12, 8, {1.5, -2.0, 0.7});
  const MetricReport before = evaluate_metrics(a, b, Dims::k3D);
  const MetricReport after = evaluate_metrics(transform(a, T), transform(b, T), Dims::k3D);
  EXPECT_NEAR(before.cd, after.cd, 1e-9);
  EXPECT_NEAR(before.mhd, after.mhd, 1e-9);
  EXPECT_NEAR(before.ucd, after.ucd, 1e-9);
  EXPECT_NEAR(before.umhd, after.umhd, 1e-9);
}

TEST(Metrics, EvaluateMatchesIndividualFunctions) {
  Rng rng(7);
  const PointCloud a = random_cloud(120, rng), b = random_cloud(90, rng);
  const MetricReport r = evaluate_metrics(a, b, Dims::k2D);
  EXPECT_EQ(r.cd, chamfer(a, b, Dims::k2D));
  EXPECT_EQ(r.mhd, mhd(a, b, Dims::k2D));
  EXPECT_EQ(r.ucd, ucd(a, b, Dims::k2D));
  EXPECT_EQ(r.umhd, umhd(a, b, Dims::k2D));
  EXPECT_EQ(r.dims, Dims::k2D);
}

TEST(Metrics, EmptyCloudsThrow) {
  const PointCloud a = cloud2({{0, 0}});
  EXPECT_THROW(chamfer(a, PointCloud{}, Dims::k2D), EmptyCloud);
  EXPECT_THROW(mhd(PointCloud{}, a, Dims::k2D), EmptyCloud);
  EXPECT_THROW(ucd(PointCloud{}, a, Dims::k2D), EmptyCloud);
  EXPECT_THROW(evaluate_metrics(a, PointCloud{}, Dims::k3D), EmptyCloud);
}

TEST(MetricsCsv, HeaderAndRow) {
  std::ostringstream os;
  write_metrics_csv(os, {{"run", {0.5, 0.25, 0.125, 1.0, Dims::k3D}}});
  EXPECT_EQ(os.str(), "name,dims,CD,MHD,UCD,UMHD\nrun,3D,0.5,0.25,0.125,1\n");
}
