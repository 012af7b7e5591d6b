#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "p2pbeam/clustering.hpp"
#include "p2pbeam/errors.hpp"

using namespace p2pbeam;

namespace {

std::vector<RadarPoint> ball(std::mt19937_64& rng, Vec3 c, double r, int n, double doppler = 0.2) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<RadarPoint> out;
  while (static_cast<int>(out.size()) < n) {
    const Vec3 d(u(rng), u(rng), u(rng));
    if (d.norm() > 1.0) continue;
    const Vec3 p = c + r * d;
    out.push_back({p.x(), p.y(), p.z(), doppler});
  }
  return out;
}

std::vector<std::vector<std::size_t>> members(const DbscanResult& r) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : r.clusters) out.push_back(c.member_indices);
  return out;
}

}  // namespace

TEST(Dbscan, EmptyInput) {
  const auto r = dbscan({}, DbscanParams{});
  EXPECT_TRUE(r.clusters.empty());
  EXPECT_TRUE(r.noise.empty());
}

TEST(Dbscan, OneBallAndOneOutlier) {
  std::mt19937_64 rng(1);
  auto pts = ball(rng, Vec3::Zero(), 0.05, 150);
  pts.push_back({10.0, 10.0, 0.0, 0.0});
  const auto r = dbscan(pts, {0.3, 100});
  ASSERT_EQ(r.clusters.size(), 1u);
  EXPECT_EQ(r.clusters[0].point_count, 150u);
  ASSERT_EQ(r.noise.size(), 1u);
  EXPECT_EQ(r.noise[0], 150u);
  EXPECT_EQ(oracle::as_set_of_sets(members(r)), oracle::as_set_of_sets(oracle::dbscan(pts, 0.3, 100)));
}

TEST(Dbscan, TwoGroupsLabelledInScanOrder) {
  std::mt19937_64 rng(2);
  auto a = ball(rng, Vec3(0, 0, 0), 0.1, 120);
  auto b = ball(rng, Vec3(5, 0, 0), 0.1, 120);
  // Interleave so group b's first point precedes most of a's.
  std::vector<RadarPoint> pts;
  pts.push_back(b[0]);
  pts.insert(pts.end(), a.begin(), a.end());
  pts.insert(pts.end(), b.begin() + 1, b.end());
  const auto r = dbscan(pts, {0.3, 100});
  ASSERT_EQ(r.clusters.size(), 2u);
  EXPECT_EQ(r.clusters[0].label, 0);
  EXPECT_EQ(r.clusters[1].label, 1);
  EXPECT_EQ(r.clusters[0].member_indices.front(), 0u);  // b was scanned first
  EXPECT_NEAR(r.clusters[0].core_point.x(), 5.0, 0.05);
  EXPECT_NEAR(r.clusters[1].core_point.x(), 0.0, 0.05);
}

TEST(Dbscan, CorePointIsPlanarCentroid) {
  std::vector<RadarPoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({0.01 * i, 1.0, 0.1 * (i % 3), 0.5});
  const auto r = dbscan(pts, {0.3, 3});
  ASSERT_EQ(r.clusters.size(), 1u);
  EXPECT_NEAR(r.clusters[0].core_point.x(), 0.045, 1e-12);
  EXPECT_NEAR(r.clusters[0].core_point.y(), 1.0, 1e-12);
}

TEST(Dbscan, UsesThreeDimensionalDistance) {
  // Same (x, y), separated in z beyond eps: two clusters, not one.
  std::vector<RadarPoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({0.0, 0.0, 0.0, 0.1});
  for (int i = 0; i < 5; ++i) pts.push_back({0.0, 0.0, 1.0, 0.1});
  EXPECT_EQ(dbscan(pts, {0.3, 5}).clusters.size(), 2u);
}

TEST(Dbscan, BorderPointJoinsFirstDiscoveredCluster) {
  // Two separate dense groups; the point at x = 0.25 reaches the core points of
  // both but is not core itself (7 neighbours < 8).
  std::vector<RadarPoint> pts;
  for (int i = 0; i < 3; ++i) pts.push_back({0.0, 0.0, 0.0, 0.1});
  for (int i = 0; i < 4; ++i) pts.push_back({-0.2, 0.0, 0.0, 0.1});
  for (int i = 0; i < 3; ++i) pts.push_back({0.5, 0.0, 0.0, 0.1});
  for (int i = 0; i < 4; ++i) pts.push_back({0.7, 0.0, 0.0, 0.1});
  pts.push_back({0.25, 0.0, 0.0, 0.1});
  const auto r = dbscan(pts, {0.3, 8});
  ASSERT_EQ(r.clusters.size(), 2u);
  EXPECT_EQ(r.clusters[0].point_count, 8u);
  EXPECT_EQ(r.clusters[0].member_indices.back(), 14u);
  EXPECT_EQ(r.clusters[1].point_count, 7u);
  EXPECT_EQ(members(r), oracle::dbscan(pts, 0.3, 8));
}

TEST(Dbscan, InvalidParams) {
  EXPECT_THROW(dbscan({}, {0.0, 10}), ValidationError);
  EXPECT_THROW(dbscan({}, {0.3, 0}), ValidationError);
}

TEST(Dbscan, PartitionAndOracleEquivalenceOnRandomFrames) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pts = oracle::random_frame(rng, 300);
    std::uniform_int_distribution<int> mp(3, 25);
    std::uniform_real_distribution<double> eps(0.1, 0.5);
    const DbscanParams params{eps(rng), mp(rng)};
    const auto r = dbscan(pts, params);
    std::size_t total = r.noise.size();
    for (const auto& c : r.clusters) {
      total += c.point_count;
      EXPECT_EQ(c.point_count, c.member_indices.size());
    }
    EXPECT_EQ(total, pts.size());
    // Ordered equality is stronger than the set-of-sets requirement: labels must follow scan order too.
    EXPECT_EQ(members(r), oracle::dbscan(pts, params.eps, params.min_pts)) << "trial " << trial;
  }
}

TEST(Dbscan, SameInputSameLabels) {
  std::mt19937_64 rng(77);
  const auto pts = oracle::random_frame(rng, 300);
  const auto a = dbscan(pts, {0.3, 8});
  const auto b = dbscan(pts, {0.3, 8});
  ASSERT_EQ(a.clusters.size(), b.clusters.size());
  for (std::size_t i = 0; i < a.clusters.size(); ++i) EXPECT_EQ(a.clusters[i].member_indices, b.clusters[i].member_indices);
}

TEST(FilterBackground, DropsAllZeroDopplerCluster) {
  Cluster c;
  c.max_abs_doppler_mps = 0.0;
  const std::vector<Cluster> in{c};
  EXPECT_TRUE(filter_background(in, 1e-3).empty());
}

TEST(FilterBackground, KeepsClusterWithOneMovingPoint) {
  std::vector<RadarPoint> pts(10, RadarPoint{0.0, 1.0, 0.0, 0.0});
  pts[7].doppler_mps = 0.3;
  const auto r = dbscan(pts, {0.3, 5});
  ASSERT_EQ(r.clusters.size(), 1u);
  const auto kept = filter_background(r.clusters, 1e-3);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].member_indices, r.clusters[0].member_indices);
  EXPECT_EQ(kept[0].core_point, r.clusters[0].core_point);
}

TEST(FilterBackground, EmptyAndMonotone) {
  EXPECT_TRUE(filter_background({}, 1e-3).empty());
  std::mt19937_64 rng(5);
  const auto pts = oracle::random_frame(rng, 300);
  const auto r = dbscan(pts, {0.3, 5});
  const auto kept = filter_background(r.clusters, 1e-3);
  EXPECT_LE(kept.size(), r.clusters.size());
  for (const auto& k : kept) {
    const auto& orig = r.clusters[static_cast<std::size_t>(k.label)];
    EXPECT_EQ(k.member_indices, orig.member_indices);
    EXPECT_EQ(k.mean_doppler_mps, orig.mean_doppler_mps);
  }
}
