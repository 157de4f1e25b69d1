#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "pcrk/fitter.hpp"
#include "pcrk/metrics.hpp"

using namespace pcrk;

namespace {

std::set<std::tuple<double, double, double>> point_set(const PointCloud& cloud) {
  std::set<std::tuple<double, double, double>> s;
  for (const auto& p : cloud.points) s.insert({p.x(), p.y(), p.z()});
  return s;
}

}  // namespace

TEST_SUITE("fitter") {

TEST_CASE("init_points on the sphere has unit norms") {
  SeededRng rng(1);
  const PointCloud cloud = init_points(500, InitMode::UnitSphere, rng);
  REQUIRE(cloud.size() == 500);
  for (const auto& p : cloud.points) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("init_points in the cube stays inside the centered unit cube") {
  SeededRng rng(2);
  const PointCloud cloud = init_points(500, InitMode::UnitCube, rng);
  REQUIRE(cloud.size() == 500);
  for (const auto& p : cloud.points) {
    CHECK(p.cwiseAbs().maxCoeff() <= 0.5);
    CHECK(p.cwiseAbs().maxCoeff() >= 0.0);
  }
}

TEST_CASE("init_points from a cloud draws only source points") {
  SeededRng make(3);
  const PointCloud source = testutil::random_cloud(80, make);
  const auto source_set = point_set(source);
  SeededRng rng(4);
  const PointCloud picked = init_points(30, InitMode::FromCloud, rng, &source);
  REQUIRE(picked.size() == 30);
  for (const auto& p : picked.points)
    CHECK(source_set.count({p.x(), p.y(), p.z()}) == 1);
}

TEST_CASE("init_points validation") {
  SeededRng rng(5);
  CHECK_THROWS_AS(init_points(10, InitMode::FromCloud, rng, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(init_points(0, InitMode::UnitSphere, rng), std::invalid_argument);
}

TEST_CASE("init_points is seed-deterministic") {
  SeededRng a(17), b(17);
  const PointCloud pa = init_points(64, InitMode::UnitSphere, a);
  const PointCloud pb = init_points(64, InitMode::UnitSphere, b);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa.points[i] == pb.points[i]);
}

TEST_CASE("fit collapses a few points onto a single target") {
  PointCloud target;
  target.points.push_back({1, 2, 3});
  FitConfig cfg;
  cfg.n_points = 4;
  cfg.max_iters = 3000;
  cfg.lr = 0.01;
  cfg.weights = {1.0, 0.0, 0.0};
  cfg.seed = 11;
  const FitTrace trace = fit(target, nullptr, nullptr, cfg);
  REQUIRE(trace.final_cloud.size() == 4);
  for (const auto& p : trace.final_cloud.points)
    CHECK((p - Eigen::Vector3d(1, 2, 3)).norm() < 1e-3);
  CHECK(trace.final_total <= trace.iterations.front().total);
}

TEST_CASE("fit starting at the target stays at zero loss") {
  SeededRng rng(6);
  const PointCloud target = testutil::random_cloud(32, rng);
  FitConfig cfg;
  cfg.n_points = 32;
  cfg.max_iters = 50;
  cfg.lr = 0.01;
  cfg.weights = {1.0, 0.0, 0.0};
  const FitTrace trace = fit(target, nullptr, nullptr, cfg, &target);
  CHECK(trace.iterations.front().total == 0.0);
  CHECK(trace.final_total == 0.0);
}

TEST_CASE("fit loss is almost always non-increasing on a convex instance") {
  PointCloud target;
  target.points.push_back({0.25, -0.5, 0.75});
  FitConfig cfg;
  cfg.n_points = 3;
  cfg.max_iters = 400;
  cfg.lr = 0.01;
  cfg.weights = {1.0, 0.0, 0.0};
  cfg.seed = 2;
  const FitTrace trace = fit(target, nullptr, nullptr, cfg);
  REQUIRE(trace.iterations.size() > 20);
  std::size_t increases = 0, steps = 0;
  for (std::size_t i = 11; i < trace.iterations.size(); ++i) {
    ++steps;
    if (trace.iterations[i].total > trace.iterations[i - 1].total + 1e-12) ++increases;
  }
  CHECK(increases * 20 <= steps);  // at most 5% of steps move uphill
  CHECK(trace.final_total < 1e-3 * trace.iterations.front().total);
}

TEST_CASE("fit is deterministic for a fixed seed") {
  SeededRng rng(8);
  const PointCloud target = testutil::cube_surface_cloud(64, rng);
  FitConfig cfg;
  cfg.n_points = 32;
  cfg.max_iters = 60;
  cfg.lr = 0.005;
  cfg.seed = 21;
  const FitTrace a = fit(target, nullptr, nullptr, cfg);
  const FitTrace b = fit(target, nullptr, nullptr, cfg);
  REQUIRE(a.final_cloud.size() == b.final_cloud.size());
  for (std::size_t i = 0; i < a.final_cloud.size(); ++i)
    CHECK(a.final_cloud.points[i] == b.final_cloud.points[i]);
  CHECK(a.final_total == b.final_total);
  REQUIRE(a.iterations.size() == b.iterations.size());
  CHECK(a.iterations.back().total == b.iterations.back().total);
}

TEST_CASE("fit reports divergence with the last finite state attached") {
  SeededRng rng(9);
  const PointCloud target = testutil::random_cloud(16, rng);
  FitConfig cfg;
  cfg.n_points = 8;
  cfg.max_iters = 200;
  // the first update flings every coordinate to ~1e200, so the next
  // evaluation overflows to infinity
  cfg.lr = 1e200;
  cfg.seed = 3;
  CHECK_THROWS_AS(fit(target, nullptr, nullptr, cfg), FitDivergence);
  try {
    fit(target, nullptr, nullptr, cfg);
  } catch (const FitDivergence& e) {
    CHECK(all_finite(e.trace.final_cloud));
    CHECK(std::isfinite(e.trace.final_total));
  }
}

TEST_CASE("fold_upsample quadruples the cloud and children average to parents") {
  SeededRng rng(10);
  const PointCloud cloud = testutil::random_cloud(25, rng);
  std::vector<Eigen::Vector3d> normals;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Eigen::Vector3d n(rng.normal(), rng.normal(), rng.normal());
    normals.push_back(n.normalized());
  }
  const PointCloud up = fold_upsample(cloud, &normals, 0.08);
  REQUIRE(up.size() == 4 * cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t c = 0; c < 4; ++c) mean += up.points[4 * i + c];
    mean /= 4.0;
    CHECK((mean - cloud.points[i]).norm() < 1e-12);
  }
}

TEST_CASE("fold_upsample with a z normal keeps the z coordinate") {
  PointCloud cloud;
  cloud.points.push_back({0.5, -0.25, 2.0});
  std::vector<Eigen::Vector3d> normals{{0, 0, 1}};
  const PointCloud up = fold_upsample(cloud, &normals, 0.1);
  REQUIRE(up.size() == 4);
  for (const auto& p : up.points) CHECK(p.z() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fold_upsample without normals offsets along x and y") {
  PointCloud cloud;
  cloud.points.push_back({0, 0, 0});
  const PointCloud up = fold_upsample(cloud, nullptr, 0.1);
  REQUIRE(up.size() == 4);
  const auto got = point_set(up);
  const std::set<std::tuple<double, double, double>> want = {
      {-0.025, -0.025, 0.0}, {-0.025, 0.025, 0.0}, {0.025, -0.025, 0.0}, {0.025, 0.025, 0.0}};
  CHECK(got == want);
}

TEST_CASE("fold_upsample validation") {
  PointCloud cloud;
  cloud.points.push_back({0, 0, 0});
  CHECK_THROWS_AS(fold_upsample(cloud, nullptr, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fold_upsample(cloud, nullptr, -1.0), std::invalid_argument);
  std::vector<Eigen::Vector3d> wrong_count{{0, 0, 1}, {0, 0, 1}};
  CHECK_THROWS_AS(fold_upsample(cloud, &wrong_count, 0.1), std::invalid_argument);
  std::vector<Eigen::Vector3d> not_unit{{0, 0, 2}};
  CHECK_THROWS_AS(fold_upsample(cloud, &not_unit, 0.1), std::invalid_argument);
}

}  // TEST_SUITE
