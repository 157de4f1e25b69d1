#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "pcrk/eval.hpp"
#include "pcrk/metrics.hpp"
#include "pcrk/rng.hpp"

using namespace pcrk;

namespace {

Eigen::Matrix3d rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d m;
  m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return m;
}

// 4x4x4 grid centered on the origin, spacing 0.5. The wide spacing keeps
// nearest-neighbor matches unambiguous under small transforms.
PointCloud centered_grid() {
  const double coords[] = {-0.75, -0.25, 0.25, 0.75};
  PointCloud cloud;
  for (double x : coords)
    for (double y : coords)
      for (double z : coords) cloud.points.push_back(Eigen::Vector3d(x, y, z));
  return cloud;
}

PointCloud transformed(const PointCloud& cloud, double scale, const Eigen::Matrix3d& R,
                       const Eigen::Vector3d& t) {
  PointCloud out;
  for (const auto& p : cloud.points) out.points.push_back(scale * (R * p) + t);
  return out;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("icp on an already aligned pair stays near the identity") {
  SeededRng make(3);
  const PointCloud cloud = testutil::random_cloud(50, make);
  const IcpResult res = icp(cloud, cloud, IcpMode::Full);
  CHECK((res.R - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  CHECK(res.t.norm() < 1e-9);
  CHECK(res.residual < 1e-9);
  REQUIRE(res.iterations >= 1);
  CHECK(res.residual_history.size() == static_cast<std::size_t>(res.iterations));
  CHECK(res.residual == res.residual_history.back());
}

TEST_CASE("translation-only icp recovers a small shift and never touches R") {
  const PointCloud source = centered_grid();
  const Eigen::Vector3d shift(0.05, -0.03, 0.08);
  const PointCloud target = transformed(source, 1.0, Eigen::Matrix3d::Identity(), shift);
  const IcpResult res = icp(source, target, IcpMode::TranslationOnly);
  CHECK(res.R == Eigen::Matrix3d::Identity());
  CHECK((res.t - shift).norm() < 1e-12);
  CHECK(res.residual < 1e-12);
  REQUIRE(!res.residual_history.empty());
  for (std::size_t k = 1; k < res.residual_history.size(); ++k)
    CHECK(res.residual_history[k] <= res.residual_history[k - 1] + 1e-12);
}

TEST_CASE("full icp recovers a ten degree rotation") {
  const PointCloud source = centered_grid();
  const Eigen::Matrix3d R10 = rot_z(10.0 * std::numbers::pi / 180.0);
  const PointCloud target = transformed(source, 1.0, R10, Eigen::Vector3d::Zero());
  const IcpResult res = icp(source, target, IcpMode::Full);
  CHECK((res.R - R10).norm() < 1e-9);
  CHECK(res.t.norm() < 1e-9);
  CHECK(res.residual < 1e-12);
}

TEST_CASE("full icp reduces the residual on a misaligned random pair") {
  SeededRng make(7);
  const PointCloud source = testutil::random_cloud(80, make);
  const PointCloud target =
      transformed(source, 1.0, rot_z(0.1), Eigen::Vector3d(0.15, -0.1, 0.12));
  const IcpResult res = icp(source, target, IcpMode::Full);
  REQUIRE(res.iterations >= 1);
  REQUIRE(res.residual_history.size() == static_cast<std::size_t>(res.iterations));
  CHECK(res.residual == res.residual_history.back());
  CHECK(res.residual <= res.residual_history.front() + 1e-12);
  CHECK(res.residual < 0.2);
}

TEST_CASE("full icp rejects a degenerate correspondence covariance") {
  PointCloud line;
  for (int i = 0; i < 6; ++i) line.points.push_back(Eigen::Vector3d(0.1 * i, 0.0, 0.0));
  CHECK_THROWS_WITH_AS(icp(line, line, IcpMode::Full),
                       doctest::Contains("degenerate correspondence covariance"),
                       std::runtime_error);
}

TEST_CASE("icp input validation") {
  SeededRng make(5);
  const PointCloud cloud = testutil::random_cloud(12, make);
  PointCloud two;
  two.points = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)};
  CHECK_THROWS_WITH_AS(icp(two, cloud, IcpMode::Full), doctest::Contains("too few points"),
                       std::invalid_argument);
  PointCloud empty;
  CHECK_THROWS_WITH_AS(icp(empty, cloud, IcpMode::TranslationOnly),
                       doctest::Contains("too few points"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(icp(cloud, cloud, IcpMode::Full, 0), doctest::Contains("max_iters"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(icp(cloud, cloud, IcpMode::Full, 10, -1.0), doctest::Contains("tol"),
                       std::invalid_argument);
  PointCloud bad = cloud;
  bad.points[3].y() = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(icp(bad, cloud, IcpMode::Full), doctest::Contains("non-finite"),
                       std::invalid_argument);
}

TEST_CASE("protocol factory presets") {
  const Protocol vc = Protocol::viewer_centered();
  CHECK(vc.kind == Protocol::Kind::ViewerCentered);
  CHECK(vc.n == 2466);
  CHECK(vc.chamfer_linear == false);
  CHECK(vc.pre_rotation == Eigen::Matrix3d::Identity());
  const Protocol oc = Protocol::object_centered();
  CHECK(oc.kind == Protocol::Kind::ObjectCentered);
  CHECK(oc.n == 1024);
  const Eigen::Matrix3d R = rot_z(0.4);
  const Protocol px = Protocol::pix3d(R, 512);
  CHECK(px.kind == Protocol::Kind::Pix3D);
  CHECK(px.n == 512);
  CHECK(px.pre_rotation == R);
}

TEST_CASE("viewer-centered evaluation of identical clouds is exactly zero") {
  SeededRng make(11);
  const PointCloud cloud = testutil::random_cloud(100, make);
  SeededRng er(5);
  const EvalRecord rec = evaluate(cloud, cloud, Protocol::viewer_centered(64), er);
  CHECK(rec.cd == 0.0);
  CHECK(rec.emd == 0.0);
  CHECK(rec.sample_id == 0);
  CHECK(rec.protocol.kind == Protocol::Kind::ViewerCentered);
  CHECK(rec.protocol.n == 64);
}

TEST_CASE("object-centered evaluation removes a similarity transform") {
  SeededRng make(21);
  const PointCloud gt = testutil::random_cloud(300, make);
  const PointCloud pred =
      transformed(gt, 1.7, Eigen::Matrix3d::Identity(), Eigen::Vector3d(3.0, 1.0, -2.0));
  SeededRng er(8);
  const EvalRecord rec = evaluate(pred, gt, Protocol::object_centered(256), er);
  CHECK(rec.cd < 1e-12);
  CHECK(rec.emd < 1e-6);
}

TEST_CASE("pix3d evaluation applies the pre-rotation to the reference cloud") {
  SeededRng make(31);
  const PointCloud gt = testutil::random_cloud(200, make);
  const Eigen::Matrix3d R30 = rot_z(30.0 * std::numbers::pi / 180.0);
  const PointCloud pred = transformed(gt, 1.0, R30, Eigen::Vector3d::Zero());
  SeededRng right(9);
  const EvalRecord ok = evaluate(pred, gt, Protocol::pix3d(R30, 128), right);
  CHECK(ok.cd == 0.0);
  CHECK(ok.emd == 0.0);
  SeededRng wrong(9);
  const EvalRecord off =
      evaluate(pred, gt, Protocol::pix3d(Eigen::Matrix3d::Identity(), 128), wrong);
  CHECK(off.cd > 1e-3);
}

TEST_CASE("pix3d evaluation undoes a translation of the prediction") {
  SeededRng make(35);
  const PointCloud gt = testutil::random_cloud(200, make);
  const PointCloud pred = transformed(gt, 1.0, Eigen::Matrix3d::Identity(),
                                      Eigen::Vector3d(0.5, -0.25, 0.75));
  SeededRng er(4);
  const EvalRecord rec = evaluate(pred, gt, Protocol::pix3d(Eigen::Matrix3d::Identity(), 128), er);
  CHECK(rec.cd < 1e-12);
  CHECK(rec.emd < 1e-6);
}

TEST_CASE("object-centered scores ignore a similarity transform of the prediction") {
  SeededRng ma(41), mb(42);
  const PointCloud pred = testutil::random_cloud(300, ma);
  const PointCloud gt = testutil::random_cloud(300, mb);
  SeededRng e1(14);
  const EvalRecord base = evaluate(pred, gt, Protocol::object_centered(256), e1);
  const PointCloud moved =
      transformed(pred, 0.37, Eigen::Matrix3d::Identity(), Eigen::Vector3d(-5.0, 2.0, 9.0));
  SeededRng e2(14);
  const EvalRecord rec = evaluate(moved, gt, Protocol::object_centered(256), e2);
  CHECK(base.cd > 0.0);
  CHECK(base.emd > 0.0);
  CHECK(std::abs(rec.cd - base.cd) < 1e-9);
  CHECK(std::abs(rec.emd - base.emd) < 5e-3);
}

TEST_CASE("chamfer flag switches the distance between squared and linear") {
  SeededRng ma(51), mb(52);
  const PointCloud pred = testutil::random_cloud(48, ma);
  const PointCloud gt = testutil::random_cloud(48, mb);
  const Protocol sq = Protocol::viewer_centered(48);
  Protocol lin = sq;
  lin.chamfer_linear = true;
  SeededRng e1(6), e2(6);
  const EvalRecord rs = evaluate(pred, gt, sq, e1);
  const EvalRecord rl = evaluate(pred, gt, lin, e2);
  CHECK(rs.cd == doctest::Approx(chamfer(pred, gt)).epsilon(1e-12));
  CHECK(rl.cd == doctest::Approx(chamfer_linear(pred, gt)).epsilon(1e-12));
  CHECK(rs.cd != rl.cd);
}

TEST_CASE("evaluate input validation") {
  SeededRng make(61);
  const PointCloud cloud = testutil::random_cloud(20, make);
  PointCloud empty;
  SeededRng er(1);
  CHECK_THROWS_WITH_AS(evaluate(empty, cloud, Protocol::viewer_centered(8), er),
                       doctest::Contains("empty cloud"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(evaluate(cloud, empty, Protocol::viewer_centered(8), er),
                       doctest::Contains("empty cloud"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(evaluate(cloud, cloud, Protocol::viewer_centered(0), er),
                       doctest::Contains("sample count"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      evaluate(cloud, cloud, Protocol::pix3d(2.0 * Eigen::Matrix3d::Identity(), 8), er),
      doctest::Contains("not a rotation"), std::invalid_argument);
}

TEST_CASE("evaluate_batch matches a direct per-sample evaluation") {
  SeededRng ma(71), mb(72);
  const PointCloud pred = testutil::random_cloud(40, ma);
  const PointCloud gt = testutil::random_cloud(40, mb);
  const Protocol proto = Protocol::viewer_centered(32);
  SeededRng batch_rng(99);
  const BatchResult batch = evaluate_batch({{pred, gt}}, proto, batch_rng);
  REQUIRE(batch.records.size() == 1);
  REQUIRE(batch.failures.empty());
  SeededRng replay(99);
  SeededRng per(replay.next_u64());
  const EvalRecord direct = evaluate(pred, gt, proto, per);
  CHECK(batch.records[0].cd == direct.cd);
  CHECK(batch.records[0].emd == direct.emd);
  CHECK(batch.records[0].sample_id == 0);
  CHECK(batch.mean_cd == batch.records[0].cd);
  CHECK(batch.mean_emd == batch.records[0].emd);
}

TEST_CASE("evaluate_batch records failures and averages the successes") {
  SeededRng ma(81), mb(82), mc(83);
  const PointCloud a = testutil::random_cloud(40, ma);
  const PointCloud b = testutil::random_cloud(40, mb);
  const PointCloud c = testutil::random_cloud(40, mc);
  PointCloud empty;
  SeededRng rng(123);
  const BatchResult batch =
      evaluate_batch({{a, b}, {empty, b}, {c, b}}, Protocol::viewer_centered(32), rng);
  REQUIRE(batch.records.size() == 2);
  REQUIRE(batch.failures.size() == 1);
  CHECK(batch.records[0].sample_id == 0);
  CHECK(batch.records[1].sample_id == 2);
  CHECK(batch.failures[0].sample_id == 1);
  CHECK(batch.failures[0].message.find("empty cloud") != std::string::npos);
  CHECK(batch.mean_cd == (batch.records[0].cd + batch.records[1].cd) / 2.0);
  CHECK(batch.mean_emd == (batch.records[0].emd + batch.records[1].emd) / 2.0);
}

TEST_CASE("evaluate_batch with no survivors reports NaN means") {
  PointCloud empty;
  SeededRng make(91);
  const PointCloud cloud = testutil::random_cloud(10, make);
  SeededRng rng(7);
  const BatchResult batch =
      evaluate_batch({{empty, cloud}, {empty, cloud}}, Protocol::viewer_centered(8), rng);
  CHECK(batch.records.empty());
  CHECK(batch.failures.size() == 2);
  CHECK(std::isnan(batch.mean_cd));
  CHECK(std::isnan(batch.mean_emd));
}

TEST_CASE("evaluate_batch is deterministic for a fixed seed") {
  SeededRng ma(95), mb(96);
  const PointCloud pred = testutil::random_cloud(40, ma);
  const PointCloud gt = testutil::random_cloud(40, mb);
  const std::vector<std::pair<PointCloud, PointCloud>> pairs = {{pred, gt}, {gt, pred}};
  const Protocol proto = Protocol::viewer_centered(32);
  SeededRng r1(1234), r2(1234);
  const BatchResult b1 = evaluate_batch(pairs, proto, r1);
  const BatchResult b2 = evaluate_batch(pairs, proto, r2);
  REQUIRE(b1.records.size() == b2.records.size());
  for (std::size_t i = 0; i < b1.records.size(); ++i) {
    CHECK(b1.records[i].cd == b2.records[i].cd);
    CHECK(b1.records[i].emd == b2.records[i].emd);
  }
  CHECK(b1.mean_cd == b2.mean_cd);
  CHECK(b1.mean_emd == b2.mean_emd);
}

TEST_CASE("evaluate_batch rejects an empty pair list") {
  SeededRng rng(1);
  CHECK_THROWS_WITH_AS(evaluate_batch({}, Protocol::viewer_centered(8), rng),
                       doctest::Contains("empty pair list"), std::invalid_argument);
}

}
