#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "fcm/experiments.hpp"

using namespace fcm;
using namespace fcm::experiments;

namespace {

ScenarioConfig small_sweep() {
  ScenarioConfig cfg;
  cfg.h = 1.0 / 8.0;
  cfg.order = 2;
  cfg.angles = 6;
  return cfg;
}

}  // namespace

TEST_CASE("log-log slope fit") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 1; i <= 8; ++i) pts.emplace_back(0.5 * i, 0.25 * i * i);
  const Slope s = fit_loglog_slope(pts);
  CHECK(std::abs(s.slope - 2.0) <= 1e-9);
  CHECK(s.points == 8);
  CHECK(s.stderr_ < 1e-9);

  for (auto& p : pts) p.second = 3.0;
  CHECK(std::abs(fit_loglog_slope(pts).slope) <= 1e-12);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  pts.clear();
  for (int i = 0; i < 40; ++i) {
    const double x = std::pow(10.0, -6.0 + 5.0 * i / 39.0);
    pts.emplace_back(x, 7.0 * std::pow(x, -4.0) * (1.0 + noise(rng)));
  }
  CHECK(std::abs(fit_loglog_slope(pts).slope + 4.0) <= 0.05);

  pts.resize(4);
  CHECK_THROWS_AS(fit_loglog_slope(pts), std::invalid_argument);
  CHECK_NOTHROW(fit_loglog_slope(pts, 3));
  pts[0].second = 0.0;
  CHECK_THROWS_AS(fit_loglog_slope(pts, 3), std::invalid_argument);
}

TEST_CASE("scenario configuration validation") {
  ScenarioConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = [](auto mutate) {
    ScenarioConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](auto& c) { c.scenario = "torus"; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.order = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.h = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.angles = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.gamma = 1.5; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.cg_rel_tol = -1.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.beta_multiplier = 0.0; }).validate(), std::invalid_argument);
}

TEST_CASE("rotating square geometry and angle grid") {
  const ScenarioConfig cfg = small_sweep();
  const auto a = sweep_angles(cfg);
  REQUIRE(a.size() == 6);
  CHECK(a.front() == 0.0);
  CHECK(a.back() == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-15));
  CHECK(rotating_square_radius(1.0 / 32.0, 5e-3) ==
        doctest::Approx(std::sqrt(0.125 - std::sqrt(2.5e-3) / 32.0)).epsilon(1e-15));
  // hole interior and square exterior are outside
  const auto d = rotating_square_domain(0.3, cfg.h, cfg.eta_r);
  CHECK_FALSE(d.inside({0.0, 0.0}));
  CHECK(d.inside({0.0, 0.45}));
  CHECK_FALSE(d.inside({0.0, 0.7}));
}

TEST_CASE("sweep records are deterministic and within their bounds") {
  const ScenarioConfig cfg = small_sweep();
  const SweepResult r1 = run_rotating_square(cfg);
  const SweepResult r2 = run_rotating_square(cfg);
  std::ostringstream c1, c2;
  write_sweep_csv(c1, r1.records);
  write_sweep_csv(c2, r2.records);
  CHECK(c1.str() == c2.str());
  CHECK(c1.str().rfind("angle,eta,kappa_orig,kappa_scaled,kappa_sipic,fillin,elims,cg_orig,cg_sipic\n", 0) == 0);

  REQUIRE(r1.records.size() == 6);
  CHECK_FALSE(r1.any_flagged());
  for (const auto& rec : r1.records) {
    CAPTURE(rec.angle);
    CHECK(rec.eta > 0.0);
    CHECK(rec.eta <= 1.15 * cfg.eta_r);  // the exclusion is sized to give about eta_r
    REQUIRE(rec.kappa_orig);
    REQUIRE(rec.kappa_sipic);
    CHECK(*rec.kappa_orig >= 1.0);
    CHECK(*rec.kappa_sipic >= 1.0);
    CHECK(*rec.kappa_sipic <= *rec.kappa_orig);
    REQUIRE(rec.cg_sipic);
    CHECK(*rec.cg_sipic <= *rec.cg_orig);
  }

  // one angle, serial against parallel kernels
  const auto s = run_square_angle(cfg, sweep_angles(cfg)[1], geometry::Execution::serial);
  const auto p = run_square_angle(cfg, sweep_angles(cfg)[1], geometry::Execution::parallel);
  CHECK(s.eta == p.eta);
  CHECK(s.kappa_orig == p.kappa_orig);
  CHECK(s.kappa_sipic == p.kappa_sipic);
  CHECK(s.fillin == p.fillin);
  CHECK(s.cg_orig == p.cg_orig);
}

TEST_CASE("sweep slope uses only records below the eta cut") {
  std::vector<SweepRecord> recs(10);
  for (int i = 0; i < 10; ++i) {
    recs[i].eta = std::pow(10.0, -9.0 + i);
    // the tail above the cut would pull the slope away from -4
    recs[i].kappa_orig = i < 5 ? std::pow(recs[i].eta, -4.0) : 1.0;
  }
  recs[0].kappa_orig.reset();
  CHECK_FALSE(sweep_slope(recs, &SweepRecord::kappa_orig, 1e-4));  // four usable points
  const auto s = sweep_slope(recs, &SweepRecord::kappa_orig, 2e-4);
  REQUIRE(s);
  CHECK(s->points == 5);
  CHECK(std::abs(s->slope + 4.0) > 0.1);
  recs[0].kappa_orig = std::pow(recs[0].eta, -4.0);
  const auto t = sweep_slope(recs, &SweepRecord::kappa_orig, 1e-4);
  REQUIRE(t);
  CHECK(t->points == 5);
  CHECK(std::abs(t->slope + 4.0) < 1e-9);
  CHECK_FALSE(sweep_slope(recs, &SweepRecord::kappa_sipic, 1e-4));
}
