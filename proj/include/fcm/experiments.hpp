#pragma once

#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcm/assembly.hpp"
#include "fcm/basis.hpp"
#include "fcm/geometry.hpp"
#include "fcm/linalg.hpp"

namespace fcm::experiments {

enum class Precon { none, scale, sipic };

struct ScenarioConfig {
  std::string scenario = "rotating_square";
  basis::Family family = basis::Family::bspline;
  int order = 2;
  double h = 1.0 / 32.0;
  int depth = 2;
  int angles = 100;
  double angle_range = std::numbers::pi / 4.0;
  double eta_r = 5e-3;
  double gamma = 0.9;
  double epsilon = 1e2 * std::numeric_limits<double>::epsilon();
  assembly::StabMode stab = assembly::StabMode::local;
  double beta_multiplier = 2.0;
  Precon precon = Precon::sipic;
  bool kappa = true;  // skip condition numbers when only fill-in is wanted
  bool cg = true;     // sweep CG iteration counts
  double cg_rel_tol = 1e-6;
  double cg_abs_tol = 0.0;
  int cg_max_iter = 100000;
  double eta_fit_max = 1e-4;
  int levels = 6;  // plate: h = 1, 1/2, ..., 2^-(levels-1)
  double tight_tol = 1e-10;
  std::string out_dir;
  bool export_systems = false;

  void validate() const;
};

struct Slope {
  double slope = 0.0;
  double stderr_ = 0.0;
  int points = 0;
};

/// Least squares on (log x, log y). Throws if fewer than `min_points` or a value is not positive.
Slope fit_loglog_slope(std::span<const std::pair<double, double>> points, int min_points = 5);

// ---------------------------------------------------------------- rotating square

/// Square (-1/2,1/2)^2 minus a centred disk of radius sqrt(1/8 - sqrt(eta_r/2) h),
/// rotated about the origin. All boundary pieces are Dirichlet (ids 0..4).
geometry::ImplicitDomain rotating_square_domain(double angle, double h, double eta_r);
double rotating_square_radius(double h, double eta_r);

struct SquareCase {
  geometry::CartesianMesh mesh;
  std::vector<geometry::TrimmedCell> cells;
  basis::BasisSpace space;
  assembly::PoissonProblem problem;
  assembly::FcmSystem system;
  double eta = 0.0;
};

/// Tessellate and assemble one sweep configuration; the right-hand side uses g^D = x^2 - y^2.
SquareCase build_square_case(const ScenarioConfig& cfg, double angle,
                             geometry::Execution exec = geometry::Execution::parallel);

struct SweepRecord {
  double angle = 0.0;
  double eta = 0.0;
  std::optional<double> kappa_orig, kappa_scaled, kappa_sipic, fillin;
  std::optional<int> elims, cg_orig, cg_sipic;
  double wall_time = 0.0;
  bool flagged = false;  // kappa_sipic > kappa_orig
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::optional<Slope> slope_orig, slope_scaled, slope_sipic;
  bool any_flagged() const;
};

std::vector<double> sweep_angles(const ScenarioConfig& cfg);
SweepRecord run_square_angle(const ScenarioConfig& cfg, double angle,
                             geometry::Execution exec = geometry::Execution::parallel);
SweepResult run_rotating_square(const ScenarioConfig& cfg);

/// Slope of the selected kappa column vs eta over records with eta < eta_max.
std::optional<Slope> sweep_slope(std::span<const SweepRecord> records,
                                 std::optional<double> SweepRecord::*column, double eta_max);

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records);
void write_slopes_json(std::ostream& out, const SweepResult& result);

// ---------------------------------------------------------------- plate with a hole

constexpr double kPlateRadius = 3.0 / (2.0 * std::numbers::pi);
constexpr double kPlateAngle = std::numbers::pi / 4.0;

/// Quarter plate [0,1]^2 minus the disk of radius R at the origin, rotated by 45 degrees.
/// Pieces 0..3 (straight edges) are Dirichlet, piece 4 (the arc) is Neumann.
geometry::ImplicitDomain plate_domain();
assembly::ElasticityProblem plate_problem(double lambda = 1.0, double mu = 1.0);

struct PlateLevel {
  int level = 0;
  double h = 0.0;
  int depth = 0;
  int dofs = 0;
  double eta = 0.0;
  std::optional<double> kappa_orig, kappa_sipic;
  double fillin = 0.0;
  int elims = 0;
  int cg_orig = 0;              // iterations at cfg.cg_rel_tol
  int cg_sipic = 0;             // iterations at cfg.cg_rel_tol
  int cg_sipic_tight = 0;       // iterations at cfg.tight_tol
  double energy_sipic_tight = 0.0;  // strain energy error, SIPIC solve at tight_tol
  double energy_sipic_loose = 0.0;  // at cg_rel_tol
  double energy_orig_loose = 0.0;   // original system at cg_rel_tol
  double anorm_err_orig = 0.0;      // ||x_ref - x||_A at termination, cg_rel_tol
  double anorm_err_sipic = 0.0;
  linalg::CgReport history_orig, history_sipic;
};

struct PlateResult {
  std::vector<PlateLevel> levels;
};

PlateLevel run_plate_level(const ScenarioConfig& cfg, int level);
PlateResult run_plate_hole(const ScenarioConfig& cfg);
void write_plate_csv(std::ostream& out, std::span<const PlateLevel> levels);

/// Writes the scenario outputs into cfg.out_dir. Returns non-zero on flagged records.
int run_scenario(const ScenarioConfig& cfg, bool assert_thresholds);

}  // namespace fcm::experiments
