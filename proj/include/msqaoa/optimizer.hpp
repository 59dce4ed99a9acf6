#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "msqaoa/closed_form.hpp"
#include "msqaoa/model.hpp"

namespace msqaoa {

/// Coarse grid plus Nelder-Mead refinement.
///
/// The grid spans one full beta period [-pi/2, pi/2] and gamma in [-gamma_max, 0]; the
/// other gamma half-plane is covered by the exact symmetry E(-beta, -gamma) = E(beta, gamma).
struct SearchConfig {
  int beta_points = 65;
  int gamma_points = 65;
  /// Defaults to 2 / sqrt(xi'(1)) for the closed-form objective.
  std::optional<double> gamma_max;
  int max_evaluations = 500;
  /// Refinement stops once the simplex diameter drops below this.
  double simplex_tolerance = 1e-9;
  /// Gradient-norm bound (central differences, step 1e-6) required for `converged`.
  double gradient_tolerance = 1e-7;
};

struct Optimum {
  Angles angles;
  double value = 0.0;
  /// Best value seen on the coarse grid; value <= grid_value always.
  double grid_value = 0.0;
  int beta_points = 0;
  int gamma_points = 0;
  int refinement_iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

using AngleObjective = std::function<double(const Angles&)>;

/// Central-difference gradient norm of the objective.
double gradient_norm(const AngleObjective& objective, const Angles& at, double step = 1e-6);

/// Minimizes an arbitrary smooth objective of (beta, gamma) that satisfies
/// f(-beta, -gamma) = f(beta, gamma) and is pi-periodic in beta. The reported angles are
/// the representative with gamma <= 0, then beta >= 0, then smallest |beta| among equal-valued images.
Optimum minimize_angles(const AngleObjective& objective, double gamma_max, const SearchConfig& config = {});

Optimum optimize_closed_form(const MixtureSpec& spec, const SearchConfig& config = {});

/// Optimizes the exact <H>/n of one instance via statevector simulation.
Optimum optimize_instance(const ProblemInstance& instance, const SearchConfig& config = {});

struct CurveRow {
  int d = 0;
  Optimum optimum;
};

/// Closed-form optima of the pure d-spin models sigma_d = sqrt(d!/2).
std::vector<CurveRow> optimal_angle_curve(std::span<const int> d_values, const SearchConfig& config = {});

/// value / ground_state_per_spin; throws SignError unless the ground state is negative.
double approximation_factor(double value, double ground_state_per_spin);

}  // namespace msqaoa
