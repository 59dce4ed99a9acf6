#include "msqaoa/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <tuple>

#include "msqaoa/simulator.hpp"

namespace msqaoa {

double gradient_norm(const AngleObjective& objective, const Angles& at, double step) {
  const double db = (objective({at.beta + step, at.gamma}) - objective({at.beta - step, at.gamma})) / (2 * step);
  const double dg = (objective({at.beta, at.gamma + step}) - objective({at.beta, at.gamma - step})) / (2 * step);
  return std::hypot(db, dg);
}

namespace {

struct Vertex {
  std::array<double, 2> x;
  double f;
};

double diameter(const std::array<Vertex, 3>& s) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) d = std::max(d, std::hypot(s[i].x[0] - s[j].x[0], s[i].x[1] - s[j].x[1]));
  return d;
}

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
struct Refinement {
  Vertex best;
  int iterations = 0;
  int evaluations = 0;
  bool small = false;
};

Refinement nelder_mead(const AngleObjective& objective, Vertex start, std::array<double, 2> step,
                       int max_evaluations, double tolerance) {
  Refinement r;
  auto eval = [&](const std::array<double, 2>& x) {
    ++r.evaluations;
    return objective({x[0], x[1]});
  };
  std::array<Vertex, 3> s{start, Vertex{{start.x[0] + step[0], start.x[1]}, 0.0},
                          Vertex{{start.x[0], start.x[1] + step[1]}, 0.0}};
  s[1].f = eval(s[1].x);
  s[2].f = eval(s[2].x);

  auto point = [](const std::array<double, 2>& c, const std::array<double, 2>& w, double t) {
    return std::array<double, 2>{c[0] + t * (w[0] - c[0]), c[1] + t * (w[1] - c[1])};
  };

  while (r.evaluations < max_evaluations) {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    if (diameter(s) < tolerance) {
      r.small = true;
      break;
    }
    ++r.iterations;
    const std::array<double, 2> centroid{(s[0].x[0] + s[1].x[0]) / 2, (s[0].x[1] + s[1].x[1]) / 2};
    const auto xr = point(centroid, s[2].x, -1.0);
    const double fr = eval(xr);
    if (fr < s[0].f) {
      const auto xe = point(centroid, s[2].x, -2.0);
      const double fe = eval(xe);
      s[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < s[1].f) {
      s[2] = {xr, fr};
    } else {
      const bool outside = fr < s[2].f;
      const auto xc = outside ? point(centroid, s[2].x, -0.5) : point(centroid, s[2].x, 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, s[2].f)) {
        s[2] = {xc, fc};
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i].x = point(s[0].x, s[i].x, 0.5);
          s[i].f = eval(s[i].x);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  r.best = s[0];
  if (!r.small) r.small = diameter(s) < tolerance;
  return r;
}

// Among the images of `a` under beta -> beta + pi/2, beta -> -beta and gamma -> -gamma that
// reproduce the objective value, picks gamma <= 0, then beta >= 0, then smallest |beta|.
Angles canonical_representative(const AngleObjective& objective, const Angles& a, double value) {
  const double tol = 1e-12 * (1.0 + std::abs(value));
  auto key = [](const Angles& x) { return std::make_tuple(x.gamma > 0.0, x.beta < 0.0, std::abs(x.beta)); };
  Angles best{canonical_beta(a.beta), a.gamma};
  for (double shift : {0.0, M_PI / 2})
    for (double bsign : {1.0, -1.0})
      for (double gsign : {1.0, -1.0}) {
        const Angles img{canonical_beta(bsign * a.beta + shift), gsign * a.gamma};
        if (!(key(img) < key(best))) continue;
        if (std::abs(objective(img) - value) > tol) continue;
        best = img;
      }
  return best;
}

}  // namespace

Optimum minimize_angles(const AngleObjective& objective, double gamma_max, const SearchConfig& config) {
  if (config.beta_points < 1 || config.gamma_points < 1) throw Error(ErrorCode::EmptyGrid, "search grid is empty");
  if (!(gamma_max > 0.0) || !std::isfinite(gamma_max)) throw Error(ErrorCode::RangeError, "gamma_max must be positive");

  const double beta_lo = -M_PI / 2, beta_hi = M_PI / 2;
  const double beta_step = config.beta_points > 1 ? (beta_hi - beta_lo) / (config.beta_points - 1) : 0.0;
  const double gamma_step = config.gamma_points > 1 ? gamma_max / (config.gamma_points - 1) : 0.0;

  Vertex best{{0.0, 0.0}, std::numeric_limits<double>::infinity()};
  for (int i = 0; i < config.beta_points; ++i)
    for (int j = 0; j < config.gamma_points; ++j) {
      const double beta = config.beta_points > 1 ? beta_lo + i * beta_step : 0.0;
      const double gamma = config.gamma_points > 1 ? -gamma_max + j * gamma_step : -gamma_max / 2;
      const double f = objective({beta, gamma});
      if (f < best.f) best = {{beta, gamma}, f};
    }

  Optimum out;
  out.grid_value = best.f;
  out.beta_points = config.beta_points;
  out.gamma_points = config.gamma_points;
  out.evaluations = config.beta_points * config.gamma_points;

  const std::array<double, 2> step{beta_step > 0 ? beta_step : 0.05, gamma_step > 0 ? gamma_step : 0.05 * gamma_max};
  const Refinement r = nelder_mead(objective, best, step, config.max_evaluations, config.simplex_tolerance);
  out.refinement_iterations = r.iterations;
  out.evaluations += r.evaluations;
  out.value = std::min(r.best.f, best.f);
  const Angles raw = r.best.f <= best.f ? Angles{r.best.x[0], r.best.x[1]} : Angles{best.x[0], best.x[1]};
  out.angles = canonical_representative(objective, raw, out.value);
  out.gradient_norm = gradient_norm(objective, out.angles);
  out.converged = r.small && out.gradient_norm < config.gradient_tolerance;
  return out;
}

Optimum optimize_closed_form(const MixtureSpec& spec, const SearchConfig& config) {
  const double gamma_max = config.gamma_max.value_or(2.0 / std::sqrt(spec.damping_rate()));
  return minimize_angles([&spec](const Angles& a) { return energy_sigma_form(spec, a); }, gamma_max, config);
}

Optimum optimize_instance(const ProblemInstance& instance, const SearchConfig& config) {
  const PhaseTable table = build_phase_table(instance);
  const int n = instance.num_spins();
  const double gamma_max = config.gamma_max.value_or(2.0 / std::sqrt(instance.spec().damping_rate()));
  // A single instance is not symmetric under (beta, gamma) -> (-beta, -gamma) unless H is even,
  // so search both gamma half-planes by mirroring the objective.
  auto objective = [&](const Angles& a) { return expectation(table, qaoa_state(table, n, a)).h / n; };
  Optimum lower = minimize_angles(objective, gamma_max, config);
  Optimum upper = minimize_angles([&](const Angles& a) { return objective({-a.beta, -a.gamma}); }, gamma_max, config);
  if (upper.value < lower.value) {
    upper.angles = {-upper.angles.beta, -upper.angles.gamma};
    return upper;
  }
  return lower;
}

std::vector<CurveRow> optimal_angle_curve(std::span<const int> d_values, const SearchConfig& config) {
  std::vector<CurveRow> rows;
  rows.reserve(d_values.size());
  for (int d : d_values) {
    if (d < 2) throw Error(ErrorCode::RangeError, "optimal-angle curve needs d >= 2");
    rows.push_back({d, optimize_closed_form(pure_d_spec(d), config)});
  }
  return rows;
}

double approximation_factor(double value, double ground_state_per_spin) {
  if (!(ground_state_per_spin < 0.0)) throw Error(ErrorCode::SignError, "ground-state energy per spin must be negative");
  return value / ground_state_per_spin;
}

}  // namespace msqaoa
