#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "msqaoa/model.hpp"

namespace msqaoa {

/// Depth-1 QAOA angles: the state is exp(-i beta B) exp(-i gamma H) |+>^n.
template <typename Scalar>
struct BasicAngles {
  Scalar beta{};
  Scalar gamma{};

  friend bool operator==(const BasicAngles&, const BasicAngles&) = default;
};
using Angles = BasicAngles<double>;

/// Maps beta into (-pi/2, pi/2]; the energy depends on beta only through 2 beta.
template <typename Scalar>
Scalar canonical_beta(Scalar beta) {
  const Scalar pi = Scalar(M_PI);
  Scalar r = std::remainder(beta, pi);
  if (r <= -pi / 2) r += pi;
  return r;
}

/// Infinite-n expected energy per spin, written as a sum over odd a <= q of
/// sin^a(2 beta) cos^{q-a}(2 beta) terms with damping exp(-2 gamma^2 a xi'(1)).
template <typename Scalar = double>
Scalar energy_sigma_form(const MixtureSpec& spec, const BasicAngles<Scalar>& angles) {
  using std::cos;
  using std::exp;
  using std::pow;
  using std::sin;
  const Scalar s = sin(2 * angles.beta);
  const Scalar c = cos(2 * angles.beta);
  const Scalar damping = Scalar(spec.damping_rate());
  const Scalar g2 = angles.gamma * angles.gamma;

  Scalar total(0);
  for (int q = 1; q <= spec.degree(); ++q) {
    const Scalar var = Scalar(spec.variance(q));
    if (var == Scalar(0)) continue;
    Scalar inner(0);
    for (int a = 1; a <= q; a += 2) {
      const Scalar sign = ((a - 1) / 2) % 2 == 0 ? Scalar(1) : Scalar(-1);
      const Scalar denom = Scalar(factorial(a)) * Scalar(factorial(q - a));
      inner += sign / denom * exp(-2 * g2 * Scalar(a) * damping) * pow(s, a) * pow(c, q - a);
    }
    total += var * inner;
  }
  return 2 * angles.gamma * total;
}

/// Same quantity as 2 gamma Im xi(cos 2beta + i sin 2beta exp(-2 gamma^2 xi'(1))).
template <typename Scalar = double>
Scalar energy_mixture_form(const MixtureFunction& xi, const BasicAngles<Scalar>& angles) {
  using std::cos;
  using std::exp;
  using std::sin;
  const Scalar damp = exp(-2 * angles.gamma * angles.gamma * Scalar(xi.derivative_at_one()));
  const std::complex<Scalar> z(cos(2 * angles.beta), sin(2 * angles.beta) * damp);
  return 2 * angles.gamma * xi(z).imag();
}

/// Pure d-spin model with sigma_d = sqrt(d!/2):
/// gamma Im[(cos 2beta + i sin 2beta exp(-gamma^2 d))^d].
template <typename Scalar = double>
Scalar energy_pure_d(int d, const BasicAngles<Scalar>& angles) {
  using std::cos;
  using std::exp;
  using std::sin;
  if (d < 1) throw Error(ErrorCode::DegreeZero, "pure-d model needs d >= 1");
  const Scalar damp = exp(-angles.gamma * angles.gamma * Scalar(d));
  const std::complex<Scalar> z(cos(2 * angles.beta), sin(2 * angles.beta) * damp);
  return angles.gamma * std::pow(z, d).imag();
}

/// Infinite-n limit of E_J<(H/n)^m>, which factorizes into the m-th power of the first moment.
double energy_higher_moment_limit(const MixtureSpec& spec, const Angles& angles, int m);

/// Residuals of the optimality system of the sigma_3 = sqrt(3) model. A residual is empty
/// when its expression leaves the real domain at the given angles.
///
///   r1 = |beta| - arccos(1 - 1/(9 gamma^2)) / 4
///   r2 = exp(-6 gamma^2) - 18 gamma^2 + 3
///   r3 = |E| - sqrt(4 gamma^2 - 2/3)
///
/// r1 and r3 compare magnitudes: the system fixes |beta| and |E| while the optimum
/// comes in sign-paired representatives with E < 0.
struct D3Residuals {
  std::optional<double> r1;
  double r2 = 0.0;
  std::optional<double> r3;
};
D3Residuals d3_stationarity_residuals(const Angles& angles);

}  // namespace msqaoa
