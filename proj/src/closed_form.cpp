#include "msqaoa/closed_form.hpp"

namespace msqaoa {

double energy_higher_moment_limit(const MixtureSpec& spec, const Angles& angles, int m) {
  if (m < 1) throw Error(ErrorCode::NonPositiveM, "moment order must be positive");
  const double e = energy_sigma_form(spec, angles);
  double r = 1.0;
  for (int k = 0; k < m; ++k) r *= e;
  return r;
}

D3Residuals d3_stationarity_residuals(const Angles& angles) {
  static const MixtureSpec cubic = make_mixture_spec(3, {0.0, 0.0, std::sqrt(3.0)});
  const double g2 = angles.gamma * angles.gamma;
  D3Residuals r;

  if (g2 > 0.0) {
    const double arg = 1.0 - 1.0 / (9.0 * g2);
    if (arg >= -1.0 && arg <= 1.0) r.r1 = std::abs(angles.beta) - 0.25 * std::acos(arg);
  }
  r.r2 = std::exp(-6.0 * g2) - 18.0 * g2 + 3.0;
  const double radicand = 4.0 * g2 - 2.0 / 3.0;
  if (radicand >= 0.0) r.r3 = std::abs(energy_sigma_form(cubic, angles)) - std::sqrt(radicand);
  return r;
}

}  // namespace msqaoa
