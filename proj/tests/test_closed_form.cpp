#include <doctest.h>

#include <cmath>
#include <random>

#include "msqaoa/closed_form.hpp"

using namespace msqaoa;

TEST_CASE("SK optimum value") {
  const MixtureSpec sk = make_mixture_spec(2, {0.0, 1.0});
  CHECK(energy_sigma_form(sk, Angles{M_PI / 8, -0.5}) == doctest::Approx(-1.0 / std::sqrt(4 * M_E)).epsilon(1e-15));
}

TEST_CASE("pure d-spin closed form") {
  CHECK(energy_pure_d(2, Angles{M_PI / 8, -0.5}) == doctest::Approx(-0.303265).epsilon(2e-6));
  CHECK(energy_pure_d(3, Angles{0.290003, -0.430091}) == doctest::Approx(-0.270638).epsilon(2e-6));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> beta(-2, 2), gamma(-1.5, 1.5);
  for (int d = 1; d <= 8; ++d)
    for (int k = 0; k < 20; ++k) {
      const Angles a{beta(rng), gamma(rng)};
      CHECK(energy_pure_d(d, a) == doctest::Approx(energy_sigma_form(pure_d_spec(d), a)).epsilon(1e-12));
    }
  CHECK_THROWS_AS(energy_pure_d(0, Angles{0.1, 0.1}), Error);
}

TEST_CASE("single-spin field by hand") {
  // One spin with field J: <H> = J sin(2 gamma J) sin(2 beta); averaging over J ~ N(0, s^2)
  // gives 2 gamma s^2 exp(-2 gamma^2 s^2) sin(2 beta).
  for (double s : {0.3, 1.0, 1.7})
    for (const Angles a : {Angles{0.2, -0.4}, Angles{-0.9, 0.8}}) {
      const double expected = 2 * a.gamma * s * s * std::exp(-2 * a.gamma * a.gamma * s * s) * std::sin(2 * a.beta);
      CHECK(energy_sigma_form(make_mixture_spec(1, {s}), a) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("sigma form equals mixture form") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 2), beta(-3, 3), gamma(-2, 2);
  for (int k = 0; k < 300; ++k) {
    const int d = 1 + k % 7;
    std::vector<double> sig(d);
    for (double& x : sig) x = u(rng);
    const MixtureSpec s = make_mixture_spec(d, sig);
    const Angles a{beta(rng), gamma(rng)};
    const double lhs = energy_sigma_form(s, a), rhs = energy_mixture_form(MixtureFunction(s), a);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(rhs)));
  }
}

TEST_CASE("scalar type is a template parameter") {
  const MixtureSpec s = make_mixture_spec(3, {1.0 / 3, 0.5, 1.0});
  const long double wide = energy_sigma_form(s, BasicAngles<long double>{0.3L, -0.6L});
  CHECK(double(wide) == doctest::Approx(energy_sigma_form(s, Angles{0.3, -0.6})).epsilon(1e-14));
  const float narrow = energy_pure_d(3, BasicAngles<float>{0.29f, -0.43f});
  CHECK(narrow == doctest::Approx(-0.2706).epsilon(1e-3));
}

TEST_CASE("symmetries and zeros") {
  const MixtureSpec s = make_mixture_spec(3, {0.4, 1.1, 0.8});
  const Angles a{0.37, -0.62};
  CHECK(energy_sigma_form(s, Angles{-a.beta, -a.gamma}) == doctest::Approx(energy_sigma_form(s, a)).epsilon(1e-14));
  CHECK(energy_sigma_form(s, Angles{a.beta + M_PI, a.gamma}) == doctest::Approx(energy_sigma_form(s, a)).epsilon(1e-12));
  CHECK(energy_sigma_form(s, Angles{0.4, 0.0}) == 0.0);
  CHECK(energy_sigma_form(s, Angles{0.0, 0.7}) == 0.0);
  // Odd pure degrees are also symmetric under beta -> pi/2 - beta.
  CHECK(energy_pure_d(3, Angles{M_PI / 2 - 0.29, -0.43}) == doctest::Approx(energy_pure_d(3, Angles{0.29, -0.43})));
}

TEST_CASE("higher moments factorize in the limit") {
  const MixtureSpec sk = make_mixture_spec(2, {0.0, 1.0});
  const Angles a{0.3, -0.45};
  const double e = energy_sigma_form(sk, a);
  CHECK(energy_higher_moment_limit(sk, a, 1) == doctest::Approx(e));
  CHECK(energy_higher_moment_limit(sk, a, 3) == doctest::Approx(e * e * e));
  CHECK_THROWS_AS(energy_higher_moment_limit(sk, a, 0), Error);
}

TEST_CASE("cubic stationarity residuals") {
  const D3Residuals at_opt = d3_stationarity_residuals(Angles{0.290003, -0.430091});
  REQUIRE(at_opt.r1);
  REQUIRE(at_opt.r3);
  CHECK(std::abs(*at_opt.r1) < 1e-4);
  CHECK(std::abs(at_opt.r2) < 1e-4);
  CHECK(std::abs(*at_opt.r3) < 1e-4);
  const D3Residuals small = d3_stationarity_residuals(Angles{0.3, -0.1});
  CHECK_FALSE(small.r1);
  CHECK_FALSE(small.r3);
  CHECK(std::abs(d3_stationarity_residuals(Angles{0.2, -0.6}).r2) > 1e-2);
}

TEST_CASE("canonical beta") {
  CHECK(canonical_beta(M_PI / 2) == doctest::Approx(M_PI / 2));
  CHECK(canonical_beta(-M_PI / 2) == doctest::Approx(M_PI / 2));
  CHECK(canonical_beta(3.0) == doctest::Approx(3.0 - M_PI));
  CHECK(canonical_beta(0.25) == 0.25);
}
