#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "msqaoa/closed_form.hpp"
#include "msqaoa/finite_n.hpp"
#include "msqaoa/simulator.hpp"

using namespace msqaoa;

namespace {

struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Gauss rule for the standard normal (Golub-Welsch on the Hermite recurrence).
Quadrature gauss_hermite(int points) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  return {eig.eigenvalues(), eig.eigenvectors().row(0).transpose().array().square()};
}

struct Averages {
  double first = 0.0;
  double second = 0.0;
};

// Disorder average of <H/n> and <(H/n)^2> by tensor Gauss quadrature over every coupling,
// each point evaluated with the statevector simulator.
Averages quadrature_moments(const MixtureSpec& spec, int n, const Angles& angles, int points) {
  std::vector<Coupling> layout;
  for (int q = 1; q <= spec.degree(); ++q)
    for (std::uint64_t m = 1; m < (1ULL << n); ++m)
      if (std::popcount(m) == q) layout.push_back({m, q, 0.0});
  std::sort(layout.begin(), layout.end(), [](const Coupling& a, const Coupling& b) {
    if (a.order != b.order) return a.order < b.order;
    const std::uint64_t diff = a.mask ^ b.mask;
    return (a.mask & (diff & (~diff + 1))) != 0;
  });
  const Quadrature gh = gauss_hermite(points);
  Averages out;
  std::function<void(std::size_t, double)> recurse = [&](std::size_t k, double weight) {
    if (k == layout.size()) {
      const Expectation e = expectation(ProblemInstance(n, spec, 0, layout), angles);
      out.first += weight * e.h / n;
      out.second += weight * e.h2 / (double(n) * n);
      return;
    }
    if (spec.sigma(layout[k].order) == 0.0) {
      layout[k].value = 0.0;
      recurse(k + 1, weight);
      return;
    }
    for (int i = 0; i < points; ++i) {
      layout[k].value = spec.sigma(layout[k].order) * gh.nodes[i];
      recurse(k + 1, weight * gh.weights[i]);
    }
  };
  recurse(0, 1.0);
  return out;
}

struct Enumerated {
  long f = 0;
  long g = 0;
};

Enumerated enumerate_subsets(int q, const std::vector<int>& z, const std::vector<int>& zp) {
  const int n = static_cast<int>(z.size());
  Enumerated e;
  for (std::uint64_t S = 1; S < (1ULL << n); ++S) {
    if (std::popcount(S) != q) continue;
    int a = 1, b = 1;
    for (int k = 0; k < n; ++k)
      if ((S >> k) & 1ULL) {
        a *= z[k];
        b *= zp[k];
      }
    e.f += a - b;
    e.g += (a - b) * (a - b);
  }
  return e;
}

const MixtureSpec kSk = make_mixture_spec(2, {0.0, 1.0});

}  // namespace

TEST_CASE("sketch counts") {
  const std::vector<int> z{1, 1, -1, -1, 1}, zp{1, -1, 1, -1, -1};
  const Sketch s = sketch_of(z, zp);
  CHECK(s == Sketch{1, 2, 1, 1});
  CHECK(s.u() == 1);
  CHECK(s.v() == 0);
  CHECK(s.plus_first() == 3);
  CHECK(s.plus_second() == 2);
  const QFactors q = q_factors(0.4);
  CHECK(std::abs(q.qpp + q.qmm - 1.0) < 1e-15);
  CHECK(std::abs(q.qpm + q.qmp) < 1e-15);
}

TEST_CASE("f_q and g_q agree with subset enumeration") {
  for (int n = 1; n <= 8; ++n)
    for (std::uint64_t zb = 0; zb < (1ULL << n); zb += 3)
      for (std::uint64_t zpb = 0; zpb < (1ULL << n); zpb += 5) {
        std::vector<int> z(n), zp(n);
        for (int k = 0; k < n; ++k) {
          z[k] = (zb >> k) & 1 ? -1 : 1;
          zp[k] = (zpb >> k) & 1 ? -1 : 1;
        }
        const Sketch s = sketch_of(z, zp);
        for (int q = 1; q <= std::min(n, 4); ++q) {
          const Enumerated e = enumerate_subsets(q, z, zp);
          CHECK(f_q(q, s) == WideInt(e.f));
          CHECK(g_q(q, s.disagreements(), n) == WideInt(e.g));
        }
      }
  CHECK_THROWS_AS(f_q(5, Sketch{1, 1, 1, 1}), Error);
  CHECK_THROWS_AS(f_q(-1, Sketch{1, 1, 1, 1}), Error);
}

TEST_CASE("f_q is exact far beyond double precision") {
  const Sketch s{20, 20, 15, 5};
  // Agreeing strings give zero for every q.
  CHECK(f_q(10, Sketch{30, 0, 0, 30}) == 0);
  const WideInt v = f_q(12, s);
  CHECK(v != 0);
  CHECK(f_q(12, Sketch{20, 15, 20, 5}) == -v);
}

TEST_CASE("f_q polynomial coefficients") {
  CHECK(f_q_abc(1) == std::map<Monomial, Rational>{{{1, 0, 0}, Rational(2)}});
  CHECK(f_q_abc(2) == std::map<Monomial, Rational>{{{1, 1, 0}, Rational(2)}});
  const auto& c3 = f_q_abc(3);
  CHECK(c3.at({3, 0, 0}) == Rational(1, 3));
  CHECK(c3.at({1, 2, 0}) == Rational(1));
  CHECK(c3.at({1, 0, 1}) == Rational(-1));
  CHECK(c3.at({1, 0, 0}) == Rational(2, 3));
  // The polynomial reproduces f_q at sketches it was not fitted on.
  for (int q = 1; q <= 6; ++q)
    for (const Sketch s : {Sketch{7, 3, 2, 9}, Sketch{0, 5, 1, 4}, Sketch{11, 0, 6, 2}}) {
      Rational total = 0;
      for (const auto& [m, coeff] : f_q_abc(q)) {
        Rational term = coeff;
        for (int i = 0; i < m[0]; ++i) term *= s.u();
        for (int i = 0; i < m[1]; ++i) term *= s.v();
        for (int i = 0; i < m[2]; ++i) term *= s.n();
        total += term;
      }
      CHECK(total == Rational(static_cast<long long>(f_q(q, s))));
    }
}

TEST_CASE("moments match Gauss quadrature over the couplings") {
  struct Case {
    MixtureSpec spec;
    int n;
    Angles angles;
    int points;
  };
  const std::vector<Case> cases{
      {make_mixture_spec(2, {0.7, 1.1}), 2, Angles{0.3, -0.45}, 24},
      {make_mixture_spec(1, {0.9}), 3, Angles{-0.6, 0.5}, 24},
      {make_mixture_spec(3, {0.0, 0.0, 1.3}), 3, Angles{0.25, -0.7}, 60},
      {make_mixture_spec(4, {0.0, 0.0, 0.0, 2.0}), 4, Angles{0.5, 0.3}, 60},
  };
  for (const Case& c : cases) {
    const Averages q = quadrature_moments(c.spec, c.n, c.angles, c.points);
    const MomentReport r = sketch_moments(c.spec, c.angles, c.n);
    CHECK(r.first == doctest::Approx(q.first).epsilon(1e-10));
    CHECK(r.second == doctest::Approx(q.second).epsilon(1e-10));
  }
}

TEST_CASE("factorized, direct and oracle moments coincide") {
  const MixtureSpec mixed = make_mixture_spec(3, {0.7, 0.5, 1.1});
  for (int n = 3; n <= 9; ++n) {
    const Angles a{0.3, 0.4};
    const MomentReport f = sketch_moments(mixed, a, n);
    const MomentReport d = sketch_moments_direct(mixed, a, n);
    const MomentReport o = oracle_moments(mixed, a, n);
    CHECK(f.first == doctest::Approx(o.first).epsilon(1e-12));
    CHECK(d.first == doctest::Approx(o.first).epsilon(1e-12));
    CHECK(f.second == doctest::Approx(o.second).epsilon(1e-12));
    CHECK(d.second == doctest::Approx(o.second).epsilon(1e-12));
    CHECK(f.variance == doctest::Approx(f.second - f.first * f.first));
    CHECK(f.method == MomentMethod::Sketch);
    CHECK(o.method == MomentMethod::Oracle);
  }
}

TEST_CASE("generating function") {
  const MixtureSpec mixed = make_mixture_spec(3, {0.7, 0.5, 1.1});
  const Angles a{0.3, 0.4};
  CHECK(std::abs(generating_function(mixed, a, 6, 0.0) - 1.0) < 1e-13);
  const auto g = generating_function(mixed, a, 6, 0.7);
  const auto o = oracle_generating_function(mixed, a, 6, 0.7);
  CHECK(std::abs(g - o) < 1e-13);
  // d/dlambda at 0 gives i E<H/n>.
  const double h = 1e-4;
  const auto deriv = (generating_function(mixed, a, 6, h) - generating_function(mixed, a, 6, -h)) / (2 * h);
  CHECK(deriv.imag() == doctest::Approx(sketch_moments(mixed, a, 6).first).epsilon(1e-6));
}

TEST_CASE("caps") {
  CHECK_THROWS_AS(oracle_moments(kSk, Angles{0.1, 0.1}, kOracleMaxSpins + 1), Error);
  try {
    sketch_moments(kSk, Angles{0.1, 0.1}, 40, SketchOptions{32, 1});
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
}

TEST_CASE("thread count does not change results") {
  const Angles a{M_PI / 8, -0.5};
  const MomentReport one = sketch_moments(kSk, a, 48, SketchOptions{512, 1});
  const MomentReport many = sketch_moments(kSk, a, 48, SketchOptions{512, 4});
  CHECK(one.first == many.first);
  CHECK(one.second == many.second);
}

TEST_CASE("large n approaches the closed form at rate 1/n") {
  const Angles a{M_PI / 8, -0.5};
  const double limit = energy_sigma_form(kSk, a);
  const double gap256 = sketch_moments(kSk, a, 256).first - limit;
  const double gap512 = sketch_moments(kSk, a, 512).first - limit;
  CHECK(std::abs(gap512) < 1e-3);
  CHECK(gap256 / gap512 == doctest::Approx(2.0).epsilon(0.05));
  const MixtureSpec mixed = make_mixture_spec(3, {1.0 / 3, 0.5, 1.0});
  const Angles b{0.2, -0.6};
  CHECK(sketch_moments(mixed, b, 400).first == doctest::Approx(energy_sigma_form(mixed, b)).epsilon(1e-2));
}

TEST_CASE("A and B factors") {
  for (double beta : {0.2, -0.9})
    for (int a = 0; a <= 6; ++a) {
      for (int t = a + 1; t < a + 5; ++t) CHECK(a_factor(a, t, beta) == std::complex<double>(0.0));
      const std::complex<double> diag = double(factorial(a)) * std::pow(std::complex<double>(0, -1), a) *
                                        std::pow(std::sin(2 * beta), a);
      CHECK(std::abs(a_factor(a, a, beta) - diag) < 1e-12 * std::max(1.0, std::abs(diag)));
    }
  CHECK(b_factor(0, 17, 0.3) == doctest::Approx(1.0));
  CHECK(b_factor(1, 17, 0.3) == doctest::Approx(17 * std::cos(0.6)));
  const double p = std::cos(0.3) * std::cos(0.3);
  CHECK(b_factor(2, 17, 0.3) == doctest::Approx(4 * 17 * p * (1 - p) + 17.0 * 17 * std::cos(0.6) * std::cos(0.6)));
}

TEST_CASE("T-sums shrink when a + b < xi") {
  const Angles a{M_PI / 8, -0.5};
  const auto t1 = t_sum(kSk, a, 200, 1, 0, 2);
  const auto t2 = t_sum(kSk, a, 400, 1, 0, 2);
  CHECK(std::abs(t1) / std::abs(t2) == doctest::Approx(2.0).epsilon(0.05));
  // a + b = xi stays finite.
  const auto s1 = t_sum(kSk, a, 200, 1, 1, 2);
  const auto s2 = t_sum(kSk, a, 400, 1, 1, 2);
  CHECK(std::abs(s1) / std::abs(s2) == doctest::Approx(1.0).epsilon(0.05));
}
