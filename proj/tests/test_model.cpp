#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "msqaoa/model.hpp"

using namespace msqaoa;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

// H(z) straight from the definition, one coupling at a time.
double brute_cost(const ProblemInstance& inst, const std::vector<int>& z) {
  const int n = inst.num_spins();
  double h = 0.0;
  for (const Coupling& c : inst.couplings()) {
    double prod = c.value * std::pow(double(n), (1.0 - c.order) / 2.0);
    for (int k = 0; k < n; ++k)
      if ((c.mask >> k) & 1ULL) prod *= z[k];
    h += prod;
  }
  return h;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK(code_of([] { make_mixture_spec(0, std::vector<double>{}); }) == ErrorCode::DegreeZero);
  CHECK(code_of([] { make_mixture_spec(21, std::vector<double>(21, 1.0)); }) == ErrorCode::DegreeTooLarge);
  CHECK(code_of([] { make_mixture_spec(3, {1.0, 2.0}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { make_mixture_spec(2, {1.0, -0.5}); }) == ErrorCode::NegativeSigma);
  CHECK(code_of([] { make_mixture_spec(2, {1.0, NAN}); }) == ErrorCode::NegativeSigma);
  CHECK(code_of([] { make_mixture_spec(2, {0.0, 0.0}); }) == ErrorCode::AllZero);
}

TEST_CASE("spec accessors and damping rate") {
  const MixtureSpec s = make_mixture_spec(3, {1.0, 1.0, 1.0});
  CHECK(s.degree() == 3);
  CHECK(s.variance(2) == 1.0);
  // 1/0! + 1/1! + 1/2!
  CHECK(s.damping_rate() == doctest::Approx(2.5));
  CHECK(pure_d_spec(3).sigma(3) == doctest::Approx(std::sqrt(3.0)));
  CHECK(pure_d_spec(2).sigma(1) == 0.0);
  CHECK(pure_d_spec(2).damping_rate() == doctest::Approx(1.0));
}

TEST_CASE("mixture function round trip") {
  const MixtureSpec s = make_mixture_spec(4, {0.3, 1.2, 0.0, 2.5});
  const MixtureFunction xi(s);
  CHECK(xi.derivative_at_one() == doctest::Approx(s.damping_rate()).epsilon(1e-14));
  const MixtureSpec back = xi.to_spec();
  for (int q = 1; q <= 4; ++q) CHECK(back.sigma(q) == doctest::Approx(s.sigma(q)).epsilon(1e-14));
  const MixtureSpec from_cs = from_mixture_function(2, {0.0, 1.0 / std::sqrt(2.0)});
  CHECK(from_cs.sigma(2) == doctest::Approx(1.0));
  CHECK(xi(1.0) == doctest::Approx(0.09 + 1.44 / 2 + 6.25 / 24));
}

TEST_CASE("sampling is deterministic and canonical") {
  const MixtureSpec s = make_mixture_spec(3, {0.5, 0.0, 2.0});
  const ProblemInstance a = sample_instance(s, 9, 42);
  const ProblemInstance b = sample_instance(s, 9, 42);
  const ProblemInstance c = sample_instance(s, 9, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.couplings().size() == 9 + 36 + 84);
  for (const Coupling& cp : a.couplings())
    if (cp.order == 2) CHECK(cp.value == 0.0);
  CHECK(a.couplings().front().mask == 1ULL);
  CHECK(a.couplings()[9].mask == 0b11ULL);
  CHECK(code_of([&] { sample_instance(s, 2, 1); }) == ErrorCode::TooFewSpins);
  CHECK(code_of([&] { sample_instance(s, 64, 1); }) == ErrorCode::TooLarge);
}

TEST_CASE("sampled couplings have the requested spread") {
  const ProblemInstance inst = sample_instance(make_mixture_spec(2, {0.0, 1.5}), 60, 7);
  double sum = 0, sum2 = 0;
  int count = 0;
  for (const Coupling& c : inst.couplings())
    if (c.order == 2) {
      sum += c.value;
      sum2 += c.value * c.value;
      ++count;
    }
  const double mean = sum / count;
  const double sd = std::sqrt((sum2 - count * mean * mean) / (count - 1));
  CHECK(std::abs(mean) < 4 * 1.5 / std::sqrt(double(count)));
  CHECK(std::abs(sd - 1.5) < 4 * 1.5 / std::sqrt(2.0 * count));
}

TEST_CASE("instance constructor rejects malformed coupling lists") {
  const MixtureSpec s = make_mixture_spec(1, {1.0});
  CHECK(code_of([&] { ProblemInstance(2, s, 0, {{1, 1, 0.1}}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([&] { ProblemInstance(2, s, 0, {{2, 1, 0.1}, {1, 1, 0.2}}); }) == ErrorCode::RangeError);
  CHECK_NOTHROW(ProblemInstance(2, s, 0, {{1, 1, 0.1}, {2, 1, 0.2}}));
}

TEST_CASE("cost matches the definition") {
  const ProblemInstance inst = sample_instance(make_mixture_spec(3, {0.4, 1.0, 0.7}), 7, 3);
  for (std::uint64_t bits : {0ULL, 1ULL, 0b1010101ULL, 0b1111111ULL, 0b0110010ULL}) {
    const auto z = spins_from_bits(bits, 7);
    CHECK(cost(inst, z) == doctest::Approx(brute_cost(inst, z)).epsilon(1e-13));
  }
  const std::vector<int> short_z{1, 1};
  CHECK(code_of([&] { cost(inst, short_z); }) == ErrorCode::LengthMismatch);
  const std::vector<int> bad{1, 1, 0, 1, 1, 1, 1};
  CHECK(code_of([&] { cost(inst, bad); }) == ErrorCode::NonBinaryEntry);
}

TEST_CASE("spins_from_bits maps bit 0 to +1") {
  CHECK(spins_from_bits(0b101, 3) == std::vector<int>{-1, 1, -1});
}

TEST_CASE("binomials") {
  CHECK(binomial_u64(10, 3) == 120);
  CHECK(binomial_u64(63, 31) == 916312070471295267ULL);
  CHECK(binomial_u64(5, 7) == 0);
  CHECK(factorial(20) == 2432902008176640000ULL);
}

TEST_CASE("fit recovers sigma within standard errors") {
  const MixtureSpec truth = make_mixture_spec(3, {0.0, 1.0, 2.0});
  const ProblemInstance inst = sample_instance(truth, 40, 11);
  const SpecFit fit = fit_mixture_spec(inst);
  for (int q = 2; q <= 3; ++q) {
    const auto& d = fit.degrees[q - 1];
    const double se = truth.sigma(q) / std::sqrt(2.0 * (d.count - 1));
    CHECK(std::abs(fit.spec.sigma(q) - truth.sigma(q)) < 3 * se);
  }
  CHECK(std::find(fit.warnings.begin(), fit.warnings.end(), FitWarning::ScalingConvention) != fit.warnings.end());
  CHECK(std::find(fit.warnings.begin(), fit.warnings.end(), FitWarning::NonZeroMean) == fit.warnings.end());
}

TEST_CASE("fit warnings") {
  const std::vector<Coupling> single{{0b11, 2, 0.8}};
  const SpecFit one = fit_mixture_spec(2, single);
  CHECK(std::find(one.warnings.begin(), one.warnings.end(), FitWarning::InsufficientSamples) != one.warnings.end());

  ProblemInstance inst = sample_instance(make_mixture_spec(1, {1.0}), 50, 5);
  std::vector<Coupling> shifted = inst.couplings();
  for (auto& c : shifted) c.value += 2.0;
  const SpecFit f = fit_mixture_spec(1, shifted);
  CHECK(std::find(f.warnings.begin(), f.warnings.end(), FitWarning::NonZeroMean) != f.warnings.end());
  CHECK(to_string(FitWarning::NonZeroMean) == "NonZeroMean");
}
