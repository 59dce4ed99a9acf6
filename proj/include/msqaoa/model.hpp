#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msqaoa/error.hpp"

namespace msqaoa {

/// Largest supported degree bound. Factorials up to this order are exact in 64 bits.
inline constexpr int kMaxDegree = 20;

/// Exact q! for 0 <= q <= kMaxDegree.
std::uint64_t factorial(int q);

/// Disorder law of the mixed-spin SK model: J_S ~ N(0, sigma_{|S|}^2) for 1 <= |S| <= d.
///
/// Instances are only produced by make_mixture_spec / from_mixture_function, so a
/// MixtureSpec always satisfies d >= 1, sigma_q >= 0 and some sigma_q > 0.
class MixtureSpec {
 public:
  int degree() const noexcept { return static_cast<int>(sigmas_.size()); }

  /// sigma_q for 1 <= q <= degree(); zero for q outside that range.
  double sigma(int q) const noexcept {
    return (q >= 1 && q <= degree()) ? sigmas_[q - 1] : 0.0;
  }
  double variance(int q) const noexcept { return sigma(q) * sigma(q); }

  /// sigmas()[q - 1] = sigma_q.
  const Eigen::VectorXd& sigmas() const noexcept { return sigmas_; }

  /// Sum over q of sigma_q^2 / (q-1)!, which equals xi'(1).
  double damping_rate() const noexcept;

  friend bool operator==(const MixtureSpec& a, const MixtureSpec& b) {
    return a.sigmas_.size() == b.sigmas_.size() && a.sigmas_ == b.sigmas_;
  }

 private:
  explicit MixtureSpec(Eigen::VectorXd sigmas) : sigmas_(std::move(sigmas)) {}
  friend MixtureSpec make_mixture_spec(int d, std::span<const double> sigmas);

  Eigen::VectorXd sigmas_;
};

/// Validates (d, sigma_1..sigma_d). Throws DegreeZero, DegreeTooLarge, LengthMismatch,
/// NegativeSigma or AllZero.
MixtureSpec make_mixture_spec(int d, std::span<const double> sigmas);
inline MixtureSpec make_mixture_spec(int d, std::initializer_list<double> sigmas) {
  return make_mixture_spec(d, std::span<const double>(sigmas.begin(), sigmas.size()));
}

/// Builds a spec from mixture coefficients c_q using sigma_q = c_q sqrt(q!).
MixtureSpec from_mixture_function(int d, std::span<const double> cs);
inline MixtureSpec from_mixture_function(int d, std::initializer_list<double> cs) {
  return from_mixture_function(d, std::span<const double>(cs.begin(), cs.size()));
}

/// Pure d-spin model with sigma_d = sqrt(d!/2), i.e. xi(x) = x^d / 2.
MixtureSpec pure_d_spec(int d);

/// The mixture function xi(x) = sum_q c_q^2 x^q with c_q = sigma_q / sqrt(q!).
class MixtureFunction {
 public:
  explicit MixtureFunction(const MixtureSpec& spec);

  int degree() const noexcept { return static_cast<int>(coefficients_.size()); }
  /// coefficients()[q - 1] = c_q.
  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }

  /// Horner evaluation; works for real and complex arguments.
  template <typename T>
  T operator()(const T& x) const {
    T acc(0);
    for (int q = degree(); q >= 1; --q) acc = (acc + T(coefficients_[q - 1] * coefficients_[q - 1])) * x;
    return acc;
  }

  /// xi'(1) = sum_q q c_q^2.
  double derivative_at_one() const noexcept;

  /// Converts back to the sigma notation.
  MixtureSpec to_spec() const;

 private:
  Eigen::VectorXd coefficients_;
};

/// One coupling J_S. Bit k of `mask` set means spin k+1 is in S.
struct Coupling {
  std::uint64_t mask = 0;
  int order = 0;
  double value = 0.0;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// A sampled set of couplings for n spins. Couplings are stored for every subset of size
/// 1..d in canonical order (size ascending, then lexicographic in sorted index lists),
/// including exact zeros when sigma_q = 0.
class ProblemInstance {
 public:
  ProblemInstance(int n, MixtureSpec spec, std::uint64_t seed, std::vector<Coupling> couplings);

  int num_spins() const noexcept { return n_; }
  const MixtureSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<Coupling>& couplings() const noexcept { return couplings_; }

  /// Scale n^{(1-q)/2} applied to order-q couplings in the cost function.
  double order_scale(int q) const noexcept;

  friend bool operator==(const ProblemInstance& a, const ProblemInstance& b) {
    return a.n_ == b.n_ && a.spec_ == b.spec_ && a.seed_ == b.seed_ && a.couplings_ == b.couplings_;
  }

 private:
  int n_;
  MixtureSpec spec_;
  std::uint64_t seed_;
  std::vector<Coupling> couplings_;
};

/// Largest n supported by the bitmask subset representation.
inline constexpr int kMaxInstanceSpins = 63;
/// Upper bound on the number of materialized couplings.
inline constexpr std::uint64_t kMaxCouplings = 50'000'000;

/// Name of the Gaussian generator, recorded in run manifests.
inline constexpr const char* kGaussianGenerator =
    "mt19937_64(seed_seq{seed_lo,seed_hi,n}) + 53-bit uniforms + Marsaglia polar";

/// Draws every J_S independently from N(0, sigma_{|S|}^2). Pure function of (spec, n, seed).
/// Throws TooFewSpins when n < d, TooLarge beyond kMaxInstanceSpins or kMaxCouplings.
ProblemInstance sample_instance(const MixtureSpec& spec, int n, std::uint64_t seed);

/// H(z) = sum_q n^{(1-q)/2} sum_{|S|=q} J_S z_S for a string of +-1 entries.
double cost(const ProblemInstance& instance, std::span<const int> z);

/// Spin string for basis index `bits`: bit k = 0 maps to z_{k+1} = +1, bit k = 1 to -1.
std::vector<int> spins_from_bits(std::uint64_t bits, int n);

/// Number of size-q subsets of an n-set, exact; throws Overflow beyond 64 bits.
std::uint64_t binomial_u64(int n, int q);

/// Per-degree summary from fit_mixture_spec.
struct DegreeFit {
  int order = 0;
  std::uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double mean_standard_error = 0.0;
};

enum class FitWarning { ScalingConvention, InsufficientSamples, NonZeroMean };
std::string_view to_string(FitWarning w) noexcept;

struct SpecFit {
  MixtureSpec spec;
  std::vector<DegreeFit> degrees;
  std::vector<FitWarning> warnings;
};

/// Estimates sigma_q as the per-degree sample standard deviation of the given couplings.
///
/// The couplings are read as the J_S of the n^{(1-q)/2}-scaled model. A Hamiltonian given
/// without that scaling must be rescaled by the caller first; the estimate cannot detect
/// which convention produced the numbers, so ScalingConvention is always reported.
/// Degrees with fewer than two couplings fall back to |J| and report InsufficientSamples.
SpecFit fit_mixture_spec(int d, std::span<const Coupling> couplings);
SpecFit fit_mixture_spec(const ProblemInstance& instance);

}  // namespace msqaoa
