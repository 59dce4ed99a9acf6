#include "msqaoa/model.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace msqaoa {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegreeZero: return "DegreeZero";
    case ErrorCode::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorCode::NegativeSigma: return "NegativeSigma";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::TooFewSpins: return "TooFewSpins";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonBinaryEntry: return "NonBinaryEntry";
    case ErrorCode::QOutOfRange: return "QOutOfRange";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorCode::NegativeVariance: return "NegativeVariance";
    case ErrorCode::NonPositiveM: return "NonPositiveM";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::SignError: return "SignError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::uint64_t factorial(int q) {
  if (q < 0 || q > kMaxDegree) throw Error(ErrorCode::RangeError, "factorial argument " + std::to_string(q));
  std::uint64_t f = 1;
  for (int k = 2; k <= q; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

std::uint64_t binomial_u64(int n, int q) {
  if (q < 0 || n < 0 || q > n) return 0;
  q = std::min(q, n - q);
  unsigned __int128 c = 1;
  for (int k = 1; k <= q; ++k) {
    c = c * static_cast<unsigned>(n - q + k) / static_cast<unsigned>(k);
    if (c > UINT64_MAX) throw Error(ErrorCode::Overflow, "binomial(" + std::to_string(n) + "," + std::to_string(q) + ")");
  }
  return static_cast<std::uint64_t>(c);
}

double MixtureSpec::damping_rate() const noexcept {
  double k = 0.0;
  for (int q = 1; q <= degree(); ++q) k += variance(q) / static_cast<double>(factorial(q - 1));
  return k;
}

MixtureSpec make_mixture_spec(int d, std::span<const double> sigmas) {
  if (d < 1) throw Error(ErrorCode::DegreeZero, "degree bound must be at least 1");
  if (d > kMaxDegree) throw Error(ErrorCode::DegreeTooLarge, "degree bound " + std::to_string(d) + " exceeds " + std::to_string(kMaxDegree));
  if (static_cast<int>(sigmas.size()) != d)
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(d) + " sigmas, got " + std::to_string(sigmas.size()));
  bool any_positive = false;
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorCode::NegativeSigma, "sigma must be finite and non-negative");
    any_positive = any_positive || s > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::AllZero, "at least one sigma must be positive");
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = sigmas[i];
  return MixtureSpec(std::move(v));
}

MixtureSpec from_mixture_function(int d, std::span<const double> cs) {
  if (d < 1) throw Error(ErrorCode::DegreeZero, "degree bound must be at least 1");
  if (d > kMaxDegree) throw Error(ErrorCode::DegreeTooLarge, "degree bound " + std::to_string(d) + " exceeds " + std::to_string(kMaxDegree));
  if (static_cast<int>(cs.size()) != d)
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(d) + " coefficients, got " + std::to_string(cs.size()));
  std::vector<double> sigmas(d);
  for (int q = 1; q <= d; ++q) sigmas[q - 1] = cs[q - 1] * std::sqrt(static_cast<double>(factorial(q)));
  return make_mixture_spec(d, sigmas);
}

MixtureSpec pure_d_spec(int d) {
  if (d < 1) throw Error(ErrorCode::DegreeZero, "degree bound must be at least 1");
  if (d > kMaxDegree) throw Error(ErrorCode::DegreeTooLarge, "degree bound " + std::to_string(d));
  std::vector<double> sigmas(d, 0.0);
  sigmas[d - 1] = std::sqrt(static_cast<double>(factorial(d)) / 2.0);
  return make_mixture_spec(d, sigmas);
}

MixtureFunction::MixtureFunction(const MixtureSpec& spec) : coefficients_(spec.degree()) {
  for (int q = 1; q <= spec.degree(); ++q)
    coefficients_[q - 1] = spec.sigma(q) / std::sqrt(static_cast<double>(factorial(q)));
}

double MixtureFunction::derivative_at_one() const noexcept {
  double s = 0.0;
  for (int q = 1; q <= degree(); ++q) s += q * coefficients_[q - 1] * coefficients_[q - 1];
  return s;
}

MixtureSpec MixtureFunction::to_spec() const {
  return from_mixture_function(degree(), std::span<const double>(coefficients_.data(), coefficients_.size()));
}

ProblemInstance::ProblemInstance(int n, MixtureSpec spec, std::uint64_t seed, std::vector<Coupling> couplings)
    : n_(n), spec_(std::move(spec)), seed_(seed), couplings_(std::move(couplings)) {
  const int d = spec_.degree();
  if (n_ < d) throw Error(ErrorCode::TooFewSpins, "n=" + std::to_string(n_) + " < d=" + std::to_string(d));
  if (n_ > kMaxInstanceSpins) throw Error(ErrorCode::TooLarge, "instances support at most 63 spins");
  std::uint64_t expected = 0;
  for (int q = 1; q <= d; ++q) expected += binomial_u64(n_, q);
  if (couplings_.size() != expected)
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(expected) + " couplings, got " + std::to_string(couplings_.size()));
  const std::uint64_t universe = (n_ == 64) ? ~0ULL : ((1ULL << n_) - 1);
  for (std::size_t i = 0; i < couplings_.size(); ++i) {
    const Coupling& c = couplings_[i];
    if (c.order < 1 || c.order > d || std::popcount(c.mask) != c.order || (c.mask & ~universe) != 0)
      throw Error(ErrorCode::RangeError, "coupling " + std::to_string(i) + " has an invalid subset");
    if (i > 0) {
      const Coupling& p = couplings_[i - 1];
      // Sorted index lists compare at the smallest element of the symmetric difference.
      bool ordered = p.order < c.order;
      if (p.order == c.order) {
        const std::uint64_t diff = p.mask ^ c.mask;
        ordered = diff != 0 && (p.mask & (diff & -diff)) != 0;
      }
      if (!ordered) throw Error(ErrorCode::RangeError, "couplings not in canonical order at " + std::to_string(i));
    }
  }
}

double ProblemInstance::order_scale(int q) const noexcept {
  return std::pow(static_cast<double>(n_), 0.5 * (1 - q));
}

namespace {

// Visits all size-q subsets of {0..n-1} in lexicographic order of sorted index lists.
template <typename F>
void for_each_subset(int n, int q, F&& f) {
  std::vector<int> idx(q);
  for (int i = 0; i < q; ++i) idx[i] = i;
  while (true) {
    std::uint64_t mask = 0;
    for (int i : idx) mask |= 1ULL << i;
    f(mask);
    int i = q - 1;
    while (i >= 0 && idx[i] == n - q + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < q; ++j) idx[j] = idx[j - 1] + 1;
  }
}

class PolarGaussian {
 public:
  explicit PolarGaussian(std::mt19937_64& engine) : engine_(engine) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64& engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

ProblemInstance sample_instance(const MixtureSpec& spec, int n, std::uint64_t seed) {
  const int d = spec.degree();
  if (n < d) throw Error(ErrorCode::TooFewSpins, "n=" + std::to_string(n) + " < d=" + std::to_string(d));
  if (n > kMaxInstanceSpins) throw Error(ErrorCode::TooLarge, "instances support at most 63 spins");
  std::uint64_t total = 0;
  for (int q = 1; q <= d; ++q) {
    total += binomial_u64(n, q);
    if (total > kMaxCouplings) throw Error(ErrorCode::TooLarge, "instance would hold more than 5e7 couplings");
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n)};
  std::mt19937_64 engine(seq);
  PolarGaussian gaussian(engine);

  std::vector<Coupling> couplings;
  couplings.reserve(total);
  for (int q = 1; q <= d; ++q) {
    const double sigma = spec.sigma(q);
    for_each_subset(n, q, [&](std::uint64_t mask) {
      const double g = gaussian();
      couplings.push_back({mask, q, sigma > 0.0 ? sigma * g : 0.0});
    });
  }
  return ProblemInstance(n, spec, seed, std::move(couplings));
}

double cost(const ProblemInstance& instance, std::span<const int> z) {
  const int n = instance.num_spins();
  if (static_cast<int>(z.size()) != n)
    throw Error(ErrorCode::LengthMismatch, "spin string has " + std::to_string(z.size()) + " entries, expected " + std::to_string(n));
  std::uint64_t negative = 0;
  for (int k = 0; k < n; ++k) {
    if (z[k] == -1) negative |= 1ULL << k;
    else if (z[k] != 1) throw Error(ErrorCode::NonBinaryEntry, "spin entries must be +1 or -1");
  }
  double total = 0.0;
  int current_order = 0;
  double partial = 0.0;
  for (const Coupling& c : instance.couplings()) {
    if (c.order != current_order) {
      if (current_order > 0) total += instance.order_scale(current_order) * partial;
      current_order = c.order;
      partial = 0.0;
    }
    partial += (std::popcount(c.mask & negative) & 1) ? -c.value : c.value;
  }
  if (current_order > 0) total += instance.order_scale(current_order) * partial;
  return total;
}

std::vector<int> spins_from_bits(std::uint64_t bits, int n) {
  std::vector<int> z(n);
  for (int k = 0; k < n; ++k) z[k] = ((bits >> k) & 1ULL) ? -1 : 1;
  return z;
}

std::string_view to_string(FitWarning w) noexcept {
  switch (w) {
    case FitWarning::ScalingConvention: return "ScalingConvention";
    case FitWarning::InsufficientSamples: return "InsufficientSamples";
    case FitWarning::NonZeroMean: return "NonZeroMean";
  }
  return "Unknown";
}

SpecFit fit_mixture_spec(int d, std::span<const Coupling> couplings) {
  if (d < 1) throw Error(ErrorCode::DegreeZero, "degree bound must be at least 1");
  std::vector<DegreeFit> degrees(d);
  std::vector<double> sum(d, 0.0);
  for (const Coupling& c : couplings) {
    if (c.order < 1 || c.order > d) throw Error(ErrorCode::RangeError, "coupling order outside 1..d");
    sum[c.order - 1] += c.value;
    degrees[c.order - 1].count += 1;
  }
  std::vector<double> sq(d, 0.0);
  for (int q = 1; q <= d; ++q) {
    degrees[q - 1].order = q;
    if (degrees[q - 1].count > 0) degrees[q - 1].mean = sum[q - 1] / static_cast<double>(degrees[q - 1].count);
  }
  for (const Coupling& c : couplings) {
    const double dev = c.value - degrees[c.order - 1].mean;
    sq[c.order - 1] += dev * dev;
  }

  std::vector<FitWarning> warnings{FitWarning::ScalingConvention};
  bool insufficient = false;
  bool nonzero_mean = false;
  std::vector<double> sigmas(d, 0.0);
  for (auto& df : degrees) {
    const int i = df.order - 1;
    if (df.count >= 2) {
      df.stddev = std::sqrt(sq[i] / static_cast<double>(df.count - 1));
      df.mean_standard_error = df.stddev / std::sqrt(static_cast<double>(df.count));
      if (df.mean_standard_error > 0.0 && std::abs(df.mean) > 3.0 * df.mean_standard_error) nonzero_mean = true;
    } else {
      if (df.count == 1) df.stddev = std::abs(df.mean);
      insufficient = true;
    }
    sigmas[i] = df.stddev;
  }
  if (insufficient) warnings.push_back(FitWarning::InsufficientSamples);
  if (nonzero_mean) warnings.push_back(FitWarning::NonZeroMean);
  return SpecFit{make_mixture_spec(d, sigmas), std::move(degrees), std::move(warnings)};
}

SpecFit fit_mixture_spec(const ProblemInstance& instance) {
  return fit_mixture_spec(instance.spec().degree(), instance.couplings());
}

}  // namespace msqaoa
