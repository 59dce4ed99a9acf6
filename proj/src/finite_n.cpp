#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "msqaoa/finite_n.hpp"
#include "sketch_internal.hpp"

namespace msqaoa {

using detail::CompensatedComplex;

int default_threads() {
  if (const char* env = std::getenv("MSQAOA_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string_view to_string(MomentMethod m) noexcept {
  switch (m) {
    case MomentMethod::Sketch: return "sketch";
    case MomentMethod::SketchDirect: return "sketch-direct";
    case MomentMethod::Oracle: return "oracle";
  }
  return "unknown";
}

namespace {

constexpr double kImaginaryTolerance = 1e-9;
constexpr double kVarianceTolerance = 1e-10;
constexpr double kLogCutoff = 60.0;
constexpr int kBlockSize = 16;

int resolve_threads(const SketchOptions& o) { return o.threads > 0 ? o.threads : default_threads(); }

void check_sketch_n(int n, const SketchOptions& options) {
  if (n < 1) throw Error(ErrorCode::RangeError, "n must be at least 1");
  if (n > options.budget)
    throw Error(ErrorCode::BudgetExceeded,
                "n=" + std::to_string(n) + " exceeds sketch budget " + std::to_string(options.budget));
}

// sum_q sigma_q^2 C(n,q) / n^{q+1}: the lambda^2 coefficient (times 2) of the exponent.
double quadratic_constant(const MixtureSpec& spec, int n) {
  long double k = 0.0L;
  const long double nn = n;
  for (int q = 1; q <= std::min(spec.degree(), n); ++q)
    k += spec.variance(q) * detail::exact_binomial(n, q).convert_to<long double>() / std::pow(nn, q + 1);
  return static_cast<double>(k);
}

// gamma^2 sum_q gbar_q(t) sigma_q^2 / (2 n^{q-1}) for t = 0..n.
std::vector<long double> damping_table(const MixtureSpec& spec, double gamma, int n) {
  std::vector<long double> damp(n + 1, 0.0L);
  const long double g2 = static_cast<long double>(gamma) * gamma;
  for (int q = 1; q <= std::min(spec.degree(), n); ++q) {
    if (spec.variance(q) == 0.0) continue;
    const long double scale = g2 * spec.variance(q) / (2.0L * std::pow(static_cast<long double>(n), q - 1));
    for (int t = 0; t <= n; ++t)
      damp[t] += scale * detail::disagreement_square_sum(q, t, n).convert_to<long double>();
  }
  return damp;
}

MomentReport finalize(const MixtureSpec& spec, const Angles& angles, int n, MomentMethod method,
                      std::complex<double> first, std::complex<double> second) {
  auto check_real = [](std::complex<double> z, const char* what) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
        std::abs(z.imag()) > kImaginaryTolerance * std::max(1.0, std::abs(z.real())))
      throw Error(ErrorCode::ImaginaryResidue, std::string(what) + " moment has imaginary residue " + std::to_string(z.imag()));
  };
  check_real(first, "first");
  check_real(second, "second");
  double variance = second.real() - first.real() * first.real();
  bool clamped = false;
  if (variance < 0.0) {
    if (variance < -kVarianceTolerance)
      throw Error(ErrorCode::NegativeVariance, "variance " + std::to_string(variance) + " below rounding tolerance");
    variance = 0.0;
    clamped = true;
  }
  return MomentReport{n, first.real(), second.real(), variance, clamped, method, spec, angles};
}

// Per-sketch data for direct enumeration: log|multinomial * prod Q| and the exact phase.
class DirectEnumerator {
 public:
  DirectEnumerator(const MixtureSpec& spec, const Angles& angles, int n)
      : spec_(spec), angles_(angles), n_(n), damp_(damping_table(spec, angles.gamma, n)) {
    log_fact_.resize(n + 1);
    for (int k = 0; k <= n; ++k) log_fact_[k] = std::lgamma(static_cast<double>(k) + 1.0);
    const double c = std::cos(angles.beta), s = std::sin(angles.beta);
    log_c2_ = c == 0.0 ? -INFINITY : 2.0 * std::log(std::abs(c));
    log_s2_ = s == 0.0 ? -INFINITY : 2.0 * std::log(std::abs(s));
    log_sc_ = (s == 0.0 || c == 0.0) ? -INFINITY : std::log(std::abs(s * c));
    negative_sc_ = s * c < 0.0;

    // F(P, R) = sum_q sigma_q^2 (E_q(P) - E_q(R)) / n^q with E_q(P) = sum_{|S|=q} z_S.
    weighted_elem_.assign(n + 1, 0.0L);
    for (int q = 1; q <= std::min(spec.degree(), n); ++q) {
      if (spec.variance(q) == 0.0) continue;
      const long double scale = spec.variance(q) / std::pow(static_cast<long double>(n), q);
      for (int p = 0; p <= n; ++p)
        weighted_elem_[p] += scale * detail::elementary_sum(q, p, n).convert_to<long double>();
    }
    quad_ = quadratic_constant(spec, n);
  }

  // Visits every sketch with a nonzero Q-product: f(log_magnitude, phase, F).
  template <typename F>
  void visit_block(int block, F&& f) const {
    const double log_n_fact = log_fact_[n_];
    for (int t = block * kBlockSize; t <= std::min(n_, (block + 1) * kBlockSize - 1); ++t) {
      if (t > 0 && log_sc_ == -INFINITY) continue;
      const double base_t = log_n_fact - static_cast<double>(damp_[t]) + (t > 0 ? t * log_sc_ : 0.0);
      for (int npm = 0; npm <= t; ++npm) {
        const int nmp = t - npm;
        // (-i sc)^npm (i sc)^nmp = |sc|^t sign(sc)^t i^{nmp - npm}
        const int quarter = (((nmp - npm) % 4) + 4) % 4;
        std::complex<double> phase = quarter == 0 ? 1.0 : quarter == 1 ? std::complex<double>(0, 1)
                                   : quarter == 2 ? -1.0 : std::complex<double>(0, -1);
        if (negative_sc_ && (t % 2 == 1)) phase = -phase;
        const double base = base_t - log_fact_[npm] - log_fact_[nmp];
        for (int npp = 0; npp <= n_ - t; ++npp) {
          const int nmm = n_ - t - npp;
          if ((npp > 0 && log_c2_ == -INFINITY) || (nmm > 0 && log_s2_ == -INFINITY)) continue;
          const double logmag = base - log_fact_[npp] - log_fact_[nmm] + (npp > 0 ? npp * log_c2_ : 0.0) +
                                (nmm > 0 ? nmm * log_s2_ : 0.0);
          const double fval = static_cast<double>(weighted_elem_[npp + npm] - weighted_elem_[npp + nmp]);
          f(logmag, phase, fval);
        }
      }
    }
  }

  int blocks() const { return n_ / kBlockSize + 1; }
  double quad() const { return quad_; }
  double gamma() const { return angles_.gamma; }

 private:
  const MixtureSpec& spec_;
  Angles angles_;
  int n_;
  std::vector<long double> damp_;
  std::vector<double> log_fact_;
  std::vector<long double> weighted_elem_;
  double log_c2_, log_s2_, log_sc_;
  bool negative_sc_;
  double quad_;
};

struct DirectSums {
  std::complex<double> zeroth, first, second;
};

// Sums w, w F, w F^2 over all sketches, with w including exp(-gamma lambda F - lambda^2 K/2).
DirectSums direct_sums(const DirectEnumerator& e, double lambda, int threads) {
  const double lam_lin = e.gamma() * lambda;
  const double lam_quad = 0.5 * lambda * lambda * e.quad();
  const int blocks = e.blocks();

  std::vector<double> block_max(blocks, -INFINITY);
  detail::parallel_blocks(blocks, threads, [&](int b) {
    double m = -INFINITY;
    e.visit_block(b, [&](double logmag, std::complex<double>, double f) {
      m = std::max(m, logmag - lam_lin * f - lam_quad);
    });
    block_max[b] = m;
  });
  double global_max = -INFINITY;
  for (double m : block_max) global_max = std::max(global_max, m);

  std::vector<CompensatedComplex> s0(blocks), s1(blocks), s2(blocks);
  detail::parallel_blocks(blocks, threads, [&](int b) {
    e.visit_block(b, [&](double logmag, std::complex<double> phase, double f) {
      const double l = logmag - lam_lin * f - lam_quad - global_max;
      if (l < -kLogCutoff) return;
      const std::complex<double> w = std::exp(l) * phase;
      s0[b].add(w);
      s1[b].add(w * f);
      s2[b].add(w * (f * f));
    });
  });
  CompensatedComplex t0, t1, t2;
  for (int b = 0; b < blocks; ++b) {
    t0.add(s0[b]);
    t1.add(s1[b]);
    t2.add(s2[b]);
  }
  const double scale = std::exp(global_max);
  return {t0.value() * scale, t1.value() * scale, t2.value() * scale};
}

// Weighted-binomial sums B^b_m for b = 0..max_b.
std::vector<long double> b_factors(int max_b, int m, double beta) {
  std::vector<long double> out(max_b + 1, 0.0L);
  const long double c = std::cos(static_cast<long double>(beta));
  const long double p = c * c;
  auto accumulate = [&](int k, long double weight) {
    const long double x = 2.0L * k - m;
    long double pw = 1.0L;
    for (int b = 0; b <= max_b; ++b) {
      out[b] += weight * pw;
      pw *= x;
    }
  };
  if (p <= 0.0L) {
    accumulate(0, 1.0L);
  } else if (p >= 1.0L) {
    accumulate(m, 1.0L);
  } else {
    const long double lp = std::log(p), lq = std::log1p(-p);
    const long double lm = std::lgamma(static_cast<long double>(m) + 1.0L);
    long double peak = -INFINITY;
    std::vector<long double> logw(m + 1);
    for (int k = 0; k <= m; ++k) {
      logw[k] = lm - std::lgamma(k + 1.0L) - std::lgamma(m - k + 1.0L) + k * lp + (m - k) * lq;
      peak = std::max(peak, logw[k]);
    }
    for (int k = 0; k <= m; ++k)
      if (logw[k] >= peak - kLogCutoff) accumulate(k, std::exp(logw[k]));
  }
  return out;
}

std::complex<long double> a_factor_ld(int a, int t, double beta) {
  if (t < 0 || a < 0) throw Error(ErrorCode::RangeError, "a and t must be non-negative");
  BigInt sum = 0;
  for (int k = 0; k <= t; ++k) {
    BigInt term = detail::exact_binomial(t, k) * boost::multiprecision::pow(BigInt(2 * k - t), static_cast<unsigned>(a));
    if (k % 2 == 0) sum += term;
    else sum -= term;
  }
  if (sum == 0) return {0.0L, 0.0L};
  // Q_{+-}^k Q_{-+}^{t-k} = (i sc)^t (-1)^k
  const long double sc = std::sin(static_cast<long double>(beta)) * std::cos(static_cast<long double>(beta));
  const long double mag = sum.convert_to<long double>() * std::pow(sc, t);
  switch (t % 4) {
    case 0: return {mag, 0.0L};
    case 1: return {0.0L, mag};
    case 2: return {-mag, 0.0L};
    default: return {0.0L, -mag};
  }
}

// S(a, b) = n^xi T^{ab}_xi for a <= max_a, b <= max_b.
class TSums {
 public:
  TSums(const MixtureSpec& spec, const Angles& angles, int n, int max_a, int max_b)
      : max_a_(max_a), max_b_(max_b), values_((max_a + 1) * (max_b + 1)) {
    const int max_t = std::min(max_a, n);
    const auto damp = damping_table(spec, angles.gamma, n);
    std::vector<std::vector<long double>> b_vals(max_t + 1);
    std::vector<long double> weight(max_t + 1);
    for (int t = 0; t <= max_t; ++t) {
      b_vals[t] = b_factors(max_b, n - t, angles.beta);
      weight[t] = detail::exact_binomial(n, t).convert_to<long double>() * std::exp(-damp[t]);
    }
    for (int a = 0; a <= max_a; ++a) {
      std::vector<std::complex<long double>> av(max_t + 1);
      for (int t = 0; t <= std::min(a, max_t); ++t) av[t] = a_factor_ld(a, t, angles.beta);
      for (int b = 0; b <= max_b; ++b) {
        std::complex<long double> s = 0.0L;
        for (int t = 0; t <= std::min(a, max_t); ++t) s += weight[t] * av[t] * b_vals[t][b];
        values_[a * (max_b + 1) + b] = s;
      }
    }
  }

  std::complex<long double> operator()(int a, int b) const { return values_[a * (max_b_ + 1) + b]; }

 private:
  int max_a_, max_b_;
  std::vector<std::complex<long double>> values_;
};

}  // namespace

std::complex<double> generating_function(const MixtureSpec& spec, const Angles& angles, int n, double lambda,
                                         const SketchOptions& options) {
  check_sketch_n(n, options);
  DirectEnumerator e(spec, angles, n);
  return direct_sums(e, lambda, resolve_threads(options)).zeroth;
}

MomentReport sketch_moments_direct(const MixtureSpec& spec, const Angles& angles, int n, const SketchOptions& options) {
  check_sketch_n(n, options);
  DirectEnumerator e(spec, angles, n);
  const DirectSums s = direct_sums(e, 0.0, resolve_threads(options));
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> first = i * angles.gamma * s.first;
  const std::complex<double> second = e.quad() - angles.gamma * angles.gamma * s.second;
  return finalize(spec, angles, n, MomentMethod::SketchDirect, first, second);
}

MomentReport sketch_moments(const MixtureSpec& spec, const Angles& angles, int n, const SketchOptions& options) {
  check_sketch_n(n, options);
  const int d = spec.degree();
  const long double nn = n;

  // F(u, v) = sum_q sigma_q^2 f_q(u, v, n) / n^q collected as coefficients of u^a v^b.
  std::vector<long double> coeff((d + 1) * (d + 1), 0.0L);
  auto cf = [&](int a, int b) -> long double& { return coeff[a * (d + 1) + b]; };
  for (int q = 1; q <= d; ++q) {
    if (spec.variance(q) == 0.0) continue;
    const long double scale = spec.variance(q) / std::pow(nn, q);
    for (const auto& [mono, value] : f_q_abc(q))
      cf(mono[0], mono[1]) += scale * value.convert_to<long double>() * std::pow(nn, mono[2]);
  }

  const TSums sums(spec, angles, n, 2 * d, 2 * d);
  std::complex<long double> f1 = 0.0L, f2 = 0.0L;
  for (int a = 0; a <= d; ++a)
    for (int b = 0; b <= d; ++b) {
      if (cf(a, b) == 0.0L) continue;
      f1 += cf(a, b) * sums(a, b);
      for (int a2 = 0; a2 <= d; ++a2)
        for (int b2 = 0; b2 <= d; ++b2)
          if (cf(a2, b2) != 0.0L) f2 += cf(a, b) * cf(a2, b2) * sums(a + a2, b + b2);
    }
  const std::complex<long double> i(0.0L, 1.0L);
  const long double g = angles.gamma;
  const std::complex<long double> first = i * g * f1;
  const std::complex<long double> second = static_cast<long double>(quadratic_constant(spec, n)) - g * g * f2;
  return finalize(spec, angles, n, MomentMethod::Sketch, std::complex<double>(first), std::complex<double>(second));
}

namespace {

struct OracleTables {
  int n;
  std::vector<std::complex<double>> left, right;  // <z|e^{i beta B}|+1>, <+1|e^{-i beta B}|z>
  std::vector<double> weighted_elem;              // sum_q sigma_q^2 e_q(z) / n^q
  std::vector<double> overlap_damp;               // indexed by z XOR z'
};

OracleTables oracle_tables(const MixtureSpec& spec, const Angles& angles, int n) {
  if (n < 1) throw Error(ErrorCode::RangeError, "n must be at least 1");
  if (n > kOracleMaxSpins) throw Error(ErrorCode::TooLarge, "oracle enumerates 4^n pairs; n <= 14 required");
  const std::size_t dim = std::size_t{1} << n;
  const int d = std::min(spec.degree(), n);
  OracleTables tab{n, std::vector<std::complex<double>>(dim), std::vector<std::complex<double>>(dim),
                   std::vector<double>(dim), std::vector<double>(dim)};
  const double c = std::cos(angles.beta), s = std::sin(angles.beta);
  const double g2 = angles.gamma * angles.gamma;
  std::vector<long long> e(d + 1);
  for (std::size_t z = 0; z < dim; ++z) {
    std::complex<double> l = 1.0, r = 1.0;
    std::fill(e.begin(), e.end(), 0);
    e[0] = 1;
    for (int k = 0; k < n; ++k) {
      const bool minus = (z >> k) & 1U;
      l *= minus ? std::complex<double>(0.0, s) : std::complex<double>(c, 0.0);
      r *= minus ? std::complex<double>(0.0, -s) : std::complex<double>(c, 0.0);
      const int spin = minus ? -1 : 1;
      for (int q = std::min(d, k + 1); q >= 1; --q) e[q] += spin * e[q - 1];
    }
    tab.left[z] = l;
    tab.right[z] = r;
    double we = 0.0, od = 0.0;
    for (int q = 1; q <= d; ++q) {
      const double var = spec.variance(q);
      we += var * static_cast<double>(e[q]) / std::pow(static_cast<double>(n), q);
      // (z_S - z'_S)^2 = 2 - 2 (zz')_S, so g_q = 2 C(n,q) - 2 e_q(zz').
      const double gq = 2.0 * static_cast<double>(binomial_u64(n, q)) - 2.0 * static_cast<double>(e[q]);
      od += g2 * var * gq / (2.0 * std::pow(static_cast<double>(n), q - 1));
    }
    tab.weighted_elem[z] = we;
    tab.overlap_damp[z] = od;
  }
  return tab;
}

DirectSums oracle_sums(const OracleTables& tab, double lambda_lin, double lambda_quad) {
  const std::size_t dim = tab.left.size();
  const int blocks = static_cast<int>((dim + 63) / 64);
  std::vector<CompensatedComplex> s0(blocks), s1(blocks), s2(blocks);
  detail::parallel_blocks(blocks, default_threads(), [&](int b) {
    for (std::size_t z = static_cast<std::size_t>(b) * 64; z < std::min(dim, static_cast<std::size_t>(b + 1) * 64); ++z)
      for (std::size_t zp = 0; zp < dim; ++zp) {
        const double f = tab.weighted_elem[z] - tab.weighted_elem[zp];
        const std::complex<double> w =
            tab.left[z] * tab.right[zp] * std::exp(-tab.overlap_damp[z ^ zp] - lambda_lin * f - lambda_quad);
        s0[b].add(w);
        s1[b].add(w * f);
        s2[b].add(w * (f * f));
      }
  });
  CompensatedComplex t0, t1, t2;
  for (int b = 0; b < blocks; ++b) {
    t0.add(s0[b]);
    t1.add(s1[b]);
    t2.add(s2[b]);
  }
  return {t0.value(), t1.value(), t2.value()};
}

}  // namespace

std::complex<double> oracle_generating_function(const MixtureSpec& spec, const Angles& angles, int n, double lambda) {
  const OracleTables tab = oracle_tables(spec, angles, n);
  const double quad = quadratic_constant(spec, n);
  return oracle_sums(tab, angles.gamma * lambda, 0.5 * lambda * lambda * quad).zeroth;
}

MomentReport oracle_moments(const MixtureSpec& spec, const Angles& angles, int n) {
  const OracleTables tab = oracle_tables(spec, angles, n);
  const DirectSums s = oracle_sums(tab, 0.0, 0.0);
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> first = i * angles.gamma * s.first;
  const std::complex<double> second = quadratic_constant(spec, n) * s.zeroth - angles.gamma * angles.gamma * s.second;
  return finalize(spec, angles, n, MomentMethod::Oracle, first, second);
}

std::complex<double> a_factor(int a, int t, double beta) {
  return std::complex<double>(a_factor_ld(a, t, beta));
}

double b_factor(int b, int m, double beta) {
  if (b < 0 || m < 0) throw Error(ErrorCode::RangeError, "b and m must be non-negative");
  return static_cast<double>(b_factors(b, m, beta)[b]);
}

std::complex<double> t_sum(const MixtureSpec& spec, const Angles& angles, int n, int a, int b, int xi) {
  if (n < 1) throw Error(ErrorCode::RangeError, "n must be at least 1");
  if (a < 0 || b < 0 || a + b > xi) throw Error(ErrorCode::RangeError, "t_sum needs a, b >= 0 and a + b <= xi");
  const TSums sums(spec, angles, n, a, b);
  return std::complex<double>(sums(a, b) / std::pow(static_cast<long double>(n), xi));
}

}  // namespace msqaoa
