#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "msqaoa/closed_form.hpp"
#include "msqaoa/model.hpp"

namespace msqaoa {

using WideInt = __int128;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Counts of positions k with (z_k, z'_k) = (+,+), (+,-), (-,+), (-,-) for a string pair.
struct Sketch {
  int npp = 0;
  int npm = 0;
  int nmp = 0;
  int nmm = 0;

  int n() const noexcept { return npp + npm + nmp + nmm; }
  /// Number of disagreeing positions.
  int disagreements() const noexcept { return npm + nmp; }
  /// n_{+-} - n_{-+}
  int u() const noexcept { return npm - nmp; }
  /// n_{++} - n_{--}
  int v() const noexcept { return npp - nmm; }
  /// Number of +1 entries in z and in z'.
  int plus_first() const noexcept { return npp + npm; }
  int plus_second() const noexcept { return npp + nmp; }

  friend bool operator==(const Sketch&, const Sketch&) = default;
};

/// Sketch of an explicit pair of +-1 strings of equal length.
Sketch sketch_of(std::span<const int> z, std::span<const int> zp);

/// Single-spin mixer matrix elements <z_k|e^{i beta X}|+1><+1|e^{-i beta X}|z'_k>.
struct QFactors {
  std::complex<double> qpp, qpm, qmp, qmm;
};
QFactors q_factors(double beta);

/// sum_{|S|=q} (z_S - z'_S) for any pair with the given sketch. Throws QOutOfRange unless
/// 0 <= q <= n, Overflow if the value does not fit in 128 bits.
WideInt f_q(int q, const Sketch& sketch);

/// sum_{|S|=q} (z_S - z'_S)^2 = 4 sum_{k odd} C(t,k) C(n-t,q-k), with t the number of
/// disagreeing positions. Throws RangeError unless 0 <= t <= n and 1 <= q <= n.
WideInt g_q(int q, int t, int n);

/// Exponent triple (a, b, c) of (n_{+-}-n_{-+})^a (n_{++}-n_{--})^b n^c.
using Monomial = std::array<int, 3>;

/// Exact coefficients of f_q as a polynomial in (n_{+-}-n_{-+}), (n_{++}-n_{--}) and n.
/// Only nonzero coefficients are returned. Results are cached per q.
const std::map<Monomial, Rational>& f_q_abc(int q);

struct SketchOptions {
  /// Largest n accepted by the sketch engines.
  int budget = 512;
  /// Worker count; 0 means msqaoa::default_threads().
  int threads = 0;
};

/// Worker count from MSQAOA_THREADS, else hardware concurrency.
int default_threads();

/// E_J<e^{i lambda H/n}> by direct summation over all C(n+3,3) sketches in the
/// log-magnitude domain with compensated accumulation.
///
/// The sketch terms alternate in phase and their absolute sum grows like
/// (1 + |sin 2beta|)^n, so the attainable relative accuracy degrades with n.
std::complex<double> generating_function(const MixtureSpec& spec, const Angles& angles, int n, double lambda,
                                         const SketchOptions& options = {});

enum class MomentMethod { Sketch, SketchDirect, Oracle };
std::string_view to_string(MomentMethod m) noexcept;

/// Finite-n disorder-averaged moments of H/n.
struct MomentReport {
  int n = 0;
  double first = 0.0;
  double second = 0.0;
  double variance = 0.0;
  /// Set when a negative variance within rounding (>= -1e-10) was clamped to zero.
  bool variance_clamped = false;
  MomentMethod method = MomentMethod::Sketch;
  MixtureSpec spec;
  Angles angles;
};

/// Exact finite-n E_J<H/n> and E_J<(H/n)^2>.
///
/// The lambda-derivatives are taken analytically. f_q is expanded into its
/// (n_{+-}-n_{-+})^a (n_{++}-n_{--})^b n^c monomials, which reduces every sketch sum to
/// the T-sums below; the alternating n_{+-} sums (A-factors) are then carried out in
/// exact integer arithmetic, so the result stays accurate at large n where direct
/// enumeration cancels catastrophically.
MomentReport sketch_moments(const MixtureSpec& spec, const Angles& angles, int n, const SketchOptions& options = {});

/// Same moments by literal enumeration of every sketch. Accurate only while
/// (1 + |sin 2beta|)^n stays moderate; exposed for cross-checking.
MomentReport sketch_moments_direct(const MixtureSpec& spec, const Angles& angles, int n,
                                   const SketchOptions& options = {});

/// Largest n accepted by the double-string oracle.
inline constexpr int kOracleMaxSpins = 14;

/// E_J<e^{i lambda H/n}> summed over all 4^n string pairs (z, z') with explicit
/// elementary-symmetric subset sums. Throws TooLarge for n > kOracleMaxSpins.
std::complex<double> oracle_generating_function(const MixtureSpec& spec, const Angles& angles, int n, double lambda);

/// Moments from the double-string sum, lambda-derivatives taken analytically.
MomentReport oracle_moments(const MixtureSpec& spec, const Angles& angles, int n);

/// A^a_t = sum_{k} C(t,k) (2k - t)^a Q_{+-}^k Q_{-+}^{t-k}. The alternating integer part is
/// summed exactly, so A^a_t is exactly zero for t > a.
std::complex<double> a_factor(int a, int t, double beta);

/// B^b_m = sum_{k} C(m,k) (2k - m)^b Q_{++}^k Q_{--}^{m-k}.
double b_factor(int b, int m, double beta);

/// T^{ab}_xi = n^{-xi} sum_t C(n,t) exp(-gamma^2 sum_q gbar_q(t) sigma_q^2 / (2 n^{q-1})) A^a_t B^b_{n-t}.
std::complex<double> t_sum(const MixtureSpec& spec, const Angles& angles, int n, int a, int b, int xi);

}  // namespace msqaoa
