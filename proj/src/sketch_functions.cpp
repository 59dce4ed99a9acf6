#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include "msqaoa/finite_n.hpp"
#include "sketch_internal.hpp"

namespace msqaoa {

Sketch sketch_of(std::span<const int> z, std::span<const int> zp) {
  if (z.size() != zp.size()) throw Error(ErrorCode::LengthMismatch, "strings differ in length");
  Sketch s;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if ((z[k] != 1 && z[k] != -1) || (zp[k] != 1 && zp[k] != -1))
      throw Error(ErrorCode::NonBinaryEntry, "spin entries must be +1 or -1");
    if (z[k] == 1) (zp[k] == 1 ? s.npp : s.npm) += 1;
    else (zp[k] == 1 ? s.nmp : s.nmm) += 1;
  }
  return s;
}

QFactors q_factors(double beta) {
  const double c = std::cos(beta);
  const double s = std::sin(beta);
  return {{c * c, 0.0}, {0.0, -s * c}, {0.0, s * c}, {s * s, 0.0}};
}

namespace detail {

BigInt exact_binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt c = 1;
  for (long long j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

BigInt elementary_sum(int q, int plus, int n) {
  BigInt total = 0;
  for (int k = 0; k <= q; ++k) {
    BigInt term = exact_binomial(plus, k) * exact_binomial(n - plus, q - k);
    if ((q - k) % 2 == 0) total += term;
    else total -= term;
  }
  return total;
}

BigInt disagreement_square_sum(int q, int t, int n) {
  BigInt total = 0;
  for (int k = 1; k <= q; k += 2) total += exact_binomial(t, k) * exact_binomial(n - t, q - k);
  return 4 * total;
}

}  // namespace detail

namespace {

WideInt to_wide(const BigInt& v) {
  static const BigInt lim = (BigInt(1) << 127) - 1;
  if (v > lim || v < -lim) throw Error(ErrorCode::Overflow, "value exceeds 128-bit range");
  const bool neg = v < 0;
  BigInt mag = neg ? BigInt(-v) : v;
  unsigned __int128 r = 0;
  r = static_cast<unsigned __int128>(static_cast<std::uint64_t>(mag >> 64)) << 64;
  r |= static_cast<std::uint64_t>(mag & BigInt(UINT64_MAX));
  return neg ? -static_cast<WideInt>(r) : static_cast<WideInt>(r);
}

}  // namespace

WideInt f_q(int q, const Sketch& sketch) {
  const int n = sketch.n();
  if (sketch.npp < 0 || sketch.npm < 0 || sketch.nmp < 0 || sketch.nmm < 0)
    throw Error(ErrorCode::RangeError, "sketch counts must be non-negative");
  if (q < 0 || q > n) throw Error(ErrorCode::QOutOfRange, "q=" + std::to_string(q) + " outside 0..n=" + std::to_string(n));
  return to_wide(detail::elementary_sum(q, sketch.plus_first(), n) - detail::elementary_sum(q, sketch.plus_second(), n));
}

WideInt g_q(int q, int t, int n) {
  if (t < 0 || t > n) throw Error(ErrorCode::RangeError, "t=" + std::to_string(t) + " outside 0..n");
  if (q < 1 || q > n) throw Error(ErrorCode::QOutOfRange, "q=" + std::to_string(q) + " outside 1..n");
  return to_wide(detail::disagreement_square_sum(q, t, n));
}

namespace {

// f_q is a total-degree-q polynomial in (u, v, n). It is recovered by tensor Newton
// interpolation on the nodes u_i = 2i, v_j = 2j, n_k = 4q + 2k, each of which is a valid
// sketch (n_{+-} = u, n_{-+} = 0, n_{++} - n_{--} = v). Divided differences of order
// (i, j, k) with i + j + k > q vanish identically, which is checked.
std::map<Monomial, Rational> interpolate_f_q(int q) {
  const int m = q + 1;
  auto node_u = [](int i) { return 2 * i; };
  auto node_v = [](int j) { return 2 * j; };
  auto node_n = [q](int k) { return 4 * q + 2 * k; };

  std::vector<Rational> grid(static_cast<std::size_t>(m) * m * m);
  auto at = [&](int i, int j, int k) -> Rational& { return grid[(static_cast<std::size_t>(i) * m + j) * m + k]; };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const int u = node_u(i), v = node_v(j), n = node_n(k);
        const int npm = u, nmp = 0;
        const int nmm = (n - u - v) / 2;
        const int npp = v + nmm;
        const int plus_first = npp + npm, plus_second = npp + nmp;
        at(i, j, k) = Rational(detail::elementary_sum(q, plus_first, n) - detail::elementary_sum(q, plus_second, n));
      }

  // In-place divided differences along each axis.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int level = 1; level < m; ++level)
        for (int k = m - 1; k >= level; --k)
          at(i, j, k) = (at(i, j, k) - at(i, j, k - 1)) / (node_n(k) - node_n(k - level));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      for (int level = 1; level < m; ++level)
        for (int j = m - 1; j >= level; --j)
          at(i, j, k) = (at(i, j, k) - at(i, j - 1, k)) / (node_v(j) - node_v(j - level));
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      for (int level = 1; level < m; ++level)
        for (int i = m - 1; i >= level; --i)
          at(i, j, k) = (at(i, j, k) - at(i - 1, j, k)) / (node_u(i) - node_u(i - level));

  // Newton basis polynomials prod_{l<i} (x - x_l) in monomial form.
  auto newton_basis = [m](auto node) {
    std::vector<std::vector<Rational>> basis(m);
    basis[0] = {Rational(1)};
    for (int i = 1; i < m; ++i) {
      const auto& prev = basis[i - 1];
      std::vector<Rational> next(prev.size() + 1, Rational(0));
      for (std::size_t p = 0; p < prev.size(); ++p) {
        next[p + 1] += prev[p];
        next[p] -= prev[p] * node(i - 1);
      }
      basis[i] = std::move(next);
    }
    return basis;
  };
  const auto bu = newton_basis(node_u);
  const auto bv = newton_basis(node_v);
  const auto bn = newton_basis(node_n);

  std::map<Monomial, Rational> coeffs;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const Rational& dd = at(i, j, k);
        if (dd == 0) continue;
        if (i + j + k > q) throw Error(ErrorCode::RangeError, "f_q interpolation is not of total degree q");
        for (int a = 0; a <= i; ++a)
          for (int b = 0; b <= j; ++b)
            for (int c = 0; c <= k; ++c) {
              if (bu[i][a] == 0 || bv[j][b] == 0 || bn[k][c] == 0) continue;
              coeffs[{a, b, c}] += dd * bu[i][a] * bv[j][b] * bn[k][c];
            }
      }
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    if (it->second == 0) it = coeffs.erase(it);
    else ++it;
  }
  return coeffs;
}

}  // namespace

const std::map<Monomial, Rational>& f_q_abc(int q) {
  if (q < 1 || q > kMaxDegree) throw Error(ErrorCode::QOutOfRange, "f_q expansion supports 1 <= q <= 20");
  static std::mutex mutex;
  static std::map<int, std::map<Monomial, Rational>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, interpolate_f_q(q)).first;
  return it->second;
}

}  // namespace msqaoa
