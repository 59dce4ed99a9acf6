#include "msqaoa/verify.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "msqaoa/closed_form.hpp"
#include "msqaoa/finite_n.hpp"
#include "msqaoa/io.hpp"
#include "msqaoa/model.hpp"
#include "msqaoa/optimizer.hpp"
#include "msqaoa/simulator.hpp"

namespace msqaoa::verify {

namespace {

const Angles kSkAngles{M_PI / 8, -0.5};

MixtureSpec sk_spec() { return make_mixture_spec(2, {0.0, 1.0}); }

CheckResult timed(const std::string& name, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string fmt(double x) { return io::format_double(x); }

void sk_optimum(CheckResult& r, double reference) {
  const Optimum o = optimize_closed_form(sk_spec());
  const double angle_err = std::max(std::abs(o.angles.beta - M_PI / 8), std::abs(o.angles.gamma + 0.5));
  r.measured = std::abs(o.value - reference);
  r.tolerance = 1e-5;
  r.passed = r.measured < r.tolerance && angle_err < 1e-4;
  r.detail = "value=" + fmt(o.value) + " beta=" + fmt(o.angles.beta) + " gamma=" + fmt(o.angles.gamma) +
             " angle_error=" + fmt(angle_err);
}

void d3_optimum(CheckResult& r) {
  const Optimum o = optimize_closed_form(make_mixture_spec(3, {0.0, 0.0, std::sqrt(3.0)}));
  const double angle_err = std::max(std::abs(o.angles.beta - 0.290003), std::abs(o.angles.gamma + 0.430091));
  const D3Residuals res = d3_stationarity_residuals(o.angles);
  const double worst_res = std::max({res.r1 ? std::abs(*res.r1) : INFINITY, std::abs(res.r2),
                                     res.r3 ? std::abs(*res.r3) : INFINITY});
  r.measured = std::abs(o.value + 0.270638);
  r.tolerance = 1e-5;
  r.passed = r.measured < r.tolerance && angle_err < 1e-4 && worst_res < 1e-4;
  r.detail = "value=" + fmt(o.value) + " beta=" + fmt(o.angles.beta) + " gamma=" + fmt(o.angles.gamma) +
             " angle_error=" + fmt(angle_err) + " max_residual=" + fmt(worst_res);
}

void approximation(CheckResult& r) {
  const Optimum o = optimize_closed_form(make_mixture_spec(3, {0.0, 0.0, std::sqrt(3.0)}));
  const double factor = approximation_factor(o.value, kPureThreeGroundState);
  r.measured = std::abs(factor - 0.332806);
  r.tolerance = 1e-3;
  r.passed = r.measured < r.tolerance;
  r.detail = "factor=" + fmt(factor);
}

void form_equivalence(CheckResult& r) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> degree(1, 6);
  std::uniform_real_distribution<double> sigma(0.0, 2.0), beta(-M_PI, M_PI), gamma(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = degree(rng);
    std::vector<double> sig(d);
    for (double& s : sig) s = sigma(rng);
    sig.back() += 0.1;
    const MixtureSpec spec = make_mixture_spec(d, sig);
    const Angles a{beta(rng), gamma(rng)};
    const double lhs = energy_sigma_form(spec, a);
    const double rhs = energy_mixture_form(MixtureFunction(spec), a);
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
  }
  r.measured = worst;
  r.tolerance = 1e-12;
  r.passed = worst < r.tolerance;
  r.detail = "points=1000";
}

double moment_discrepancy(const MomentReport& a, const MomentReport& b) {
  const double first_scale = std::max(std::abs(b.first), std::sqrt(std::abs(b.second)));
  return std::max(std::abs(a.first - b.first) / first_scale, std::abs(a.second - b.second) / std::abs(b.second));
}

void oracle_n6(CheckResult& r) {
  double worst = 0.0;
  for (const MixtureSpec& spec : {sk_spec(), make_mixture_spec(3, {1.0 / 3, 0.5, 1.0})}) {
    const Angles a{0.3, -0.4};
    worst = std::max(worst, moment_discrepancy(sketch_moments(spec, a, 6), oracle_moments(spec, a, 6)));
  }
  r.measured = worst;
  r.tolerance = 1e-10;
  r.passed = worst < r.tolerance;
}

void oracle_equivalence(CheckResult& r) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> sigma(0.0, 1.5), beta(-M_PI / 2, M_PI / 2), gamma(-1.5, 1.5);
  double worst = 0.0;
  int cases = 0;
  for (int n = 2; n <= 8; ++n)
    for (int d = 1; d <= 3 && d <= n; ++d)
      for (int draw = 0; draw < 5; ++draw) {
        std::vector<double> sig(d);
        for (double& s : sig) s = sigma(rng);
        sig.back() += 0.1;
        const MixtureSpec spec = make_mixture_spec(d, sig);
        const Angles a{beta(rng), gamma(rng)};
        worst = std::max(worst, moment_discrepancy(sketch_moments(spec, a, n), oracle_moments(spec, a, n)));
        ++cases;
      }
  r.measured = worst;
  r.tolerance = 1e-10;
  r.passed = worst < r.tolerance;
  r.detail = "cases=" + std::to_string(cases);
}

void combinatorial_identities(CheckResult& r) {
  long mismatches = 0, compared = 0;
  for (int n = 1; n <= 10; ++n)
    for (int npp = 0; npp <= n; ++npp)
      for (int npm = 0; npp + npm <= n; ++npm)
        for (int nmp = 0; npp + npm + nmp <= n; ++nmp) {
          const Sketch s{npp, npm, nmp, n - npp - npm - nmp};
          // Positions laid out as ++ block, +- block, -+ block, -- block; bit set means -1.
          std::uint64_t zmask = 0, zpmask = 0;
          for (int k = npp; k < npp + npm; ++k) zpmask |= 1ULL << k;
          for (int k = npp + npm; k < npp + npm + nmp; ++k) zmask |= 1ULL << k;
          for (int k = npp + npm + nmp; k < n; ++k) {
            zmask |= 1ULL << k;
            zpmask |= 1ULL << k;
          }
          long f[5] = {0, 0, 0, 0, 0}, g[5] = {0, 0, 0, 0, 0};
          for (std::uint64_t S = 1; S < (1ULL << n); ++S) {
            const int q = std::popcount(S);
            if (q > 4) continue;
            const int zs = std::popcount(S & zmask) % 2 ? -1 : 1;
            const int zps = std::popcount(S & zpmask) % 2 ? -1 : 1;
            f[q] += zs - zps;
            g[q] += (zs - zps) * (zs - zps);
          }
          for (int q = 1; q <= std::min(4, n); ++q) {
            compared += 2;
            if (f_q(q, s) != WideInt(f[q])) ++mismatches;
            if (g_q(q, s.disagreements(), n) != WideInt(g[q])) ++mismatches;
          }
        }
  for (int q = 1; q <= 8; ++q) {
    const auto& coeffs = f_q_abc(q);
    for (int a = 0; a <= q; ++a)
      for (int b = 0; a + b <= q; ++b) {
        const int c = q - a - b;
        const Rational expected = (c == 0 && a % 2 == 1)
                                      ? Rational(2) / (Rational(factorial(a)) * Rational(factorial(b)))
                                      : Rational(0);
        const auto it = coeffs.find(Monomial{a, b, c});
        const Rational got = it == coeffs.end() ? Rational(0) : it->second;
        ++compared;
        if (got != expected) ++mismatches;
      }
  }
  r.measured = static_cast<double>(mismatches);
  r.tolerance = 0.0;
  r.passed = mismatches == 0;
  r.detail = "comparisons=" + std::to_string(compared);
}

struct ConvergenceData {
  std::vector<int> ns;
  std::vector<MomentReport> reports;
};

const ConvergenceData& convergence_data() {
  static const ConvergenceData data = [] {
    ConvergenceData d;
    d.ns = {8, 16, 32, 64, 128};
    for (int n : d.ns) d.reports.push_back(sketch_moments(sk_spec(), kSkAngles, n));
    return d;
  }();
  return data;
}

void infinite_n_convergence(CheckResult& r) {
  const ConvergenceData& data = convergence_data();
  const double limit = energy_sigma_form(sk_spec(), kSkAngles);
  std::vector<double> gaps;
  std::ostringstream detail;
  for (std::size_t i = 0; i < data.ns.size(); ++i) {
    if (data.ns[i] < 16) continue;
    gaps.push_back(std::abs(data.reports[i].first - limit));
    detail << "n=" << data.ns[i] << ":" << fmt(gaps.back()) << ' ';
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];
  r.measured = gaps.front() / gaps.back();
  r.tolerance = 4.0;
  r.passed = decreasing && r.measured >= r.tolerance;
  r.detail = detail.str() + "(measured = gap(16)/gap(128), must be >= tolerance)";
}

void concentration(CheckResult& r) {
  const ConvergenceData& data = convergence_data();
  bool ok = true;
  std::ostringstream detail;
  double prev = INFINITY;
  for (std::size_t i = 0; i < data.ns.size(); ++i) {
    if (data.ns[i] > 64) continue;
    const double var = data.reports[i].second - data.reports[i].first * data.reports[i].first;
    ok = ok && var > 0.0 && var < prev;
    prev = var;
    detail << "n=" << data.ns[i] << ":" << fmt(var) << ' ';
  }
  r.measured = prev;
  r.tolerance = 0.0;
  r.passed = ok;
  r.detail = detail.str() + "(measured = variance at n=64)";
}

void monte_carlo(CheckResult& r) {
  const int n = 12, samples = 200;
  const MixtureSpec spec = sk_spec();
  double sum = 0.0, sum2 = 0.0;
  for (int s = 1; s <= samples; ++s) {
    const double h = expectation(sample_instance(spec, n, static_cast<std::uint64_t>(s)), kSkAngles).h / n;
    sum += h;
    sum2 += h * h;
  }
  const double mean = sum / samples;
  const double sd = std::sqrt((sum2 - samples * mean * mean) / (samples - 1));
  const double se = sd / std::sqrt(double(samples));
  const double exact = sketch_moments(spec, kSkAngles, n).first;
  r.measured = std::abs(mean - exact) / se;
  r.tolerance = 3.0;
  r.passed = r.measured < r.tolerance;
  r.detail = "mean=" + fmt(mean) + " se=" + fmt(se) + " exact=" + fmt(exact) + " (measured in standard errors)";
}

void a_t_asymptotics(CheckResult& r) {
  double nonzero = 0.0, diagonal = 0.0;
  for (double beta : {0.1, M_PI / 8, 0.7, -1.1})
    for (int a = 0; a <= 8; ++a) {
      for (int t = a + 1; t <= a + 6; ++t) nonzero = std::max(nonzero, std::abs(a_factor(a, t, beta)));
      const std::complex<double> expected =
          double(factorial(a)) * std::pow(std::complex<double>(0, -1), a) * std::pow(std::sin(2 * beta), a);
      diagonal = std::max(diagonal, std::abs(a_factor(a, a, beta) - expected) / std::max(1.0, std::abs(expected)));
    }
  const MixtureSpec spec = sk_spec();
  double worst_ratio = 0.0;
  std::ostringstream detail;
  for (const auto& [a, b, xi] : std::vector<std::array<int, 3>>{{1, 0, 2}, {0, 1, 2}, {1, 1, 3}, {2, 0, 3}, {0, 2, 3}}) {
    const double ratio = std::abs(t_sum(spec, kSkAngles, 256, a, b, xi)) / std::abs(t_sum(spec, kSkAngles, 512, a, b, xi));
    worst_ratio = std::max(worst_ratio, std::abs(ratio - 2.0) / 2.0);
    detail << "T" << a << b << "_" << xi << ":" << fmt(ratio) << ' ';
  }
  r.measured = worst_ratio;
  r.tolerance = 0.3;
  r.passed = nonzero == 0.0 && diagonal < 1e-12 && worst_ratio <= r.tolerance;
  r.detail = "max|A(t>a)|=" + fmt(nonzero) + " diag_error=" + fmt(diagonal) + " halving " + detail.str();
}

void manifest_roundtrip(CheckResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("msqaoa-verify-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  int failures = 0;
  try {
    const auto betas = io::linspace(-M_PI / 4, M_PI / 4, 5);
    const auto gammas = io::linspace(-1.5, 1.5, 5);
    Eigen::MatrixXd values(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) values(i, j) = energy_sigma_form(sk_spec(), Angles{betas[i], gammas[j]});
    const fs::path csv = dir / "grid.csv";
    {
      std::ofstream out(csv);
      io::write_grid_csv(out, betas, gammas, values);
    }
    const std::vector<fs::path> outputs{csv};
    io::write_manifest(dir / "manifest.json", io::make_manifest("verify", {{"check", "roundtrip"}}, {}, dir, outputs));
    if (!io::validate_manifest(dir / "manifest.json").empty()) ++failures;
    std::ifstream in(csv);
    const io::Grid grid = io::read_grid_csv(in);
    if (grid.betas != betas || grid.gammas != gammas || grid.values != values) ++failures;
    {
      std::ofstream out(csv, std::ios::app);
      out << "tampered\n";
    }
    if (io::validate_manifest(dir / "manifest.json").empty()) ++failures;
  } catch (...) {
    fs::remove_all(dir);
    throw;
  }
  fs::remove_all(dir);
  r.measured = failures;
  r.tolerance = 0.0;
  r.passed = failures == 0;
}

}  // namespace

std::vector<CheckResult> run(const Options& options) {
  std::vector<CheckResult> out;
  out.push_back(timed("sk_optimum", [&](CheckResult& r) { sk_optimum(r, options.sk_reference); }));
  if (options.level == Level::Quick) {
    out.push_back(timed("form_equivalence", form_equivalence));
    out.push_back(timed("oracle_match_n6", oracle_n6));
    return out;
  }
  out.push_back(timed("d3_optimum", d3_optimum));
  out.push_back(timed("approximation_factor", approximation));
  out.push_back(timed("form_equivalence", form_equivalence));
  out.push_back(timed("oracle_equivalence", oracle_equivalence));
  out.push_back(timed("combinatorial_identities", combinatorial_identities));
  out.push_back(timed("infinite_n_convergence", infinite_n_convergence));
  out.push_back(timed("concentration", concentration));
  out.push_back(timed("monte_carlo", monte_carlo));
  out.push_back(timed("a_t_asymptotics", a_t_asymptotics));
  out.push_back(timed("manifest_roundtrip", manifest_roundtrip));
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

nlohmann::json to_json(const std::vector<CheckResult>& results, Level level) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : results)
    checks.push_back({{"name", r.name},
                      {"measured", r.measured},
                      {"tolerance", r.tolerance},
                      {"passed", r.passed},
                      {"seconds", r.seconds},
                      {"detail", r.detail}});
  return {{"level", level == Level::Quick ? "quick" : "full"}, {"passed", all_passed(results)}, {"checks", checks}};
}

std::string format_line(const CheckResult& r) {
  std::ostringstream out;
  out << (r.passed ? "PASS " : "FAIL ") << r.name << " measured=" << fmt(r.measured) << " tolerance=" << fmt(r.tolerance)
      << " time=" << fmt(std::round(r.seconds * 1000) / 1000) << "s";
  if (!r.detail.empty()) out << " [" << r.detail << "]";
  return out.str();
}

}  // namespace msqaoa::verify
