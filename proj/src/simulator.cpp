#include "msqaoa/simulator.hpp"

#include <cmath>

#include "msqaoa/finite_n.hpp"
#include "sketch_internal.hpp"

namespace msqaoa {

namespace {

void check_size(int n) {
  if (n > kSimulatorMaxSpins) throw Error(ErrorCode::TooLarge, "statevector simulation supports n <= 24");
}

}  // namespace

PhaseTable build_phase_table(const ProblemInstance& instance) {
  const int n = instance.num_spins();
  check_size(n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  PhaseTable table = PhaseTable::Zero(dim);
  for (const Coupling& c : instance.couplings())
    table[static_cast<Eigen::Index>(c.mask)] += instance.order_scale(c.order) * c.value;
  // H(b) = sum_S c_S (-1)^{|b & S|}
  for (Eigen::Index half = 1; half < dim; half <<= 1)
    for (Eigen::Index i = 0; i < dim; i += 2 * half)
      for (Eigen::Index j = i; j < i + half; ++j) {
        const double x = table[j], y = table[j + half];
        table[j] = x + y;
        table[j + half] = x - y;
      }
  return table;
}

void apply_mixer(StateVector& state, int n, double beta) {
  const std::complex<double> c(std::cos(beta), 0.0);
  const std::complex<double> ms(0.0, -std::sin(beta));
  const Eigen::Index dim = state.size();
  for (int k = 0; k < n; ++k) {
    const Eigen::Index stride = Eigen::Index{1} << k;
    for (Eigen::Index i = 0; i < dim; i += 2 * stride)
      for (Eigen::Index j = i; j < i + stride; ++j) {
        const std::complex<double> a0 = state[j], a1 = state[j + stride];
        state[j] = c * a0 + ms * a1;
        state[j + stride] = ms * a0 + c * a1;
      }
  }
}

StateVector qaoa_state(const PhaseTable& table, int n, const Angles& angles) {
  check_size(n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (table.size() != dim) throw Error(ErrorCode::LengthMismatch, "phase table size does not match n");
  const double amp = std::pow(2.0, -0.5 * n);
  StateVector state(dim);
  for (Eigen::Index z = 0; z < dim; ++z) state[z] = std::polar(amp, -angles.gamma * table[z]);
  apply_mixer(state, n, angles.beta);
  return state;
}

StateVector qaoa_state(const ProblemInstance& instance, const Angles& angles) {
  return qaoa_state(build_phase_table(instance), instance.num_spins(), angles);
}

Expectation expectation(const PhaseTable& table, const StateVector& state) {
  if (table.size() != state.size()) throw Error(ErrorCode::LengthMismatch, "phase table and state differ in size");
  const Eigen::VectorXd prob = state.cwiseAbs2();
  return {prob.dot(table), prob.dot(table.cwiseAbs2())};
}

Expectation expectation(const ProblemInstance& instance, const Angles& angles) {
  const PhaseTable table = build_phase_table(instance);
  return expectation(table, qaoa_state(table, instance.num_spins(), angles));
}

Eigen::MatrixXd landscape_instance(const ProblemInstance& instance, std::span<const double> betas,
                                   std::span<const double> gammas, int threads) {
  if (betas.empty() || gammas.empty()) throw Error(ErrorCode::EmptyGrid, "landscape grid must be non-empty");
  const int n = instance.num_spins();
  const PhaseTable table = build_phase_table(instance);
  const auto rows = static_cast<Eigen::Index>(betas.size());
  const auto cols = static_cast<Eigen::Index>(gammas.size());
  Eigen::MatrixXd out(rows, cols);
  detail::parallel_blocks(static_cast<int>(cols), threads > 0 ? threads : default_threads(), [&](int j) {
    // Phase is shared across the beta column; only the mixer depends on beta.
    const double amp = std::pow(2.0, -0.5 * n);
    StateVector phased(table.size());
    for (Eigen::Index z = 0; z < table.size(); ++z) phased[z] = std::polar(amp, -gammas[j] * table[z]);
    for (Eigen::Index i = 0; i < rows; ++i) {
      StateVector state = phased;
      apply_mixer(state, n, betas[i]);
      out(i, j) = expectation(table, state).h / n;
    }
  });
  return out;
}

}  // namespace msqaoa
