#pragma once

#include <span>

#include <Eigen/Dense>

#include "msqaoa/closed_form.hpp"
#include "msqaoa/model.hpp"

namespace msqaoa {

/// Largest n for statevector simulation (2^24 complex doubles, 256 MiB).
inline constexpr int kSimulatorMaxSpins = 24;

/// H(z) for every basis index. Bit k of the index is spin z_{k+1}; bit value 0 is +1.
using PhaseTable = Eigen::VectorXd;
using StateVector = Eigen::VectorXcd;

/// Tabulates the cost function with a fast Walsh-Hadamard transform of the couplings.
PhaseTable build_phase_table(const ProblemInstance& instance);

/// Applies exp(-i beta X_k) to every qubit in place.
void apply_mixer(StateVector& state, int n, double beta);

/// exp(-i beta B) exp(-i gamma H) |+>^n.
StateVector qaoa_state(const PhaseTable& table, int n, const Angles& angles);
StateVector qaoa_state(const ProblemInstance& instance, const Angles& angles);

struct Expectation {
  double h = 0.0;   ///< <H>
  double h2 = 0.0;  ///< <H^2>
};

Expectation expectation(const PhaseTable& table, const StateVector& state);
Expectation expectation(const ProblemInstance& instance, const Angles& angles);

/// Matrix of <H>/n with rows indexed by beta and columns by gamma.
Eigen::MatrixXd landscape_instance(const ProblemInstance& instance, std::span<const double> betas,
                                   std::span<const double> gammas, int threads = 0);

}  // namespace msqaoa
