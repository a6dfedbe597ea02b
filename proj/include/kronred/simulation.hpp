#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kronred/network.hpp"
#include "kronred/reduction.hpp"
#include "kronred/signal.hpp"

namespace kronred {

/// Uniform time grid [t0, t_end] stepped by dt.
struct SimulationGrid {
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;

  Eigen::Index steps() const;                    // number of RK4 steps
  Eigen::Index samples() const { return steps() + 1; }
  double time_at(Eigen::Index i) const { return t0 + dt * static_cast<double>(i); }
};

/// Sampled multichannel time series on a uniform grid.
struct Trace {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::string> channels;
  Eigen::MatrixXd samples;  // one row per time step, one column per channel

  Eigen::Index sample_count() const { return samples.rows(); }
  double time_at(Eigen::Index i) const { return t0 + dt * static_cast<double>(i); }
  Eigen::Index channel_index(const std::string& name) const;
};

/// Initial-state policy for finite-horizon simulation. All ODE states start
/// at zero; residual start-up transients are absorbed by the transient-skip
/// window before traces are compared.
enum class IcPolicy { AtRest };

/// Solves sum_j coeffs[j] y^(j)(t) = forcing(t) on the grid with classical
/// fixed-step RK4 in companion form. The effective order m drops leading
/// coefficients below 1e-12 times the largest; initial_state carries y and
/// its first m-1 derivatives at t0. m = 0 degenerates to pointwise division.
Eigen::VectorXd solve_lcc_ode(const Eigen::VectorXd& coeffs,
                              const std::function<double(double)>& forcing,
                              const SimulationGrid& grid,
                              const Eigen::VectorXd& initial_state);

/// Same, with the forcing known only at the grid samples; off-grid values
/// needed by the integrator come from 4-point polynomial interpolation.
Eigen::VectorXd solve_lcc_ode(const Eigen::VectorXd& coeffs,
                              const Eigen::VectorXd& forcing_samples,
                              const SimulationGrid& grid,
                              const Eigen::VectorXd& initial_state);

struct OriginalSimulation {
  Trace boundary_currents;     // channels I0b_<vertex id>
  Trace internal_potentials;   // channels psi0i_<vertex id>
  std::vector<std::string> warnings;
};

/// Simulates the full network in its homogeneous form: internal potentials
/// from the internal-block solve, boundary currents from the Schur matrix of
/// the original blocks. Excitations are keyed by boundary vertex id and must
/// cover every boundary vertex; optional injections are keyed by internal
/// vertex id.
OriginalSimulation simulate_original(const GeneralizedNetwork& net,
                                     const std::map<int, Signal>& excitations,
                                     const SimulationGrid& grid,
                                     IcPolicy ic_policy = IcPolicy::AtRest,
                                     double rtol = kDefaultRank1Rtol);

OriginalSimulation simulate_original(const GeneralizedNetwork& net,
                                     const std::map<int, Signal>& excitations,
                                     const std::map<int, Signal>& injections,
                                     const SimulationGrid& grid,
                                     IcPolicy ic_policy = IcPolicy::AtRest,
                                     double rtol = kDefaultRank1Rtol);

struct ReducedSimulation {
  Trace boundary_currents;  // channels I0b_<original vertex id>
  std::vector<std::string> warnings;
};

/// Simulates the reduced network edge by edge: each edge voltage is a
/// symbolic combination of the boundary excitations, each edge current
/// solves its own constitutive ODE, and vertex currents recombine through
/// the reduced incidence matrix. Deliberately a different computational
/// path from simulate_original so agreement is a genuine cross-check.
ReducedSimulation simulate_reduced(const ReducedNetwork& reduced,
                                   const std::map<int, Signal>& excitations,
                                   const SimulationGrid& grid,
                                   IcPolicy ic_policy = IcPolicy::AtRest);

struct ChannelError {
  std::string channel;
  double max_abs = 0.0;
  double rms = 0.0;
};

struct EquivalenceReport {
  bool pass = false;
  double tolerance = 0.0;
  double transient_skip = 0.0;
  double max_abs_error = 0.0;
  double rms_error = 0.0;
  std::vector<ChannelError> channels;
  std::vector<std::string> warnings;
};

/// Pointwise comparison over [t0 + skip, t_end]; pass iff the largest
/// channel error stays within tol. Grids and channel sets must match.
EquivalenceReport compare_traces(const Trace& a, const Trace& b, double tol,
                                 double skip);

/// End-to-end equivalence check with internal current injections: the
/// original network is driven by (excitations, injections); the reduced
/// network by the excitations plus the boundary-mapped injection term
/// carried through the boundary-current ODE. Empty injections reduce to the
/// plain cross-path check. skip = nullopt selects the automatic transient
/// window.
EquivalenceReport simulate_with_injection(
    const GeneralizedNetwork& net, const std::map<int, Signal>& excitations,
    const std::map<int, Signal>& injections, const ReducedNetwork& reduced,
    const Eigen::MatrixXd& injection_map, const SimulationGrid& grid,
    double tol, std::optional<double> skip = std::nullopt);

/// Boundary admittance matrix at complex frequency s: the scalar transfer
/// ratio q_tilde(s)/p_tilde(s) times the reduced Laplacian (Schur matrix of
/// the original blocks, or the realized reduced Laplacian). Evaluation at a
/// root of p_tilde is a pole and is rejected with the roots reported.
Eigen::MatrixXcd frequency_response(const GeneralizedNetwork& net,
                                    std::complex<double> s,
                                    double rtol = kDefaultRank1Rtol);

Eigen::MatrixXcd frequency_response(const ReducedNetwork& reduced,
                                    std::complex<double> s);

/// Roots of sum_j coeffs[j] x^j via the companion matrix, with trailing
/// coefficients below 1e-12 times the largest dropped.
std::vector<std::complex<double>> polynomial_roots(
    const Eigen::VectorXd& coeffs);

/// 10x the slowest decaying time constant of the p_tilde / q_tilde
/// dynamics, capped at 20% of the horizon.
double auto_transient_skip(const HomogeneousForm& form,
                           const SimulationGrid& grid);

/// Seeded samples from the annulus 0.1 <= |s| <= 10, excluding disks of
/// radius 1e-3 around the roots of p_tilde.
std::vector<std::complex<double>> sample_nonpole_frequencies(
    const HomogeneousForm& form, int count, std::uint64_t seed);

}  // namespace kronred
