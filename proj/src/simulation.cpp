#include "kronred/simulation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace kronred {

namespace {

constexpr double kCoeffCut = 1e-12;  // relative cutoff for leading coefficients

int effective_order(const Eigen::VectorXd& coeffs) {
  if (coeffs.size() == 0) {
    throw std::invalid_argument("coefficient vector is empty");
  }
  const double scale = coeffs.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    throw std::invalid_argument("coefficient vector is numerically zero");
  }
  int order = static_cast<int>(coeffs.size()) - 1;
  while (order > 0 && std::abs(coeffs[order]) <= kCoeffCut * scale) {
    --order;
  }
  return order;
}

void check_grid(const SimulationGrid& grid) {
  if (!(grid.dt > 0.0)) {
    throw std::invalid_argument("grid step dt must be positive");
  }
  if (!(grid.t_end > grid.t0)) {
    throw std::invalid_argument("grid end time must exceed its start time");
  }
}

// Integrates sum_j coeffs[j] y^(j) = forcing(t) for n channels sharing the
// same scalar coefficients. Returns samples (grid.samples() x n); the k-th
// column of initial_states carries channel k's value and derivatives at t0.
Eigen::MatrixXd integrate_lcc(
    const Eigen::VectorXd& coeffs,
    const std::function<Eigen::VectorXd(double)>& forcing,
    const SimulationGrid& grid, const Eigen::MatrixXd& initial_states) {
  check_grid(grid);
  const int order = effective_order(coeffs);
  const Eigen::Index channels = initial_states.cols();
  const Eigen::Index samples = grid.samples();
  Eigen::MatrixXd out(samples, channels);

  if (order == 0) {
    for (Eigen::Index i = 0; i < samples; ++i) {
      out.row(i) = forcing(grid.time_at(i)).transpose() / coeffs[0];
    }
    return out;
  }
  if (initial_states.rows() != order) {
    throw std::invalid_argument("initial state must carry " +
                                std::to_string(order) +
                                " entries per channel (value and derivatives)");
  }

  // Companion form: rows of the state are y, y', ..., y^(order-1).
  const auto slope = [&](double t,
                         const Eigen::MatrixXd& state) -> Eigen::MatrixXd {
    Eigen::MatrixXd ds(order, channels);
    for (int r = 0; r + 1 < order; ++r) {
      ds.row(r) = state.row(r + 1);
    }
    Eigen::RowVectorXd top = forcing(t).transpose();
    for (int j = 0; j < order; ++j) {
      if (coeffs[j] != 0.0) {
        top.noalias() -= coeffs[j] * state.row(j);
      }
    }
    ds.row(order - 1) = top / coeffs[order];
    return ds;
  };

  Eigen::MatrixXd state = initial_states;
  out.row(0) = state.row(0);
  const double h = grid.dt;
  for (Eigen::Index i = 0; i < grid.steps(); ++i) {
    const double t = grid.time_at(i);
    const Eigen::MatrixXd k1 = slope(t, state);
    const Eigen::MatrixXd k2 = slope(t + h / 2.0, state + (h / 2.0) * k1);
    const Eigen::MatrixXd k3 = slope(t + h / 2.0, state + (h / 2.0) * k2);
    const Eigen::MatrixXd k4 = slope(t + h, state + h * k3);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.row(i + 1) = state.row(0);
  }
  return out;
}

// Polynomial interpolation of grid samples on the 4 nearest nodes (fewer
// when the trace is short); exact at the nodes, O(dt^4) at the half-steps
// the integrator visits.
class SampledForcing {
 public:
  SampledForcing(const Eigen::VectorXd& samples, const SimulationGrid& grid)
      : samples_(samples), t0_(grid.t0), dt_(grid.dt) {
    if (samples_.size() != grid.samples()) {
      throw std::invalid_argument(
          "forcing sample count does not match the grid");
    }
    if (samples_.size() < 2) {
      throw std::invalid_argument("forcing needs at least 2 samples");
    }
  }

  double operator()(double t) const {
    const Eigen::Index n = samples_.size();
    const double s = (t - t0_) / dt_;
    const Eigen::Index nearest =
        std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::lround(s)), 0,
                                 n - 1);
    if (std::abs(s - static_cast<double>(nearest)) < 1e-9) {
      return samples_[nearest];
    }
    const Eigen::Index stencil = std::min<Eigen::Index>(4, n);
    Eigen::Index first = static_cast<Eigen::Index>(std::floor(s)) - 1;
    first = std::clamp<Eigen::Index>(first, 0, n - stencil);
    double result = 0.0;
    for (Eigen::Index i = 0; i < stencil; ++i) {
      double weight = 1.0;
      for (Eigen::Index j = 0; j < stencil; ++j) {
        if (j != i) {
          weight *= (s - static_cast<double>(first + j)) /
                    static_cast<double>(i - j);
        }
      }
      result += weight * samples_[first + i];
    }
    return result;
  }

 private:
  const Eigen::VectorXd& samples_;
  double t0_;
  double dt_;
};

double poly_eval(const Eigen::VectorXd& coeffs, std::complex<double> s,
                 std::complex<double>* out) {
  std::complex<double> acc(0.0, 0.0);
  for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j) {
    acc = acc * s + coeffs[j];
  }
  *out = acc;
  double magnitude_scale = 0.0;
  const double sabs = std::max(1.0, std::abs(s));
  double power = 1.0;
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    magnitude_scale += std::abs(coeffs[j]) * power;
    power *= sabs;
  }
  return magnitude_scale;
}

std::string format_roots(const std::vector<std::complex<double>>& roots) {
  std::ostringstream os;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (i > 0) {
      os << ", ";
    }
    os << roots[i].real();
    if (roots[i].imag() != 0.0) {
      os << (roots[i].imag() < 0 ? "-" : "+") << std::abs(roots[i].imag())
         << "i";
    }
  }
  return os.str();
}

std::complex<double> transfer_ratio(const HomogeneousForm& form,
                                    std::complex<double> s) {
  std::complex<double> ps;
  const double pscale = poly_eval(form.p_tilde, s, &ps);
  if (std::abs(ps) <= 1e-12 * pscale) {
    throw NumericError(
        "frequency response pole: p_tilde(s) vanishes at the sample point "
        "(roots: " +
        format_roots(polynomial_roots(form.p_tilde)) + ")");
  }
  std::complex<double> qs;
  poly_eval(form.q_tilde, s, &qs);
  return qs / ps;
}

// Warn when a sinusoid is sampled with fewer than 20 steps per period.
std::vector<std::string> sampling_warnings(
    const std::map<int, Signal>& signals, const SimulationGrid& grid,
    const char* role) {
  std::vector<std::string> warnings;
  for (const auto& [vertex, signal] : signals) {
    const double omega = signal.max_angular_frequency();
    if (omega <= 0.0) {
      continue;
    }
    const double period = 2.0 * M_PI / omega;
    if (grid.dt > period / 20.0) {
      std::ostringstream os;
      os << "grid too coarse for the " << role << " at vertex " << vertex
         << ": " << period / grid.dt << " steps per period (want >= 20)";
      warnings.push_back(os.str());
    }
  }
  return warnings;
}

Eigen::VectorXd weighted_derivatives(const Eigen::VectorXd& coeffs,
                                     const std::vector<Signal>& signals,
                                     double t) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(signals.size()));
  for (std::size_t k = 0; k < signals.size(); ++k) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
      if (coeffs[j] != 0.0) {
        acc += coeffs[j] * signals[k].derivative(static_cast<int>(j), t);
      }
    }
    out[static_cast<Eigen::Index>(k)] = acc;
  }
  return out;
}

std::vector<Signal> ordered_signals(const std::map<int, Signal>& by_vertex,
                                    const std::vector<int>& ids,
                                    const char* role, bool require_all) {
  for (const auto& [vertex, signal] : by_vertex) {
    if (!std::binary_search(ids.begin(), ids.end(), vertex)) {
      throw std::invalid_argument(std::string(role) + " signal references vertex " +
                                  std::to_string(vertex) +
                                  ", which does not have that role");
    }
  }
  std::vector<Signal> out;
  out.reserve(ids.size());
  for (int id : ids) {
    const auto it = by_vertex.find(id);
    if (it != by_vertex.end()) {
      out.push_back(it->second);
    } else if (require_all) {
      throw std::invalid_argument(std::string(role) + " signal missing for vertex " +
                                  std::to_string(id));
    } else {
      out.emplace_back();  // zero signal
    }
  }
  return out;
}

std::vector<std::string> channel_names(const char* prefix,
                                       const std::vector<int>& ids) {
  std::vector<std::string> names;
  names.reserve(ids.size());
  for (int id : ids) {
    names.push_back(std::string(prefix) + std::to_string(id));
  }
  return names;
}

}  // namespace

Eigen::Index SimulationGrid::steps() const {
  if (!(dt > 0.0) || !(t_end > t0)) {
    throw std::invalid_argument("grid requires dt > 0 and t_end > t0");
  }
  const auto steps = static_cast<Eigen::Index>(std::lround((t_end - t0) / dt));
  return std::max<Eigen::Index>(steps, 1);
}

Eigen::Index Trace::channel_index(const std::string& name) const {
  const auto it = std::find(channels.begin(), channels.end(), name);
  if (it == channels.end()) {
    throw std::invalid_argument("trace has no channel named " + name);
  }
  return static_cast<Eigen::Index>(it - channels.begin());
}

Eigen::VectorXd solve_lcc_ode(const Eigen::VectorXd& coeffs,
                              const std::function<double(double)>& forcing,
                              const SimulationGrid& grid,
                              const Eigen::VectorXd& initial_state) {
  Eigen::MatrixXd init(initial_state.size(), 1);
  init.col(0) = initial_state;
  if (effective_order(coeffs) == 0) {
    init.resize(0, 1);
  }
  return integrate_lcc(
      coeffs, [&](double t) { return Eigen::VectorXd::Constant(1, forcing(t)); },
      grid, init);
}

Eigen::VectorXd solve_lcc_ode(const Eigen::VectorXd& coeffs,
                              const Eigen::VectorXd& forcing_samples,
                              const SimulationGrid& grid,
                              const Eigen::VectorXd& initial_state) {
  check_grid(grid);
  const SampledForcing forcing(forcing_samples, grid);
  return solve_lcc_ode(coeffs, std::function<double(double)>(forcing), grid,
                       initial_state);
}

OriginalSimulation simulate_original(const GeneralizedNetwork& net,
                                     const std::map<int, Signal>& excitations,
                                     const SimulationGrid& grid,
                                     IcPolicy ic_policy, double rtol) {
  return simulate_original(net, excitations, {}, grid, ic_policy, rtol);
}

OriginalSimulation simulate_original(const GeneralizedNetwork& net,
                                     const std::map<int, Signal>& excitations,
                                     const std::map<int, Signal>& injections,
                                     const SimulationGrid& grid,
                                     IcPolicy ic_policy, double rtol) {
  (void)ic_policy;  // at rest: all ODE states start at zero
  check_grid(grid);
  const HomogeneousForm form = homogeneous_form(net, rtol);

  const std::vector<int>& boundary = net.partition.boundary();
  const std::vector<int>& internal = net.partition.internal();
  const std::vector<Signal> psi_b =
      ordered_signals(excitations, boundary, "boundary excitation", true);
  const std::vector<Signal> inj =
      ordered_signals(injections, internal, "internal injection", false);
  const bool has_injection = !injections.empty();

  const auto [bb, bi] = split_rows(build_incidence(net.graph), net.partition);
  const auto gw = form.edge_weight.asDiagonal();
  const Eigen::MatrixXd lbb = bb * gw * bb.transpose();
  const Eigen::MatrixXd lib = bi * gw * bb.transpose();
  const Eigen::MatrixXd lii = bi * gw * bi.transpose();

  const Eigen::Index nb = static_cast<Eigen::Index>(boundary.size());
  const Eigen::Index ni = static_cast<Eigen::Index>(internal.size());

  // u_b(t) = sum_j q_tilde_j psi_b^(j)(t), evaluated exactly at any t.
  const auto u_b = [&](double t) {
    return weighted_derivatives(form.q_tilde, psi_b, t);
  };

  OriginalSimulation result;
  result.warnings = sampling_warnings(excitations, grid, "boundary excitation");
  const auto injection_warnings =
      sampling_warnings(injections, grid, "internal injection");
  result.warnings.insert(result.warnings.end(), injection_warnings.begin(),
                         injection_warnings.end());

  Eigen::MatrixXd schur = lbb;
  Eigen::MatrixXd lii_inv;          // ni x ni
  Eigen::MatrixXd divider;          // nb x ni, equals L_bi L_ii^{-1}
  result.internal_potentials.t0 = grid.t0;
  result.internal_potentials.dt = grid.dt;
  if (ni > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(lii);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
      throw NumericError(
          "internal block is numerically singular; cannot eliminate internal "
          "vertices");
    }
    const Eigen::MatrixXd lii_inv_lib = llt.solve(lib);
    schur.noalias() -= lib.transpose() * lii_inv_lib;
    lii_inv = llt.solve(Eigen::MatrixXd::Identity(ni, ni));
    divider = lii_inv_lib.transpose();

    // sum_j q_tilde_j psi_i^(j) = L_ii^{-1} P(d/dt) I_0i - L_ii^{-1} L_ib u_b
    const auto internal_rhs = [&](double t) {
      Eigen::VectorXd rhs = -lii_inv_lib * u_b(t);
      if (has_injection) {
        rhs.noalias() += lii_inv * weighted_derivatives(form.p_tilde, inj, t);
      }
      return rhs;
    };
    result.internal_potentials.channels = channel_names("psi0i_", internal);
    result.internal_potentials.samples = integrate_lcc(
        form.q_tilde, internal_rhs, grid,
        Eigen::MatrixXd::Zero(effective_order(form.q_tilde), ni));
  } else {
    result.internal_potentials.samples.resize(grid.samples(), 0);
  }

  // sum_j p_tilde_j I_0b^(j) = Schur u_b, plus the share of any internal
  // injection that reaches the terminals.
  const auto current_rhs = [&](double t) -> Eigen::VectorXd {
    Eigen::VectorXd rhs = schur * u_b(t);
    if (has_injection) {
      rhs.noalias() += divider * weighted_derivatives(form.p_tilde, inj, t);
    }
    return rhs;
  };

  result.boundary_currents.t0 = grid.t0;
  result.boundary_currents.dt = grid.dt;
  result.boundary_currents.channels = channel_names("I0b_", boundary);
  result.boundary_currents.samples = integrate_lcc(
      form.p_tilde, current_rhs, grid,
      Eigen::MatrixXd::Zero(effective_order(form.p_tilde), nb));
  return result;
}

ReducedSimulation simulate_reduced(const ReducedNetwork& reduced,
                                   const std::map<int, Signal>& excitations,
                                   const SimulationGrid& grid,
                                   IcPolicy ic_policy) {
  (void)ic_policy;
  check_grid(grid);
  const std::vector<Signal> psi = ordered_signals(
      excitations, reduced.boundary_ids, "boundary excitation", true);

  const DirectedGraph& graph = reduced.network.graph;
  const Eigen::Index edges = graph.edge_count();
  const Eigen::Index nb = graph.vertex_count();

  // Edge voltages are symbolic combinations of the boundary potentials.
  std::vector<Signal> edge_voltage;
  edge_voltage.reserve(edges);
  for (const Edge& e : graph.edges()) {
    edge_voltage.push_back(psi[e.head - 1] - psi[e.tail - 1]);
  }

  const auto edge_rhs = [&](double t) -> Eigen::VectorXd {
    return reduced.gamma_hat.cwiseProduct(
        weighted_derivatives(reduced.form.q_tilde, edge_voltage, t));
  };

  const Eigen::MatrixXd edge_currents = integrate_lcc(
      reduced.form.p_tilde, edge_rhs, grid,
      Eigen::MatrixXd::Zero(effective_order(reduced.form.p_tilde), edges));

  ReducedSimulation result;
  result.warnings = sampling_warnings(excitations, grid, "boundary excitation");
  result.boundary_currents.t0 = grid.t0;
  result.boundary_currents.dt = grid.dt;
  result.boundary_currents.channels =
      channel_names("I0b_", reduced.boundary_ids);
  if (edges > 0) {
    const Eigen::MatrixXd incidence = build_incidence(graph);
    result.boundary_currents.samples = edge_currents * incidence.transpose();
  } else {
    result.boundary_currents.samples = Eigen::MatrixXd::Zero(grid.samples(), nb);
  }
  return result;
}

EquivalenceReport compare_traces(const Trace& a, const Trace& b, double tol,
                                 double skip) {
  if (a.dt != b.dt || a.t0 != b.t0 || a.sample_count() != b.sample_count() ||
      a.channels != b.channels) {
    throw std::invalid_argument("traces have mismatched grids or channels");
  }
  if (skip < 0.0 || !(a.dt > 0.0)) {
    throw std::invalid_argument("comparison window is invalid");
  }
  Eigen::Index first =
      static_cast<Eigen::Index>(std::ceil(skip / a.dt - 1e-9));
  first = std::clamp<Eigen::Index>(first, 0, a.sample_count() - 1);
  const Eigen::Index count = a.sample_count() - first;

  EquivalenceReport report;
  report.tolerance = tol;
  report.transient_skip = skip;
  double sum_sq = 0.0;
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(a.channels.size());
       ++c) {
    const Eigen::VectorXd diff = a.samples.col(c).tail(count) -
                                 b.samples.col(c).tail(count);
    ChannelError err;
    err.channel = a.channels[static_cast<std::size_t>(c)];
    err.max_abs = diff.size() > 0 ? diff.cwiseAbs().maxCoeff() : 0.0;
    err.rms = diff.size() > 0
                  ? std::sqrt(diff.squaredNorm() / static_cast<double>(count))
                  : 0.0;
    report.max_abs_error = std::max(report.max_abs_error, err.max_abs);
    sum_sq += diff.squaredNorm();
    report.channels.push_back(std::move(err));
  }
  const double total = static_cast<double>(count) *
                       std::max<double>(1.0, static_cast<double>(a.channels.size()));
  report.rms_error = std::sqrt(sum_sq / total);
  report.pass = report.max_abs_error <= tol;
  return report;
}

EquivalenceReport simulate_with_injection(
    const GeneralizedNetwork& net, const std::map<int, Signal>& excitations,
    const std::map<int, Signal>& injections, const ReducedNetwork& reduced,
    const Eigen::MatrixXd& injection_map, const SimulationGrid& grid,
    double tol, std::optional<double> skip) {
  const OriginalSimulation original =
      simulate_original(net, excitations, injections, grid);
  ReducedSimulation mapped = simulate_reduced(reduced, excitations, grid);

  if (!injections.empty()) {
    const std::vector<int>& internal = net.partition.internal();
    const Eigen::Index nb =
        static_cast<Eigen::Index>(net.partition.boundary().size());
    if (injection_map.rows() != nb ||
        injection_map.cols() != static_cast<Eigen::Index>(internal.size())) {
      throw std::invalid_argument(
          "injection map dimensions do not match the partition");
    }
    const std::vector<Signal> inj =
        ordered_signals(injections, internal, "internal injection", false);

    // Injected current leaves through the terminals: subtract the mapped
    // share from each boundary channel, carried through the same ODE the
    // boundary currents obey.
    std::vector<Signal> mapped_injection;
    mapped_injection.reserve(nb);
    for (Eigen::Index b = 0; b < nb; ++b) {
      Signal acc;
      for (Eigen::Index i = 0; i < injection_map.cols(); ++i) {
        if (injection_map(b, i) != 0.0) {
          acc = acc + injection_map(b, i) * inj[static_cast<std::size_t>(i)];
        }
      }
      mapped_injection.push_back(std::move(acc));
    }
    const auto correction_rhs = [&](double t) -> Eigen::VectorXd {
      return -weighted_derivatives(reduced.form.p_tilde, mapped_injection, t);
    };
    mapped.boundary_currents.samples += integrate_lcc(
        reduced.form.p_tilde, correction_rhs, grid,
        Eigen::MatrixXd::Zero(effective_order(reduced.form.p_tilde), nb));
  }

  const double window = skip ? *skip : auto_transient_skip(reduced.form, grid);
  EquivalenceReport report = compare_traces(original.boundary_currents,
                                            mapped.boundary_currents, tol,
                                            window);
  report.warnings = original.warnings;
  report.warnings.insert(report.warnings.end(), mapped.warnings.begin(),
                         mapped.warnings.end());
  return report;
}

Eigen::MatrixXcd frequency_response(const GeneralizedNetwork& net,
                                    std::complex<double> s, double rtol) {
  const HomogeneousForm form = homogeneous_form(net, rtol);
  const Eigen::MatrixXd incidence = build_incidence(net.graph);
  const Eigen::MatrixXd laplacian =
      weighted_laplacian(incidence, form.edge_weight);
  const Eigen::MatrixXd schur = schur_complement(laplacian, net.partition);
  return transfer_ratio(form, s) * schur;
}

Eigen::MatrixXcd frequency_response(const ReducedNetwork& reduced,
                                    std::complex<double> s) {
  const Eigen::Index nb = reduced.network.graph.vertex_count();
  const Eigen::MatrixXd laplacian =
      reduced.network.graph.edge_count() > 0
          ? weighted_laplacian(build_incidence(reduced.network.graph),
                               reduced.gamma_hat)
          : Eigen::MatrixXd::Zero(nb, nb);
  return transfer_ratio(reduced.form, s) * laplacian;
}

std::vector<std::complex<double>> polynomial_roots(
    const Eigen::VectorXd& coeffs) {
  const int degree = effective_order(coeffs);
  std::vector<std::complex<double>> roots;
  if (degree == 0) {
    return roots;
  }
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) {
    companion(i, i - 1) = 1.0;
  }
  for (int j = 0; j < degree; ++j) {
    companion(j, degree - 1) = -coeffs[j] / coeffs[degree];
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
  roots.reserve(degree);
  for (Eigen::Index i = 0; i < degree; ++i) {
    roots.push_back(solver.eigenvalues()[i]);
  }
  return roots;
}

double auto_transient_skip(const HomogeneousForm& form,
                           const SimulationGrid& grid) {
  double slowest = 0.0;
  for (const Eigen::VectorXd* coeffs : {&form.p_tilde, &form.q_tilde}) {
    for (const auto& root : polynomial_roots(*coeffs)) {
      if (root.real() < -1e-300) {
        slowest = std::max(slowest, 1.0 / -root.real());
      }
    }
  }
  return std::min(10.0 * slowest, 0.2 * (grid.t_end - grid.t0));
}

std::vector<std::complex<double>> sample_nonpole_frequencies(
    const HomogeneousForm& form, int count, std::uint64_t seed) {
  const auto roots = polynomial_roots(form.p_tilde);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_radius(std::log(0.1),
                                                    std::log(10.0));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<std::complex<double>> samples;
  samples.reserve(count);
  while (static_cast<int>(samples.size()) < count) {
    const double r = std::exp(log_radius(rng));
    const double a = angle(rng);
    const std::complex<double> s(r * std::cos(a), r * std::sin(a));
    const bool near_pole =
        std::any_of(roots.begin(), roots.end(), [&](const auto& root) {
          return std::abs(s - root) < 1e-3;
        });
    if (!near_pole) {
      samples.push_back(s);
    }
  }
  return samples;
}

}  // namespace kronred
