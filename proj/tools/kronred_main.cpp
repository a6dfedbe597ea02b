// kronred: time-domain Kron reduction of generalized electrical networks.
//
// Exit codes: 0 ok, 1 validation failure, 2 not reducible, 3 io/parse
// failure, 4 numeric failure.

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "kronred/io.hpp"
#include "kronred/network.hpp"
#include "kronred/reduction.hpp"
#include "kronred/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNotReducible = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw kronred::ParseError("cannot open file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw kronred::ParseError("cannot write file: " + path);
  }
  out << content;
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

struct Options {
  std::string netlist_path;
  std::string excitation_path;
  std::string output_path;
  std::string out_prefix;
  std::string skip = "auto";
  double tol = 1e-6;
  double rtol = kronred::kDefaultRank1Rtol;
  int samples = 20;
  std::uint64_t seed = 1;
};

int run_validate(const Options& opt) {
  try {
    kronred::parse_netlist(read_file(opt.netlist_path));
  } catch (const kronred::ValidationError& err) {
    for (const auto& issue : err.issues()) {
      std::cout << "violation: " << issue << "\n";
    }
    return kExitValidation;
  }
  std::cout << "status: ok\n";
  return kExitOk;
}

int run_reduce(const Options& opt) {
  const auto net = kronred::parse_netlist(read_file(opt.netlist_path));
  const auto reduced = kronred::kron_reduce(net, opt.rtol);
  if (!opt.output_path.empty()) {
    write_file(opt.output_path, kronred::serialize_netlist(reduced));
  }
  std::cout << kronred::format_reduce_report(net, reduced);
  return kExitOk;
}

int run_simulate(const Options& opt) {
  const auto net = kronred::parse_netlist(read_file(opt.netlist_path));
  const auto setup =
      kronred::parse_excitation(read_file(opt.excitation_path), net);
  const auto simulation = kronred::simulate_original(
      net, setup.boundary, setup.injections, setup.grid,
      kronred::IcPolicy::AtRest, opt.rtol);
  std::ostringstream csv;
  kronred::write_trace_csv(csv, simulation.boundary_currents,
                           simulation.internal_potentials);
  if (!opt.output_path.empty()) {
    write_file(opt.output_path, csv.str());
  } else {
    std::cout << csv.str();
  }
  for (const auto& warning : simulation.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  return kExitOk;
}

int run_compare(const Options& opt) {
  const auto net = kronred::parse_netlist(read_file(opt.netlist_path));
  const auto setup =
      kronred::parse_excitation(read_file(opt.excitation_path), net);
  const auto reduced = kronred::kron_reduce(net, opt.rtol);

  std::optional<double> skip;
  if (opt.skip != "auto") {
    try {
      std::size_t used = 0;
      skip = std::stod(opt.skip, &used);
      if (used != opt.skip.size()) {
        throw std::invalid_argument(opt.skip);
      }
    } catch (const std::exception&) {
      throw kronred::ParseError("--skip expects a number of seconds or 'auto', got '" +
                                opt.skip + "'");
    }
  }
  Eigen::MatrixXd injection_map;
  if (!setup.injections.empty()) {
    injection_map = kronred::injection_map(net, opt.rtol);
  }
  const auto report = kronred::simulate_with_injection(
      net, setup.boundary, setup.injections, reduced, injection_map,
      setup.grid, opt.tol, skip);
  std::cout << kronred::format_equivalence_report(report);

  if (!opt.out_prefix.empty()) {
    const auto original = kronred::simulate_original(
        net, setup.boundary, setup.injections, setup.grid);
    const auto reduced_sim =
        kronred::simulate_reduced(reduced, setup.boundary, setup.grid);
    std::ostringstream a, b;
    kronred::write_trace_csv(a, original.boundary_currents);
    kronred::write_trace_csv(b, reduced_sim.boundary_currents);
    write_file(opt.out_prefix + "_original.csv", a.str());
    write_file(opt.out_prefix + "_reduced.csv", b.str());
  }
  return report.pass ? kExitOk : kExitValidation;
}

int run_freqresp(const Options& opt) {
  const auto net = kronred::parse_netlist(read_file(opt.netlist_path));
  const auto reduced = kronred::kron_reduce(net, opt.rtol);
  const auto points = kronred::sample_nonpole_frequencies(
      reduced.form, opt.samples, opt.seed);

  double max_rel = 0.0;
  for (const auto& s : points) {
    const Eigen::MatrixXcd yo = kronred::frequency_response(net, s, opt.rtol);
    const Eigen::MatrixXcd yr = kronred::frequency_response(reduced, s);
    const double floor = 1e-12 * yo.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < yo.rows(); ++i) {
      for (Eigen::Index j = 0; j < yo.cols(); ++j) {
        const double denom = std::max(std::abs(yo(i, j)), floor);
        if (denom > 0.0) {
          max_rel = std::max(max_rel, std::abs(yo(i, j) - yr(i, j)) / denom);
        }
      }
    }
  }
  std::cout << "status: ok\n";
  std::cout << "samples: " << points.size() << "\n";
  std::cout << "seed: " << opt.seed << "\n";
  std::cout << "max_relative_error: " << format_double(max_rel) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-domain Kron reduction of generalized electrical networks"};
  app.require_subcommand(1);
  Options opt;

  auto* validate = app.add_subcommand(
      "validate", "Check a netlist against the model invariants");
  validate->add_option("netlist", opt.netlist_path, "netlist document")
      ->required();

  auto* reduce = app.add_subcommand(
      "reduce", "Eliminate internal vertices; write the reduced netlist");
  reduce->add_option("netlist", opt.netlist_path, "netlist document")
      ->required();
  reduce->add_option("-o,--output", opt.output_path, "reduced netlist path");
  reduce->add_option("--rtol", opt.rtol, "rank-1 relative tolerance");

  auto* simulate = app.add_subcommand(
      "simulate", "Simulate boundary currents and internal potentials");
  simulate->add_option("netlist", opt.netlist_path, "netlist document")
      ->required();
  simulate->add_option("excitation", opt.excitation_path,
                       "excitation document")
      ->required();
  simulate->add_option("-o,--output", opt.output_path, "trace CSV path");
  simulate->add_option("--rtol", opt.rtol, "rank-1 relative tolerance");

  auto* compare = app.add_subcommand(
      "compare", "Reduce, simulate both paths, and report trace agreement");
  compare->add_option("netlist", opt.netlist_path, "netlist document")
      ->required();
  compare->add_option("excitation", opt.excitation_path,
                      "excitation document")
      ->required();
  compare->add_option("--tol", opt.tol, "agreement tolerance");
  compare->add_option("--skip", opt.skip,
                      "transient skip in seconds, or 'auto'");
  compare->add_option("--out-prefix", opt.out_prefix,
                      "write <prefix>_original.csv and <prefix>_reduced.csv");
  compare->add_option("--rtol", opt.rtol, "rank-1 relative tolerance");

  auto* freqresp = app.add_subcommand(
      "freqresp", "Compare admittances at random non-pole frequencies");
  freqresp->add_option("netlist", opt.netlist_path, "netlist document")
      ->required();
  freqresp->add_option("--samples", opt.samples, "number of sample points");
  freqresp->add_option("--seed", opt.seed, "random seed");
  freqresp->add_option("--rtol", opt.rtol, "rank-1 relative tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitIo;
  }

  try {
    if (validate->parsed()) return run_validate(opt);
    if (reduce->parsed()) return run_reduce(opt);
    if (simulate->parsed()) return run_simulate(opt);
    if (compare->parsed()) return run_compare(opt);
    if (freqresp->parsed()) return run_freqresp(opt);
  } catch (const kronred::ValidationError& err) {
    for (const auto& issue : err.issues()) {
      std::cerr << "violation: " << issue << "\n";
    }
    return kExitValidation;
  } catch (const kronred::NotReducibleError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNotReducible;
  } catch (const kronred::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitIo;
  } catch (const kronred::NumericError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
