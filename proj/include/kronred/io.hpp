#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kronred/network.hpp"
#include "kronred/reduction.hpp"
#include "kronred/signal.hpp"
#include "kronred/simulation.hpp"

namespace kronred {

/// Malformed document: bad JSON, schema violation, unknown element kind,
/// structurally impossible graph.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed document describing a network that violates a model
/// invariant; carries the full validation report.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parses a netlist document (format 1): nu, vertices with boundary flags,
/// edges with explicit p/q arrays or element shorthands. The parsed network
/// is validated; violations raise ValidationError with the report.
GeneralizedNetwork parse_netlist(const std::string& text);

/// Inverse of parse_netlist up to element-shorthand expansion: always emits
/// explicit coefficient arrays. parse(serialize(net)) == net field for field.
std::string serialize_netlist(const GeneralizedNetwork& net);

/// Reduced network as a standalone netlist document; vertices are
/// renumbered densely, original terminal ids go in the report.
std::string serialize_netlist(const ReducedNetwork& reduced);

struct ExcitationSetup {
  std::map<int, Signal> boundary;    // keyed by boundary vertex id
  std::map<int, Signal> injections;  // keyed by internal vertex id
  SimulationGrid grid;
};

/// Parses an excitation document: a signal expression per boundary vertex
/// (all required), optional injections per internal vertex, and the time
/// grid. Role mismatches are reported against the given network.
ExcitationSetup parse_excitation(const std::string& text,
                                 const GeneralizedNetwork& net);

/// Signal expression node: const | poly | sin | exp | sum | scale.
Signal parse_signal(const std::string& json_text);

/// CSV with a leading t column; values carry 17 significant digits so
/// binary64 samples round-trip exactly.
void write_trace_csv(std::ostream& os, const Trace& trace);
void write_trace_csv(std::ostream& os, const Trace& currents,
                     const Trace& potentials);

std::string format_reduce_report(const GeneralizedNetwork& original,
                                 const ReducedNetwork& reduced);
std::string format_equivalence_report(const EquivalenceReport& report);

}  // namespace kronred
