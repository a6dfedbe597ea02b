#include "kronred/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace kronred {

namespace {

using json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

[[noreturn]] void fail(const std::string& message) {
  throw ParseError(message);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    fail(std::string("invalid JSON: ") + err.what());
  }
}

double require_number(const json& node, const char* field,
                      const std::string& context) {
  if (!node.contains(field) || !node[field].is_number()) {
    fail(context + ": missing numeric field '" + field + "'");
  }
  return node[field].get<double>();
}

int require_int(const json& node, const char* field,
                const std::string& context) {
  if (!node.contains(field) || !node[field].is_number_integer()) {
    fail(context + ": missing integer field '" + field + "'");
  }
  return node[field].get<int>();
}

void check_format(const json& doc, const char* kind) {
  if (require_int(doc, "format", kind) != kFormatVersion) {
    fail(std::string(kind) + ": unsupported format version");
  }
}

Eigen::VectorXd coeff_array(const json& node, const char* field, int nu,
                            const std::string& context) {
  const json& arr = node[field];
  if (!arr.is_array() || arr.empty()) {
    fail(context + ": '" + field + "' must be a nonempty array");
  }
  if (static_cast<int>(arr.size()) != nu + 1) {
    fail(context + ": '" + field + "' has length " +
         std::to_string(arr.size()) + ", expected nu+1 = " +
         std::to_string(nu + 1));
  }
  Eigen::VectorXd out(nu + 1);
  for (int j = 0; j <= nu; ++j) {
    if (!arr[j].is_number()) {
      fail(context + ": '" + field + "' entries must be numbers");
    }
    out[j] = arr[j].get<double>();
  }
  return out;
}

ElementKind element_kind(const std::string& name, const std::string& context) {
  if (name == "R") return ElementKind::Resistor;
  if (name == "L") return ElementKind::Inductor;
  if (name == "C") return ElementKind::Capacitor;
  if (name == "RL") return ElementKind::SeriesRL;
  if (name == "RLC") return ElementKind::SeriesRLC;
  fail(context + ": unknown element kind '" + name +
       "' (expected R, L, C, RL or RLC)");
}

Signal signal_from_json(const json& node, const std::string& context) {
  if (!node.is_object() || !node.contains("type") ||
      !node["type"].is_string()) {
    fail(context + ": signal node must be an object with a 'type' string");
  }
  const std::string type = node["type"].get<std::string>();
  if (type == "const") {
    return Signal::constant(require_number(node, "value", context));
  }
  if (type == "poly") {
    if (!node.contains("coeffs") || !node["coeffs"].is_array() ||
        node["coeffs"].empty()) {
      fail(context + ": poly signal needs a nonempty 'coeffs' array");
    }
    std::vector<double> coeffs;
    for (const auto& c : node["coeffs"]) {
      if (!c.is_number()) {
        fail(context + ": poly coefficients must be numbers");
      }
      coeffs.push_back(c.get<double>());
    }
    return Signal::polynomial(std::move(coeffs));
  }
  if (type == "sin") {
    const double amplitude = require_number(node, "amplitude", context);
    const double omega = require_number(node, "omega", context);
    const double phase =
        node.contains("phase") ? require_number(node, "phase", context) : 0.0;
    return Signal::sinusoid(amplitude, omega, phase);
  }
  if (type == "exp") {
    return Signal::exponential(require_number(node, "amplitude", context),
                               require_number(node, "rate", context));
  }
  if (type == "sum") {
    if (!node.contains("terms") || !node["terms"].is_array()) {
      fail(context + ": sum signal needs a 'terms' array");
    }
    Signal acc;
    for (const auto& term : node["terms"]) {
      acc = acc + signal_from_json(term, context);
    }
    return acc;
  }
  if (type == "scale") {
    if (!node.contains("signal")) {
      fail(context + ": scale signal needs a 'signal' child");
    }
    return require_number(node, "factor", context) *
           signal_from_json(node["signal"], context);
  }
  fail(context + ": unknown signal type '" + type +
       "' (expected const, poly, sin, exp, sum or scale)");
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

json network_to_json(const GeneralizedNetwork& net) {
  json doc;
  doc["format"] = kFormatVersion;
  doc["nu"] = net.nu;
  doc["vertices"] = json::array();
  for (int v = 1; v <= net.graph.vertex_count(); ++v) {
    doc["vertices"].push_back(
        {{"id", v}, {"boundary", net.partition.is_boundary(v)}});
  }
  doc["edges"] = json::array();
  for (int k = 0; k < net.graph.edge_count(); ++k) {
    const Edge& e = net.graph.edges()[k];
    json edge = {{"tail", e.tail}, {"head", e.head}};
    edge["p"] = std::vector<double>(net.p[k].begin(), net.p[k].end());
    edge["q"] = std::vector<double>(net.q[k].begin(), net.q[k].end());
    doc["edges"].push_back(std::move(edge));
  }
  return doc;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(
          issues.empty()
              ? std::string("network validation failed")
              : "network validation failed: " + issues.front() +
                    (issues.size() > 1
                         ? " (+" + std::to_string(issues.size() - 1) + " more)"
                         : "")),
      issues_(std::move(issues)) {}

GeneralizedNetwork parse_netlist(const std::string& text) {
  const json doc = parse_json(text);
  check_format(doc, "netlist");
  const int nu = require_int(doc, "nu", "netlist");
  if (nu < 0) {
    fail("netlist: nu must be nonnegative");
  }

  if (!doc.contains("vertices") || !doc["vertices"].is_array() ||
      doc["vertices"].empty()) {
    fail("netlist: 'vertices' must be a nonempty array");
  }
  const int vertex_count = static_cast<int>(doc["vertices"].size());
  std::vector<bool> seen(vertex_count, false);
  std::vector<int> boundary;
  for (const auto& vnode : doc["vertices"]) {
    const int id = require_int(vnode, "id", "vertex");
    if (id < 1 || id > vertex_count) {
      fail("vertex ids must be dense 1.." + std::to_string(vertex_count) +
           ", got " + std::to_string(id));
    }
    if (seen[id - 1]) {
      fail("vertex " + std::to_string(id) + " appears twice");
    }
    seen[id - 1] = true;
    if (!vnode.contains("boundary") || !vnode["boundary"].is_boolean()) {
      fail("vertex " + std::to_string(id) + ": missing boolean 'boundary'");
    }
    if (vnode["boundary"].get<bool>()) {
      boundary.push_back(id);
    }
  }
  if (boundary.empty()) {
    fail("netlist: at least one vertex must be boundary");
  }

  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    fail("netlist: 'edges' must be an array");
  }
  std::vector<Edge> edges;
  std::vector<Eigen::VectorXd> p, q;
  int index = 0;
  for (const auto& enode : doc["edges"]) {
    ++index;
    const std::string context = "edge " + std::to_string(index);
    Edge e{require_int(enode, "tail", context),
           require_int(enode, "head", context)};
    if (e.tail < 1 || e.tail > vertex_count || e.head < 1 ||
        e.head > vertex_count) {
      fail(context + ": endpoint outside 1.." + std::to_string(vertex_count));
    }
    if (e.tail == e.head) {
      fail(context + ": self-loop at vertex " + std::to_string(e.tail));
    }
    const bool has_arrays = enode.contains("p") || enode.contains("q");
    const bool has_element = enode.contains("element");
    if (has_arrays == has_element) {
      fail(context + ": give either explicit 'p'/'q' arrays or an 'element'");
    }
    if (has_arrays) {
      if (!enode.contains("p") || !enode.contains("q")) {
        fail(context + ": both 'p' and 'q' arrays are required");
      }
      p.push_back(coeff_array(enode, "p", nu, context));
      q.push_back(coeff_array(enode, "q", nu, context));
    } else {
      const json& el = enode["element"];
      if (!el.is_object() || !el.contains("kind") ||
          !el["kind"].is_string() || !el.contains("values") ||
          !el["values"].is_array()) {
        fail(context + ": element needs a 'kind' string and 'values' array");
      }
      std::vector<double> values;
      for (const auto& v : el["values"]) {
        if (!v.is_number()) {
          fail(context + ": element values must be numbers");
        }
        values.push_back(v.get<double>());
      }
      try {
        ElementCoefficients coeffs =
            element(element_kind(el["kind"].get<std::string>(), context),
                    values, nu);
        p.push_back(std::move(coeffs.p));
        q.push_back(std::move(coeffs.q));
      } catch (const std::invalid_argument& err) {
        fail(context + ": " + err.what());
      }
    }
    edges.push_back(e);
  }

  GeneralizedNetwork net{DirectedGraph(vertex_count, std::move(edges)),
                         VertexPartition(vertex_count, std::move(boundary)),
                         nu, std::move(p), std::move(q)};
  auto issues = validate(net);
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return net;
}

std::string serialize_netlist(const GeneralizedNetwork& net) {
  return network_to_json(net).dump(2) + "\n";
}

std::string serialize_netlist(const ReducedNetwork& reduced) {
  return network_to_json(reduced.network).dump(2) + "\n";
}

ExcitationSetup parse_excitation(const std::string& text,
                                 const GeneralizedNetwork& net) {
  const json doc = parse_json(text);
  check_format(doc, "excitation");

  if (!doc.contains("grid") || !doc["grid"].is_object()) {
    fail("excitation: missing 'grid' object");
  }
  ExcitationSetup setup;
  setup.grid.t0 = require_number(doc["grid"], "t0", "grid");
  setup.grid.t_end = require_number(doc["grid"], "t_end", "grid");
  setup.grid.dt = require_number(doc["grid"], "dt", "grid");
  if (!(setup.grid.dt > 0.0) || !(setup.grid.t_end > setup.grid.t0)) {
    fail("grid: requires dt > 0 and t_end > t0");
  }

  const auto parse_group = [&](const char* field, bool boundary_role)
      -> std::map<int, Signal> {
    std::map<int, Signal> out;
    if (!doc.contains(field)) {
      return out;
    }
    if (!doc[field].is_object()) {
      fail(std::string("excitation: '") + field + "' must be an object");
    }
    for (const auto& [key, value] : doc[field].items()) {
      int vertex = 0;
      try {
        std::size_t used = 0;
        vertex = std::stoi(key, &used);
        if (used != key.size()) {
          throw std::invalid_argument(key);
        }
      } catch (const std::exception&) {
        fail(std::string(field) + ": key '" + key +
             "' is not a vertex id");
      }
      if (vertex < 1 || vertex > net.graph.vertex_count()) {
        fail(std::string(field) + ": vertex " + std::to_string(vertex) +
             " does not exist");
      }
      if (net.partition.is_boundary(vertex) != boundary_role) {
        fail(std::string(field) + ": vertex " + std::to_string(vertex) +
             (boundary_role ? " is not a boundary vertex"
                            : " is not an internal vertex"));
      }
      out.emplace(vertex,
                  signal_from_json(value, std::string(field) + " " + key));
    }
    return out;
  };

  setup.boundary = parse_group("boundary", true);
  setup.injections = parse_group("injections", false);
  for (int id : net.partition.boundary()) {
    if (!setup.boundary.count(id)) {
      fail("excitation: no signal for boundary vertex " + std::to_string(id));
    }
  }
  return setup;
}

Signal parse_signal(const std::string& json_text) {
  return signal_from_json(parse_json(json_text), "signal");
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "t";
  for (const auto& channel : trace.channels) {
    os << "," << channel;
  }
  os << "\n";
  for (Eigen::Index i = 0; i < trace.sample_count(); ++i) {
    os << format_double(trace.time_at(i));
    for (Eigen::Index c = 0; c < trace.samples.cols(); ++c) {
      os << "," << format_double(trace.samples(i, c));
    }
    os << "\n";
  }
}

void write_trace_csv(std::ostream& os, const Trace& currents,
                     const Trace& potentials) {
  if (currents.sample_count() != potentials.sample_count() ||
      currents.t0 != potentials.t0 || currents.dt != potentials.dt) {
    throw std::invalid_argument("traces are on different grids");
  }
  Trace merged = currents;
  merged.channels.insert(merged.channels.end(), potentials.channels.begin(),
                         potentials.channels.end());
  merged.samples.conservativeResize(
      currents.sample_count(),
      currents.samples.cols() + potentials.samples.cols());
  merged.samples.rightCols(potentials.samples.cols()) = potentials.samples;
  write_trace_csv(os, merged);
}

std::string format_reduce_report(const GeneralizedNetwork& original,
                                 const ReducedNetwork& reduced) {
  std::ostringstream os;
  os << "status: ok\n";
  os << "vertices_before: " << original.graph.vertex_count() << "\n";
  os << "vertices_after: " << reduced.network.graph.vertex_count() << "\n";
  os << "eliminated_internal_vertices: "
     << original.partition.internal().size() << "\n";
  os << "edges_before: " << original.graph.edge_count() << "\n";
  os << "edges_after: " << reduced.network.graph.edge_count() << "\n";
  os << "schur_residual_max: "
     << format_double(reduced.reconstruction_residual) << "\n";
  os << "terminal_map:";
  for (std::size_t k = 0; k < reduced.boundary_ids.size(); ++k) {
    os << " " << k + 1 << "->" << reduced.boundary_ids[k];
  }
  os << "\n";
  return os.str();
}

std::string format_equivalence_report(const EquivalenceReport& report) {
  std::ostringstream os;
  os << "status: " << (report.pass ? "pass" : "fail") << "\n";
  os << "tolerance: " << format_double(report.tolerance) << "\n";
  os << "transient_skip: " << format_double(report.transient_skip) << "\n";
  os << "max_abs_error: " << format_double(report.max_abs_error) << "\n";
  os << "rms_error: " << format_double(report.rms_error) << "\n";
  for (const auto& channel : report.channels) {
    os << "channel " << channel.channel << ": max "
       << format_double(channel.max_abs) << " rms "
       << format_double(channel.rms) << "\n";
  }
  for (const auto& warning : report.warnings) {
    os << "warning: " << warning << "\n";
  }
  return os.str();
}

}  // namespace kronred
