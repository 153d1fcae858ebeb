#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hgflow/constraint.hpp"
#include "hgflow/hypergraph.hpp"
#include "hgflow/solver.hpp"

namespace hgflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitConvergenceFailure = 2,
  kExitUnboundedBelow = 3,
};

/// Run description. Paths are resolved against the manifest's directory.
///   {"graph_path": "g.json", "a_schedule_path": "a.json",
///    "h_schedule_path": "h.json", "x0": [...] | {"name": v} | "x0.json",
///    "p": 2, "dt": 0.01, "t_end": 1, "lambda": 0.001,
///    "output_dir": "out", "seed": 0}
/// The a schedule lists the pinned vertices in the graph's "pinned" order; h
/// and an x0 array list every vertex in the graph's "vertices" order.
struct RunManifest {
  std::string graph_path;
  std::string a_schedule_path;
  std::optional<std::string> h_schedule_path;
  std::optional<std::string> x0_json;  ///< raw JSON of the x0 entry
  std::string base_dir;
  double p = 2.0;
  double dt = 1e-2;
  double t_end = 1.0;
  double lambda = 1e-3;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
};

RunManifest load_manifest(const std::string& path);

/// A manifest with its files loaded and permuted into canonical order.
struct Problem {
  Hypergraph graph;
  Schedule a;
  Schedule h;
  State x0;
};

/// Loads the graph and schedules. A missing h is zero; a missing x0 draws the
/// free values uniformly from [-1, 1] with the manifest seed and sets the pins
/// to a(0).
Problem load_problem(const RunManifest& manifest);

/// Parses a decimal number independently of the global locale.
double parse_number(const std::string& text);

/// Entry point of the hgflow tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hgflow
