#include "hgflow/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgflow/analysis.hpp"
#include "hgflow/errors.hpp"

namespace hgflow {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    const std::size_t offset = std::min<std::size_t>(err.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    throw ParseError(origin + ": line " + std::to_string(line) + ": " + err.what());
  }
}

std::string resolve(const std::string& base, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base.empty()) return p.string();
  return (fs::path(base) / p).string();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path.string() + ": cannot write file");
  out << content;
}

json to_array(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

// Columns of a schedule listed in "vertices" order, moved to canonical order.
Schedule permute_forcing(const Schedule& s, const Hypergraph& g) {
  std::vector<Eigen::VectorXd> values;
  for (const Eigen::VectorXd& row : s.values()) {
    Eigen::VectorXd v(row.size());
    for (std::size_t i = 0; i < g.file_order().size(); ++i) {
      v[static_cast<Eigen::Index>(g.file_order()[i])] = row[static_cast<Eigen::Index>(i)];
    }
    values.push_back(std::move(v));
  }
  return Schedule(s.times(), std::move(values));
}

State parse_x0(const json& doc, const Hypergraph& g, const Schedule& a, const std::string& base_dir) {
  if (doc.is_string()) {
    const std::string path = resolve(base_dir, doc.get<std::string>());
    return parse_x0(parse_json(read_text(path), path), g, a, base_dir);
  }
  const auto nv = static_cast<Eigen::Index>(g.num_vertices());
  const auto n = static_cast<Eigen::Index>(g.n_free());
  State x(nv);
  if (doc.is_array()) {
    if (doc.size() != g.num_vertices()) {
      throw ParseError("x0: expected " + std::to_string(g.num_vertices()) + " values, got " +
                       std::to_string(doc.size()));
    }
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (!doc[i].is_number()) throw ParseError("x0[" + std::to_string(i) + "]: expected a number");
      x[static_cast<Eigen::Index>(g.file_order()[i])] = doc[i].get<double>();
    }
    return x;
  }
  if (doc.is_object()) {
    // Keyed by vertex name; pinned entries may be omitted and default to a(0).
    x.tail(nv - n) = a.value(0.0);
    std::vector<bool> seen(g.num_vertices(), false);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const auto pos = std::find(g.names().begin(), g.names().end(), it.key());
      if (pos == g.names().end()) throw ParseError("x0: unknown vertex \"" + it.key() + "\"");
      if (!it.value().is_number()) throw ParseError("x0." + it.key() + ": expected a number");
      const auto v = static_cast<std::size_t>(pos - g.names().begin());
      x[static_cast<Eigen::Index>(v)] = it.value().get<double>();
      seen[v] = true;
    }
    for (std::size_t v = 0; v < g.n_free(); ++v) {
      if (!seen[v]) throw ParseError("x0: missing value for free vertex \"" + g.names()[v] + "\"");
    }
    return x;
  }
  throw ParseError("x0: expected an array, an object keyed by vertex name, or a file path");
}

struct Overrides {
  std::string p, dt, t_end, lambda, tol, seed, out;
  bool with_oracle = false;
};

void apply(const Overrides& o, RunManifest& m) {
  if (!o.p.empty()) m.p = parse_number(o.p);
  if (!o.dt.empty()) m.dt = parse_number(o.dt);
  if (!o.t_end.empty()) m.t_end = parse_number(o.t_end);
  if (!o.lambda.empty()) m.lambda = parse_number(o.lambda);
  if (!o.seed.empty()) {
    const double s = parse_number(o.seed);
    if (s < 0.0 || s != std::floor(s)) throw std::invalid_argument("--seed must be a nonnegative integer");
    m.seed = static_cast<std::uint64_t>(s);
  }
  if (!o.out.empty()) m.output_dir = o.out;
}

SolverConfig make_config(const RunManifest& m, const Overrides& o) {
  SolverConfig cfg;
  cfg.p = m.p;
  cfg.dt = m.dt;
  cfg.t_end = m.t_end;
  cfg.lambda = m.lambda;
  if (!o.tol.empty()) cfg.prox_tol = parse_number(o.tol);
  cfg.check();
  return cfg;
}

fs::path output_dir(const RunManifest& m) {
  const fs::path dir = m.output_dir.empty() ? fs::path(".") : fs::path(m.output_dir);
  fs::create_directories(dir);
  return dir;
}

json names_json(const Hypergraph& g) { return g.names(); }

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const Hypergraph g = load_hypergraph_file(path);
  out << "valid: " << g.n_free() << " free, " << g.m_pinned() << " pinned, " << g.num_edges() << " edges\n";
  const auto comps = components(g);
  if (comps.size() == 1) {
    out << "connected\n";
    return kExitOk;
  }
  err << "disconnected: " << comps.size() << " components:";
  for (const auto& comp : comps) {
    err << " {";
    for (std::size_t i = 0; i < comp.size(); ++i) err << (i ? ", " : "") << g.names()[comp[i]];
    err << '}';
  }
  err << '\n';
  return kExitInputError;
}

int cmd_simulate(const std::string& manifest_path, const Overrides& o, const std::string& scheme,
                 std::ostream& out) {
  RunManifest m = load_manifest(manifest_path);
  apply(o, m);
  const SolverConfig cfg = make_config(m, o);
  const Problem pb = load_problem(m);
  const Hypergraph& g = pb.graph;
  Trajectory traj;
  if (scheme == "constrained") {
    traj = implicit_euler(g, pb.x0, pb.a, pb.h, cfg);
  } else if (scheme == "penalized") {
    traj = yosida_trajectory(g, pb.x0, pb.a, pb.h, cfg);
  } else {
    throw std::invalid_argument("--scheme must be constrained or penalized");
  }
  const fs::path dir = output_dir(m);
  write_file(dir / "trajectory.csv", trajectory_csv(traj));

  const auto n = static_cast<Eigen::Index>(g.n_free());
  json summary;
  summary["command"] = "simulate";
  summary["scheme"] = scheme;
  summary["p"] = cfg.p;
  summary["dt"] = cfg.dt;
  summary["t_end"] = cfg.t_end;
  if (scheme == "penalized") summary["lambda"] = cfg.lambda;
  summary["seed"] = m.seed;
  summary["vertex_order"] = names_json(g);
  summary["n_free"] = g.n_free();
  summary["m_pinned"] = g.m_pinned();
  summary["steps"] = traj.size() - 1;
  summary["final_time"] = traj.times.back();
  summary["final_state"] = to_array(traj.states.back());
  summary["final_energy"] = energy(g, cfg.p, traj.states.back());
  double max_residual = 0.0, max_xi_free = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    max_residual = std::max(max_residual, traj.residuals[k]);
    max_xi_free = std::max(max_xi_free, traj.xi[k].head(n).norm());
  }
  summary["max_residual"] = max_residual;
  if (scheme == "constrained") summary["max_xi_free"] = max_xi_free;
  if (o.with_oracle) {
    if (cfg.p != 2.0 || !g.is_usual_graph()) {
      throw NotALinearCase("--with-oracle needs p = 2 and every edge of size 2");
    }
    const Trajectory oracle = linear_oracle(g, pb.x0, pb.a, pb.h, cfg.dt / 10.0, cfg.t_end);
    write_file(dir / "oracle.csv", trajectory_csv(oracle));
    summary["oracle_sup_error"] = sup_distance(traj, oracle);
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  out << "wrote " << (dir / "trajectory.csv").string() << " (" << traj.size() << " rows) and "
      << (dir / "summary.json").string() << '\n';
  return kExitOk;
}

int cmd_steady(const std::string& manifest_path, const Overrides& o, std::ostream& out) {
  RunManifest m = load_manifest(manifest_path);
  apply(o, m);
  Exponent{m.p};
  const double tol = o.tol.empty() ? 1e-9 : parse_number(o.tol);
  const Problem pb = load_problem(m);
  const Eigen::VectorXd& a_inf = pb.a.final_value();
  const Eigen::VectorXd& h_inf = pb.h.final_value();
  const SteadyStateResult result = steady_state(pb.graph, m.p, a_inf, h_inf, tol);

  json doc;
  doc["p"] = m.p;
  doc["vertex_order"] = names_json(pb.graph);
  int code = kExitOk;
  if (const auto* sp = std::get_if<StationaryPoint>(&result)) {
    doc["status"] = "stationary";
    doc["x_inf"] = to_array(sp->x_inf);
    doc["phi_value"] = sp->phi_value;
    doc["stationarity_residual"] = sp->stationarity_residual;
    out << "stationary point, Phi = " << format_number(sp->phi_value)
        << ", residual = " << format_number(sp->stationarity_residual) << '\n';
  } else {
    const auto& ub = std::get<UnboundedBelow>(result);
    doc["status"] = "unbounded_below";
    doc["base"] = to_array(ub.base);
    doc["ray"] = to_array(ub.ray);
    doc["recession_slope"] = ub.recession_slope;
    doc["mu"] = ub.mu;
    doc["phi_samples"] = ub.phi_samples;
    out << "Phi is unbounded below along the ray [";
    for (Eigen::Index i = 0; i < ub.ray.size(); ++i) out << (i ? ", " : "") << format_number(ub.ray[i]);
    out << "], recession slope " << format_number(ub.recession_slope) << '\n';
    code = kExitUnboundedBelow;
  }
  const fs::path dir = output_dir(m);
  write_file(dir / "steady.json", doc.dump(2) + "\n");
  return code;
}

int cmd_study_yosida(const std::string& manifest_path, const Overrides& o, const std::string& lambdas_text,
                     std::ostream& out) {
  RunManifest m = load_manifest(manifest_path);
  apply(o, m);
  const SolverConfig cfg = make_config(m, o);
  std::vector<double> lambdas;
  std::stringstream ss(lambdas_text);
  for (std::string item; std::getline(ss, item, ',');) lambdas.push_back(parse_number(item));
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("--lambdas entries must be positive");
  }
  const Problem pb = load_problem(m);
  const YosidaStudy study = yosida_study(pb.graph, pb.x0, pb.a, pb.h, cfg, lambdas);
  const std::string csv = yosida_csv(study);
  const fs::path dir = output_dir(m);
  write_file(dir / "yosida.csv", csv);
  out << csv << "deviation slope " << format_number(study.deviation_slope) << ", distance "
      << (study.distance_monotone ? "monotone" : "not monotone") << '\n';
  return kExitOk;
}

int cmd_study_decay(const std::string& manifest_path, const Overrides& o, const std::string& atol_text,
                    std::ostream& out) {
  RunManifest m = load_manifest(manifest_path);
  apply(o, m);
  const SolverConfig cfg = make_config(m, o);
  const double atol = parse_number(atol_text);
  const Problem pb = load_problem(m);
  if (!pb.a.is_identically_zero()) throw NonZeroData("decay study needs a = 0 on every pinned vertex");
  if (!pb.h.is_identically_zero()) throw NonZeroData("decay study needs h = 0");
  const Trajectory run = implicit_euler(pb.graph, pb.x0, pb.a, pb.h, cfg);
  const DecayReport report = decay_fit(run, pb.a, pb.h, cfg.p, atol);
  const std::string text = to_json(report);
  const fs::path dir = output_dir(m);
  write_file(dir / "decay.json", text + "\n");
  out << text << '\n';
  return kExitOk;
}

int cmd_compare(const std::string& path1, const std::string& path2, const Overrides& o, std::ostream& out) {
  RunManifest m1 = load_manifest(path1);
  RunManifest m2 = load_manifest(path2);
  apply(o, m1);
  SolverConfig cfg = make_config(m1, o);
  const Problem pb1 = load_problem(m1);
  const Problem pb2 = load_problem(m2);
  if (!(pb1.graph == pb2.graph)) throw std::invalid_argument("compare: the manifests use different graphs");
  // A common grid: each run also steps through the other run's knots.
  for (const Schedule* s : {&pb1.a, &pb1.h, &pb2.a, &pb2.h}) {
    cfg.extra_knots.insert(cfg.extra_knots.end(), s->times().begin(), s->times().end());
  }
  const Trajectory run1 = implicit_euler(pb1.graph, pb1.x0, pb1.a, pb1.h, cfg);
  const Trajectory run2 = implicit_euler(pb2.graph, pb2.x0, pb2.a, pb2.h, cfg);
  const DependenceReport report =
      dependence_check(pb1.graph, cfg.p, {&run1, &pb1.a, &pb1.h}, {&run2, &pb2.a, &pb2.h});
  const std::string text = to_json(report);
  const fs::path dir = output_dir(m1);
  write_file(dir / "dependence.json", text + "\n");
  out << text << '\n';
  return kExitOk;
}

}  // namespace

double parse_number(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  if (first == std::string::npos) throw std::invalid_argument("expected a number, got an empty string");
  const char* begin = text.data() + first;
  const char* end = text.data() + last + 1;
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::invalid_argument("expected a number, got \"" + text + "\"");
  }
  return value;
}

RunManifest load_manifest(const std::string& path) {
  const json doc = parse_json(read_text(path), path);
  if (!doc.is_object()) throw ParseError(path + ": manifest must be a JSON object");
  RunManifest m;
  m.base_dir = fs::path(path).parent_path().string();
  auto string_field = [&](const char* key) {
    if (!doc.at(key).is_string()) throw ParseError(path + ": \"" + key + "\" must be a string");
    return doc.at(key).get<std::string>();
  };
  auto number_field = [&](const char* key, double& target) {
    if (!doc.contains(key)) return;
    if (!doc.at(key).is_number()) throw ParseError(path + ": \"" + key + "\" must be a number");
    target = doc.at(key).get<double>();
  };
  for (const char* key : {"graph_path", "a_schedule_path"}) {
    if (!doc.contains(key)) throw ParseError(path + ": missing \"" + key + "\"");
  }
  m.graph_path = string_field("graph_path");
  m.a_schedule_path = string_field("a_schedule_path");
  if (doc.contains("h_schedule_path")) m.h_schedule_path = string_field("h_schedule_path");
  if (doc.contains("x0")) m.x0_json = doc.at("x0").dump();
  number_field("p", m.p);
  number_field("dt", m.dt);
  number_field("t_end", m.t_end);
  number_field("lambda", m.lambda);
  if (doc.contains("output_dir")) m.output_dir = resolve(m.base_dir, string_field("output_dir"));
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ParseError(path + ": \"seed\" must be a nonnegative integer");
    m.seed = doc.at("seed").get<std::uint64_t>();
  }
  return m;
}

Problem load_problem(const RunManifest& m) {
  Hypergraph g = load_hypergraph_file(resolve(m.base_dir, m.graph_path));
  Schedule a = load_schedule_file(resolve(m.base_dir, m.a_schedule_path), g.m_pinned());
  Schedule h = m.h_schedule_path
                   ? permute_forcing(load_schedule_file(resolve(m.base_dir, *m.h_schedule_path), g.num_vertices()), g)
                   : Schedule::zero(g.num_vertices());
  State x0;
  if (m.x0_json) {
    x0 = parse_x0(json::parse(*m.x0_json), g, a, m.base_dir);
  } else {
    std::mt19937_64 rng(m.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    x0.resize(static_cast<Eigen::Index>(g.num_vertices()));
    for (std::size_t v = 0; v < g.n_free(); ++v) x0[static_cast<Eigen::Index>(v)] = unit(rng);
    x0.tail(static_cast<Eigen::Index>(g.m_pinned())) = a.value(0.0);
  }
  return Problem{std::move(g), std::move(a), std::move(h), std::move(x0)};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion on hypergraphs with pinned vertices (hypergraph p-Laplacian flows)", "hgflow"};
  app.require_subcommand(1);

  Overrides o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--p", o.p, "exponent p >= 1");
    sub->add_option("--dt", o.dt, "time step");
    sub->add_option("--t-end", o.t_end, "horizon T");
    sub->add_option("--lambda", o.lambda, "penalty parameter of the penalized scheme");
    sub->add_option("--tol", o.tol, "stationarity tolerance of each minimization");
    sub->add_option("--seed", o.seed, "seed for a randomly drawn x0 when the manifest has none");
    sub->add_option("--out", o.out, "output directory (overrides the manifest)");
  };

  std::string graph_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a hypergraph file and its connectivity");
  validate_cmd->add_option("graph", graph_path, "hypergraph JSON file")->required();

  std::string manifest, manifest2, scheme = "constrained", lambdas = "1e-2,1e-3,1e-4", atol = "1e-10";
  auto* simulate_cmd = app.add_subcommand("simulate", "integrate the flow; writes trajectory.csv and summary.json");
  simulate_cmd->add_option("manifest", manifest, "run manifest")->required();
  simulate_cmd->add_option("--scheme", scheme, "constrained (implicit Euler on K_a) or penalized");
  simulate_cmd->add_flag("--with-oracle", o.with_oracle, "also write oracle.csv from the linear solver (p = 2, graphs)");
  add_common(simulate_cmd);

  auto* steady_cmd = app.add_subcommand("steady", "minimize phi - h.x over K for the final a and h; writes steady.json");
  steady_cmd->add_option("manifest", manifest, "run manifest")->required();
  add_common(steady_cmd);

  auto* yosida_cmd = app.add_subcommand(
      "study-yosida",
      "penalized runs against the constrained one; writes yosida.csv with columns "
      "lambda,pin_deviation,pin_deviation_sq,c1,distance,deviation_order,distance_order");
  yosida_cmd->add_option("manifest", manifest, "run manifest")->required();
  yosida_cmd->add_option("--lambdas", lambdas, "comma-separated penalty parameters");
  add_common(yosida_cmd);

  auto* decay_cmd = app.add_subcommand("study-decay", "fit the decay law of a run with a = h = 0; writes decay.json");
  decay_cmd->add_option("manifest", manifest, "run manifest")->required();
  decay_cmd->add_option("--atol", atol, "extinction threshold on |x|");
  add_common(decay_cmd);

  auto* compare_cmd = app.add_subcommand("compare", "continuous-dependence check of two runs; writes dependence.json");
  compare_cmd->add_option("manifest1", manifest, "first run manifest")->required();
  compare_cmd->add_option("manifest2", manifest2, "second run manifest")->required();
  add_common(compare_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(graph_path, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(manifest, o, scheme, out);
    if (steady_cmd->parsed()) return cmd_steady(manifest, o, out);
    if (yosida_cmd->parsed()) return cmd_study_yosida(manifest, o, lambdas, out);
    if (decay_cmd->parsed()) return cmd_study_decay(manifest, o, atol, out);
    if (compare_cmd->parsed()) return cmd_compare(manifest, manifest2, o, out);
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergenceFailure;
  } catch (const NotConverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergenceFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace hgflow
