// Command-line front end: solve | convergence | xi | mesh-info.
// Configuration comes from flat key=value files, overridable by flags;
// all outputs land under --out as CSV.

#include <Eigen/Core>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hdgstokes/hdgstokes.hpp"

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitNoConvergence = 3;

struct RunConfig {
  std::string problem = "example1";
  std::vector<int> n_list = {8};
  int k = 1;
  double gamma = 1.0;
  double dt = 256.0;
  double tol = 1e-8;
  int max_iter = 200;
  int reference_n = 512;
  double omega = M_PI / 2.0;
  std::string out_dir = ".";
};

std::vector<int> parse_n_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw std::invalid_argument("empty n list");
  return out;
}

void apply_key(RunConfig& rc, const std::string& key, const std::string& value) {
  if (key == "problem") rc.problem = value;
  else if (key == "n") rc.n_list = parse_n_list(value);
  else if (key == "k") rc.k = std::stoi(value);
  else if (key == "gamma") rc.gamma = std::stod(value);
  else if (key == "dt") rc.dt = std::stod(value);
  else if (key == "tol") rc.tol = std::stod(value);
  else if (key == "max_iter") rc.max_iter = std::stoi(value);
  else if (key == "reference_n") rc.reference_n = std::stoi(value);
  else if (key == "omega") rc.omega = std::stod(value);
  else if (key == "out") rc.out_dir = value;
  else throw std::invalid_argument("unknown config key: " + key);
}

void load_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    apply_key(rc, key, value);
  }
}

hdgstokes::Problem select_problem(const RunConfig& rc) {
  if (rc.problem == "example1") return hdgstokes::example1();
  if (rc.problem == "example2") return hdgstokes::example2();
  throw std::invalid_argument("unknown problem: " + rc.problem +
                              " (expected example1 or example2)");
}

hdgstokes::SolverConfig solver_config(const RunConfig& rc) {
  hdgstokes::SolverConfig cfg;
  cfg.k = rc.k;
  cfg.gamma = rc.gamma;
  cfg.dt = rc.dt;
  cfg.tol = rc.tol;
  cfg.max_iter = rc.max_iter;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const RunConfig& rc, const std::string& name) {
  std::filesystem::create_directories(rc.out_dir);
  std::ofstream os(std::filesystem::path(rc.out_dir) / name);
  if (!os) throw std::runtime_error("cannot open output file: " + name);
  return os;
}

int cmd_solve(const RunConfig& rc) {
  using namespace hdgstokes;
  const Problem pr = select_problem(rc);
  const SolverConfig cfg = solver_config(rc);
  const int n = rc.n_list.front();
  Mesh mesh = build_square_mesh(n, pr.side, pr.origin);
  auto [sol, rep] = solve_control_problem(mesh, cfg, pr.f, pr.y_d);
  {
    auto os = open_out(rc, "iterations.csv");
    write_iteration_log(rep, os);
  }
  const DofMap dm = build_dof_map(mesh, cfg.k);
  const auto dump = [&](const char* name, const std::vector<Eigen::VectorXd>& field, int comps) {
    auto os = open_out(rc, name);
    write_field_csv(field, comps, os);
  };
  dump("field_L.csv", sol.L, 4);
  dump("field_G.csv", sol.G, 4);
  dump("field_y.csv", sol.y, 2);
  dump("field_z.csv", sol.z, 2);
  dump("field_p.csv", sol.p, 1);
  dump("field_q.csv", sol.q, 1);
  {
    auto os = open_out(rc, "trace_yhat.csv");
    write_trace_csv(mesh, dm, sol.yhat, false, 2, os);
  }
  {
    auto os = open_out(rc, "trace_zhat.csv");
    write_trace_csv(mesh, dm, sol.zhat, false, 2, os);
  }
  {
    auto os = open_out(rc, "control_u.csv");
    write_trace_csv(mesh, dm, sol.u, true, 1, os);
  }
  std::cout << "solved " << rc.problem << " n=" << n << " k=" << cfg.k
            << " iterations=" << rep.iterations << (rep.converged ? "" : " (max_iter reached)")
            << "\n";
  if (!rep.converged) return kExitNoConvergence;
  return 0;
}

int cmd_convergence(const RunConfig& rc) {
  using namespace hdgstokes;
  const Problem pr = select_problem(rc);
  const SolverConfig cfg = solver_config(rc);
  ConvergenceTable table =
      convergence_study(pr, cfg, rc.n_list, pr.has_exact ? 0 : rc.reference_n, &std::cout);
  auto os = open_out(rc, "convergence.csv");
  write_convergence_csv(table, os);
  write_convergence_csv(table, std::cout);
  return 0;
}

int cmd_xi(const RunConfig& rc) {
  using namespace hdgstokes;
  const double xi = singular_exponent(rc.omega);
  std::cout << "omega=" << rc.omega << " xi=" << xi << " admissible="
            << ((xi > 1.5) ? "true" : "false") << "\n";
  return 0;
}

int cmd_mesh_info(const RunConfig& rc, bool dump) {
  using namespace hdgstokes;
  const Problem pr = select_problem(rc);
  const int n = rc.n_list.front();
  Mesh mesh = build_square_mesh(n, pr.side, pr.origin);
  std::cout << "n=" << n << " elements=" << mesh.num_elements()
            << " vertices=" << mesh.vertices.size() << " faces=" << mesh.num_faces()
            << " interior_faces=" << mesh.num_interior_faces()
            << " boundary_faces=" << mesh.num_boundary_faces() << " h_max=" << mesh.h_max << "\n";
  if (dump) {
    auto os = open_out(rc, "mesh.csv");
    write_mesh_csv(mesh, os);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("HDGSTOKES_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  CLI::App app{"HDG solver for tangential Dirichlet boundary control of Stokes flow"};
  app.require_subcommand(1);

  // flag values land here; the config file is applied first, then any flag
  // that was actually given overrides it
  std::string config_file;
  std::map<std::string, std::string> flag_values;
  bool dump_mesh = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "flat key=value config file");
    for (const char* key : {"problem", "n", "k", "gamma", "dt", "tol", "max_iter",
                            "reference_n", "omega", "out"}) {
      std::string opt = std::string("--") + key;
      for (auto& ch : opt) if (ch == '_') ch = '-';
      sub->add_option_function<std::string>(
          opt, [&flag_values, key](const std::string& v) { flag_values[key] = v; });
    }
  };

  auto* solve = app.add_subcommand("solve", "solve one configuration and dump fields");
  add_common(solve);
  auto* conv = app.add_subcommand("convergence", "error/order table over a mesh sequence");
  add_common(conv);
  auto* xi = app.add_subcommand("xi", "singular exponent of a corner angle");
  add_common(xi);
  auto* info = app.add_subcommand("mesh-info", "mesh counts (optionally dump CSV)");
  add_common(info);
  info->add_flag("--dump", dump_mesh, "write mesh.csv to --out");

  CLI11_PARSE(app, argc, argv);

  RunConfig rc;
  try {
    if (!config_file.empty()) load_config_file(rc, config_file);
    for (const auto& [key, value] : flag_values) apply_key(rc, key, value);
    if (solve->parsed()) return cmd_solve(rc);
    if (conv->parsed()) return cmd_convergence(rc);
    if (xi->parsed()) return cmd_xi(rc);
    if (info->parsed()) return cmd_mesh_info(rc, dump_mesh);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
