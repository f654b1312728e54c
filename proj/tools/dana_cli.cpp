// Experiment runner: instance generation, Laplacian weight design, algorithm
// runs, and batch design statistics, all driven by JSON configs with flag
// overrides (flags win). Exit codes: 0 success, 1 algorithm failure,
// 2 usage or validation error.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dana/dana_c.hpp"
#include "dana/dana_d.hpp"
#include "dana/reference.hpp"
#include "dana/weight_design.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dana;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write file: " + path.string());
  out << text;
}

json load_config(const std::string& path, const std::set<std::string>& known) {
  json j = json::parse(slurp(path));
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw InvalidInput("unknown config key: " + it.key());
  return j;
}

struct SeedStream {
  std::uint64_t base;
  std::uint64_t at(std::uint64_t idx) const { return Rng::substream(base, idx); }
};

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

int cmd_design(int n, int m, const std::string& family, std::uint64_t seed, bool global_bounds,
               bool with_p5, const std::string& out_dir) {
  auto g = random_connected(n, m, seed);
  auto inst = random_instance(n, cost_family(family), 2.0 * n, Rng::substream(seed, 1));
  const Vec delta = inst.delta_bounds();
  const Vec Delta = inst.Delta_bounds();

  DesignResult local = design(g, delta, Delta, BoundsMode::local);
  std::optional<double> eps_a;
  if (with_p5) eps_a = solve_p5(g).eps_A;

  DesignResult* chosen = &local;
  std::optional<DesignResult> global;
  if (global_bounds) {
    global = design(g, delta, Delta, BoundsMode::global);
    chosen = &*global;
    const double eps_g = global->eps_local.value_or(global->eps_Lstar.value);
    if (eps_g < local.eps_Lstar.value)
      std::cout << "note: global-bounds design beat the local one on this draw (eps " << eps_g << " < "
                << local.eps_Lstar.value << ")\n";
  }

  json j = json::parse(design_result_to_json(*chosen, eps_a));
  j["epsilon_local_design"] = local.eps_Lstar.value;
  spit(fs::path(out_dir) / "design.json", j.dump(2));

  std::cout << "epsilon=" << chosen->eps_Lstar.value << " beta=" << chosen->beta;
  if (eps_a) std::cout << " eps_A=" << *eps_a;
  std::cout << " edges=" << m << " n=" << n << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// table1
// ---------------------------------------------------------------------------

struct TableRow {
  int n = 0;
  int m = 0;
  std::string family = "tight";
};

struct RowStats {
  double mean_eps = 0.0, std_eps = 0.0, mean_gap = 0.0, std_gap = 0.0;
};

RowStats run_table_row(const TableRow& row, int trials, const SeedStream& seeds, std::uint64_t row_idx) {
  Vec eps(trials), gap(trials);
  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::vector<std::future<std::pair<double, double>>> futs;
  futs.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    futs.push_back(std::async(
        t % workers == 0 ? std::launch::deferred : std::launch::async,
        [&, t]() -> std::pair<double, double> {
          const std::uint64_t s = seeds.at(row_idx * 1000003ULL + t);
          auto g = random_connected(row.n, row.m, s);
          auto inst = random_instance(row.n, cost_family(row.family), 2.0 * row.n,
                                      Rng::substream(s, 7));
          auto d = design(g, inst.delta_bounds(), inst.Delta_bounds(), BoundsMode::local);
          auto p5 = solve_p5(g);
          return {d.eps_Lstar.value, d.eps_Lstar.value - p5.eps_A};
        }));
  }
  for (int t = 0; t < trials; ++t) {
    auto [e, ga] = futs[t].get();
    eps[t] = e;
    gap[t] = ga;
  }
  auto stats = [&](const Vec& v) {
    const double mean = sum(v) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair<double, double>{mean, std::sqrt(var / (v.size() - 1))};
  };
  RowStats out;
  std::tie(out.mean_eps, out.std_eps) = stats(eps);
  std::tie(out.mean_gap, out.std_gap) = stats(gap);
  return out;
}

int cmd_table1(const std::vector<TableRow>& rows, int trials, std::uint64_t seed,
               const std::string& out_dir) {
  if (trials < 2) throw InvalidInput("table1: trials must be at least 2");
  SeedStream seeds{seed};
  std::string csv = "row,n,m,family,trials,mean_eps,std_eps,mean_gap,std_gap\n";
  char buf[256];
  for (size_t r = 0; r < rows.size(); ++r) {
    RowStats s = run_table_row(rows[r], trials, seeds, r);
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%s,%d,%.6f,%.6f,%.6f,%.6f\n", r, rows[r].n, rows[r].m,
                  rows[r].family.c_str(), trials, s.mean_eps, s.std_eps, s.mean_gap, s.std_gap);
    csv += buf;
    std::cout << "row n=" << rows[r].n << " m=" << rows[r].m << " family=" << rows[r].family
              << " mean_eps=" << s.mean_eps << " mean_gap=" << s.mean_gap << "\n";
  }
  spit(fs::path(out_dir) / "table1.csv", csv);
  return 0;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

DispatchProblem instance_from_config(const json& cfg, std::uint64_t seed) {
  if (cfg.contains("file")) return instance_from_json(slurp(cfg.at("file").get<std::string>()));
  if (cfg.contains("inline")) return instance_from_json(cfg.at("inline").dump());
  if (cfg.contains("random")) {
    const json& r = cfg.at("random");
    std::optional<BoxDistribution> boxes;
    if (r.value("boxes", false)) boxes = BoxDistribution{};
    return random_instance(r.at("n").get<int>(), cost_family(r.at("family").get<std::string>()),
                           r.at("d").get<double>(), r.value("seed", seed), boxes);
  }
  throw InvalidInput("run config: instance needs one of file/inline/random");
}

WeightedLaplacian laplacian_from_config(const json& cfg, const DispatchProblem& p, std::uint64_t seed) {
  if (cfg.contains("file")) return laplacian_from_json(slurp(cfg.at("file").get<std::string>()));
  if (!cfg.contains("graph")) throw InvalidInput("run config: laplacian needs file or graph");
  const json& gj = cfg.at("graph");
  GraphTopology g = gj.contains("inline")
                        ? graph_from_json(gj.at("inline").dump())
                        : random_connected(gj.at("random").at("n").get<int>(),
                                           gj.at("random").at("m").get<int>(),
                                           gj.at("random").value("seed", seed));
  const std::string mode = cfg.value("mode", "design");
  const double scale = cfg.value("scale", 1.0);
  auto finish = [&](WeightedLaplacian l) { return scale == 1.0 ? l : l.scaled(scale); };
  if (mode == "unweighted") return finish(unweighted_laplacian(g));
  if (mode == "unweighted-post-scaled")
    return finish(post_scale(unweighted_laplacian(g), p.delta_bounds(), p.Delta_bounds()).L_star);
  if (mode == "design")
    return finish(design(g, p.delta_bounds(), p.Delta_bounds(), BoundsMode::local).L_star);
  if (mode == "design-global")
    return finish(design(g, p.delta_bounds(), p.Delta_bounds(), BoundsMode::global).L_star);
  throw InvalidInput("run config: unknown laplacian mode " + mode);
}

DispatchProblem relaxed(const DispatchProblem& p) {
  return make_dispatch_problem(p.costs, p.demand, p.x0);
}

StepRule rule_of(const std::string& name) {
  if (name == "theorem1") return StepRule::theorem1_safe;
  if (name == "theorem2") return StepRule::theorem2_point;
  if (name == "fixed") return StepRule::fixed;
  throw InvalidInput("run config: unknown step rule " + name);
}

struct RunSpec {
  std::string algo = "dana-d";
  std::string label;
  int q = 0;
  std::string rule = "theorem1";
  double alpha = 0.0;
  double safety = 0.99;
  int iters = 100000;
  double tol = 1e-10;
  double h = 1e-3;
  double T = 50.0;
  Vec lambda0;
  bool relax = false;
  int trace_stride = 1;
};

void apply_spec_json(RunSpec& s, const json& j) {
  // note: a "laplacian" key inside a runs entry is handled by the caller
  if (j.contains("algo")) s.algo = j.at("algo").get<std::string>();
  if (j.contains("label")) s.label = j.at("label").get<std::string>();
  if (j.contains("q")) s.q = j.at("q").get<int>();
  if (j.contains("rule")) s.rule = j.at("rule").get<std::string>();
  if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
  if (j.contains("safety")) s.safety = j.at("safety").get<double>();
  if (j.contains("iters")) s.iters = j.at("iters").get<int>();
  if (j.contains("tol")) s.tol = j.at("tol").get<double>();
  if (j.contains("h")) s.h = j.at("h").get<double>();
  if (j.contains("T")) s.T = j.at("T").get<double>();
  if (j.contains("lambda0")) s.lambda0 = j.at("lambda0").get<Vec>();
  if (j.contains("relax")) s.relax = j.at("relax").get<bool>();
  if (j.contains("trace_stride")) s.trace_stride = j.at("trace_stride").get<int>();
}

int execute_run(const RunSpec& spec, const DispatchProblem& inst, const WeightedLaplacian& lap,
                const json& cfg, std::uint64_t seed, bool no_timing, const std::string& out_dir);

int execute_run(const RunSpec& spec, const DispatchProblem& inst, const WeightedLaplacian& lap,
                const json& cfg, std::uint64_t seed, bool no_timing, const std::string& out_dir) {
  const std::string label = spec.label.empty() ? spec.algo : spec.label;
  const fs::path trace_path = fs::path(out_dir) / ("trace_" + label + ".csv");

  if (spec.algo == "dana-d" || spec.algo == "dana-d-agents" || spec.algo == "dgd") {
    DispatchProblem p = (inst.has_boxes() && spec.relax) ? relaxed(inst) : inst;
    DanaDConfig dc;
    dc.q = spec.q;
    dc.rule = rule_of(spec.rule);
    dc.alpha = spec.alpha;
    dc.safety = spec.safety;
    dc.max_iters = spec.iters;
    dc.grad_tol = spec.tol;
    dc.emit_timing = !no_timing;
    dc.trace_stride = spec.trace_stride;
    dc.f_star = solve_dual(p).f_star;
    DanaDResult r = spec.algo == "dana-d-agents" ? run_message_passing(p, lap, dc)
                    : spec.algo == "dgd"         ? run_dgd(p, lap, dc)
                                                 : run_matrix_form(p, lap, dc);
    spit(trace_path, dana_d_trace_csv(r));
    std::cout << label << ": converged=" << r.converged << " iters=" << r.iters
              << " grad_norm=" << (r.trace.empty() ? 0.0 : r.trace.back().grad_norm)
              << " rounds=" << r.rounds_reported << " alpha=" << r.alpha_used
              << " eps=" << r.epsilon_used << "\n";
    return 0;
  }

  if (spec.algo == "dana-c") {
    DanaCConfig cc;
    cc.q = spec.q;
    cc.h = spec.h;
    cc.T = spec.T;
    cc.lambda0 = spec.lambda0;
    cc.trace_stride = spec.trace_stride;
    OracleSolution oracle = inst.n() <= 12 ? solve_box_qp_bruteforce(inst) : solve_dual(inst);
    attach_z_star(oracle, inst, lap, 0.0);
    cc.oracle = oracle;
    DanaCResult r = integrate(inst, lap, cc);
    spit(trace_path, dana_c_trace_csv(r.trace));
    // time for the primal error to stay below 1e-4; the even/odd series-order
    // comparison reads off this column
    double t_primal = -1.0;
    for (auto it = r.trace.rbegin(); it != r.trace.rend(); ++it) {
      if (it->primal_err > 1e-4) break;
      t_primal = it->t;
    }
    std::cout << label << ": kkt_stationarity=" << r.kkt.stationarity << " kkt_primal=" << r.kkt.primal
              << " kkt_dual=" << r.kkt.dual << " kkt_compslack=" << r.kkt.compslack
              << " vq_violations=" << r.vq_violations << " t_to_primal_1e-4=" << t_primal << "\n";
    return 0;
  }

  if (spec.algo == "dana-c-robust") {
    RobustConfig rc;
    rc.h = spec.h;
    rc.T = spec.T;
    rc.noise_seed = seed;
    rc.trace_stride = spec.trace_stride;
    rc.gain_x = cfg.value("gain_x", 1.0);
    rc.gain_z = cfg.value("gain_z", 1.0);
    rc.gain_nu = cfg.value("gain_nu", 1.0);
    rc.gain_lambda = cfg.value("gain_lambda", 1.0);
    Vec dbar(inst.n(), inst.demand / inst.n());
    if (cfg.contains("dbar")) dbar = cfg.at("dbar").get<Vec>();
    if (cfg.contains("x_init")) rc.x_init = cfg.at("x_init").get<Vec>();
    std::vector<Perturbation> perts;
    if (cfg.contains("perturbations"))
      for (const auto& pj : cfg.at("perturbations"))
        perts.push_back({pj.at("t").get<double>(), pj.at("amplitude").get<double>()});
    OracleSolution oracle = solve_dual(inst);
    rc.oracle = oracle;
    RobustResult r = integrate_robust(inst, lap, dbar, rc, perts);
    spit(trace_path, dana_c_trace_csv(r.trace));
    std::cout << label << ": final_equality_violation=" << r.trace.back().feas_sum
              << " final_primal_err=" << r.trace.back().primal_err << "\n";
    return 0;
  }

  throw InvalidInput("run: unknown algo " + spec.algo);
}

int cmd_run(const json& cfg, const RunSpec& flag_spec, const json& flag_mask, std::uint64_t seed,
            bool no_timing, const std::string& out_dir) {
  DispatchProblem inst = instance_from_config(cfg.at("instance"), seed);
  WeightedLaplacian lap = laplacian_from_config(cfg.at("laplacian"), inst, seed);
  if (inst.n() != lap.n()) throw InvalidInput("run: instance and Laplacian dimensions differ");

  if (cfg.contains("runs")) {
    for (const auto& rj : cfg.at("runs")) {
      RunSpec s;
      apply_spec_json(s, cfg);  // shared defaults
      apply_spec_json(s, rj);
      apply_spec_json(s, flag_mask);  // flags win
      const WeightedLaplacian run_lap =
          rj.contains("laplacian") ? laplacian_from_config(rj.at("laplacian"), inst, seed) : lap;
      if (inst.n() != run_lap.n()) throw InvalidInput("run: instance and Laplacian dimensions differ");
      int rc = execute_run(s, inst, run_lap, cfg, seed, no_timing, out_dir);
      if (rc != 0) return rc;
    }
    return 0;
  }
  RunSpec s = flag_spec;
  apply_spec_json(s, cfg);
  apply_spec_json(s, flag_mask);
  return execute_run(s, inst, lap, cfg, seed, no_timing, out_dir);
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

int cmd_oracle(const std::string& instance_path, const std::string& out_dir) {
  DispatchProblem p = instance_from_json(slurp(instance_path));
  OracleSolution s;
  if (p.has_boxes())
    s = p.n() <= 12 && p.is_quadratic() ? solve_box_qp_bruteforce(p) : solve_dual(p);
  else
    s = p.is_quadratic() ? solve_equality_qp(p) : solve_dual(p);
  spit(fs::path(out_dir) / "oracle.json", oracle_to_json(s));
  std::cout << "f_star=" << s.f_star << " nu_star=" << s.nu_star << " method=" << s.method << "\n";
  return 0;
}

std::vector<TableRow> parse_rows(const std::string& text) {
  // "10x30:tight,30x90:tight" style
  std::vector<TableRow> rows;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    TableRow r;
    const auto xpos = tok.find('x');
    const auto cpos = tok.find(':');
    if (xpos == std::string::npos || cpos == std::string::npos || cpos < xpos)
      throw InvalidInput("table1: rows must look like 10x30:tight");
    r.n = std::stoi(tok.substr(0, xpos));
    r.m = std::stoi(tok.substr(xpos + 1, cpos - xpos - 1));
    r.family = tok.substr(cpos + 1);
    rows.push_back(r);
  }
  if (rows.empty()) throw InvalidInput("table1: no rows given");
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed approximate-Newton workbench"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = ".";
  std::string config_path;
  std::uint64_t seed = 1;
  bool no_timing = false;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--seed", seed, "base RNG seed");
  app.add_flag("--no-timing", no_timing, "write zeros in elapsed columns for byte-stable output");

  auto* design_cmd = app.add_subcommand("design", "edge-weight design on a random graph");
  int dn = 0, dm = 0;
  std::string dfamily = "tight";
  bool dglobal = false, dwith_p5 = false;
  design_cmd->add_option("--n", dn, "node count")->required();
  design_cmd->add_option("--m", dm, "edge count")->required();
  design_cmd->add_option("--cost", dfamily, "cost family (tight|wide|sinusoidal|quad40)");
  design_cmd->add_flag("--global-bounds", dglobal, "use scalar Hessian bounds");
  design_cmd->add_flag("--with-p5", dwith_p5, "also compute the two-hop lower bound");

  auto* table_cmd = app.add_subcommand("table1", "batch design statistics");
  std::string rows_text;
  int trials = 20;
  table_cmd->add_option("--rows", rows_text, "rows, e.g. 10x30:tight,30x90:tight");
  table_cmd->add_option("--trials", trials, "trials per row");

  auto* run_cmd = app.add_subcommand("run", "run an algorithm and write its trace");
  std::string algo = "dana-d", label, rule = "theorem1";
  int q = 0, iters = 100000, trace_stride = 1;
  double alpha = 0.0, tol = 1e-10, hstep = 1e-3, horizon = 50.0;
  bool relax = false;
  run_cmd->add_option("--algo", algo, "dana-d|dana-d-agents|dana-c|dana-c-robust|dgd");
  run_cmd->add_option("--label", label, "trace file label");
  run_cmd->add_option("--q", q, "series truncation order");
  run_cmd->add_option("--rule", rule, "step rule: theorem1|theorem2|fixed");
  run_cmd->add_option("--alpha", alpha, "fixed step size");
  run_cmd->add_option("--iters", iters, "iteration cap");
  run_cmd->add_option("--tol", tol, "gradient stop tolerance");
  run_cmd->add_option("--dt", hstep, "integrator step");
  run_cmd->add_option("--T", horizon, "integration horizon");
  run_cmd->add_flag("--relax", relax, "drop box constraints for the discrete algorithm");
  run_cmd->add_option("--trace-stride", trace_stride, "record every k-th iterate");
  std::string instance_path, lap_path;
  run_cmd->add_option("--instance", instance_path, "instance JSON file");
  run_cmd->add_option("--L", lap_path, "Laplacian JSON file");

  auto* oracle_cmd = app.add_subcommand("oracle", "exact solution of an instance");
  std::string oracle_instance;
  oracle_cmd->add_option("--instance", oracle_instance, "instance JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (design_cmd->parsed()) {
      static const std::set<std::string> keys = {"n", "m", "cost", "global_bounds", "with_p5"};
      if (!config_path.empty()) {
        json cfg = load_config(config_path, keys);
        if (design_cmd->count("--n") == 0 && cfg.contains("n")) dn = cfg["n"].get<int>();
        if (design_cmd->count("--m") == 0 && cfg.contains("m")) dm = cfg["m"].get<int>();
        if (design_cmd->count("--cost") == 0 && cfg.contains("cost"))
          dfamily = cfg["cost"].get<std::string>();
        if (!dglobal && cfg.value("global_bounds", false)) dglobal = true;
        if (!dwith_p5 && cfg.value("with_p5", false)) dwith_p5 = true;
      }
      return cmd_design(dn, dm, dfamily, seed, dglobal, dwith_p5, out_dir);
    }
    if (table_cmd->parsed()) {
      static const std::set<std::string> keys = {"rows", "trials", "seed"};
      std::vector<TableRow> rows;
      if (!config_path.empty()) {
        json cfg = load_config(config_path, keys);
        if (cfg.contains("rows") && rows_text.empty()) {
          for (const auto& rj : cfg.at("rows"))
            rows.push_back({rj.at("n").get<int>(), rj.at("m").get<int>(),
                            rj.value("family", std::string("tight"))});
        }
        if (table_cmd->count("--trials") == 0 && cfg.contains("trials"))
          trials = cfg["trials"].get<int>();
        if (app.count("--seed") == 0 && cfg.contains("seed")) seed = cfg["seed"].get<std::uint64_t>();
      }
      if (!rows_text.empty()) rows = parse_rows(rows_text);
      if (rows.empty()) throw InvalidInput("table1: provide --rows or a config with rows");
      return cmd_table1(rows, trials, seed, out_dir);
    }
    if (run_cmd->parsed()) {
      static const std::set<std::string> keys = {
          "instance", "laplacian", "runs",   "algo",   "label",         "q",    "rule",
          "alpha",    "safety",    "iters",  "tol",    "h",             "T",    "lambda0",
          "relax",    "dbar",      "x_init", "seed",   "perturbations", "trace_stride",
          "gain_x",   "gain_z",    "gain_nu", "gain_lambda"};
      json cfg;
      if (!config_path.empty()) cfg = load_config(config_path, keys);
      if (!instance_path.empty()) cfg["instance"] = {{"file", instance_path}};
      if (!lap_path.empty()) cfg["laplacian"] = {{"file", lap_path}};
      if (!cfg.contains("instance") || !cfg.contains("laplacian"))
        throw InvalidInput("run: need --instance/--L or a config defining them");
      if (app.count("--seed") == 0 && cfg.contains("seed")) seed = cfg["seed"].get<std::uint64_t>();

      RunSpec flag_spec;
      json flag_mask = json::object();
      auto set_if = [&](const char* opt, const char* key, auto value) {
        if (run_cmd->count(opt) > 0) flag_mask[key] = value;
      };
      set_if("--algo", "algo", algo);
      set_if("--label", "label", label);
      set_if("--q", "q", q);
      set_if("--rule", "rule", rule);
      set_if("--alpha", "alpha", alpha);
      set_if("--iters", "iters", iters);
      set_if("--tol", "tol", tol);
      set_if("--dt", "h", hstep);
      set_if("--T", "T", horizon);
      set_if("--relax", "relax", relax);
      set_if("--trace-stride", "trace_stride", trace_stride);
      flag_spec.algo = algo;
      return cmd_run(cfg, flag_spec, flag_mask, seed, no_timing, out_dir);
    }
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_instance, out_dir);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
