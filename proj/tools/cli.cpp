#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "phasered/diagnostics.hpp"
#include "phasered/limit_cycle.hpp"
#include "phasered/network.hpp"
#include "phasered/parallel.hpp"
#include "phasered/phase_geometry.hpp"
#include "phasered/reduction.hpp"
#include "phasered/table.hpp"

namespace phasered::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

struct Context {
  std::string command;
  RunConfig cfg;
  fs::path out_dir;
  std::string format = "csv";
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> outputs;
  json tolerances = json::object();

  void write_text(const std::string& name, const std::string& text) {
    write_file_atomic(out_dir / name, text);
    outputs.push_back(name);
  }
  void write_table(const std::string& stem, const Table& table) {
    std::ostringstream os;
    if (format == "json") {
      table.write_json(os);
      write_text(stem + ".json", os.str());
    } else {
      table.write_csv(os);
      write_text(stem + ".csv", os.str());
    }
  }
  void write_json(const std::string& stem, const json& j) {
    write_text(stem + ".json", j.dump(2) + "\n");
  }
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json tol_json(Tolerance t) { return {{"rel", t.rel}, {"abs", t.abs}}; }

const ModelConfig& require_model(const Context& ctx) {
  if (!ctx.cfg.model) throw ConfigError("model", "missing required field");
  return *ctx.cfg.model;
}

LimitCycle cycle_for(Context& ctx, const OscillatorModel& model) {
  ctx.tolerances["cycle"] = tol_json(ctx.cfg.cycle.tol);
  return find_limit_cycle(model, require_model(ctx).initial_guess(model),
                          ctx.cfg.cycle);
}

json model_json(const OscillatorModel& model) {
  json params = json::object();
  for (const auto& [k, v] : model.params) params[k] = v;
  return {{"name", model.name}, {"params", params}};
}

json lock_json(const LockResult& lock) {
  json fps = json::array();
  for (const auto& fp : lock.fixed_points)
    fps.push_back({{"psi", fp.psi}, {"stable", fp.stable}, {"slope", fp.slope}});
  return {{"locked", lock.locked},
          {"fixed_points", fps},
          {"condition_value", lock.condition_value}};
}

json sync_json(const SyncReport& r) {
  return {{"S", r.S},
          {"locked", r.locked},
          {"slips", r.slips},
          {"threshold", r.threshold},
          {"psi_star", r.psi_star ? json(*r.psi_star) : json(nullptr)}};
}

void cmd_find_cycle(Context& ctx) {
  const OscillatorModel model = require_model(ctx).build();
  const LimitCycle cycle = cycle_for(ctx, model);
  std::vector<std::string> cols{"theta"};
  for (int i = 0; i < cycle.dim(); ++i) cols.push_back("x" + std::to_string(i + 1));
  Table table(std::move(cols));
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    std::vector<double> row{cycle.grid[k]};
    for (int i = 0; i < cycle.dim(); ++i) row.push_back(cycle.points[k][i]);
    table.add_row(std::move(row));
  }
  ctx.write_table("cycle", table);
  ctx.write_json("summary", {{"model", model_json(model)},
                             {"T", cycle.period},
                             {"omega0", cycle.omega0},
                             {"floquet", cycle.floquet},
                             {"anchor", vec_json(cycle.anchor)},
                             {"grid_size", cycle.size()}});
}

void cmd_isochrons(Context& ctx) {
  const OscillatorModel model = require_model(ctx).build();
  const LimitCycle cycle = cycle_for(ctx, model);
  const IsochronConfig iso_cfg = ctx.cfg.isochrons.value_or(IsochronConfig{});
  IsochronOptions opt;
  ctx.tolerances["isochron"] = tol_json(opt.tol);
  std::vector<Isochron> isos(iso_cfg.thetas.size());
  parallel_for(isos.size(), ctx.threads, [&](std::size_t i) {
    isos[i] = compute_isochron(model, cycle, iso_cfg.thetas[i],
                               {iso_cfg.r_lo, iso_cfg.r_hi}, iso_cfg.points, opt);
  });
  std::vector<std::string> cols{"theta", "index"};
  for (int i = 0; i < model.dim; ++i) cols.push_back("x" + std::to_string(i + 1));
  cols.push_back("residual");
  Table table(std::move(cols));
  json per = json::array();
  double worst = 0.0;
  for (const Isochron& iso : isos) {
    for (std::size_t j = 0; j < iso.points.size(); ++j) {
      std::vector<double> row{iso.theta, static_cast<double>(j)};
      for (int i = 0; i < model.dim; ++i) row.push_back(iso.points[j][i]);
      row.push_back(iso.residual[j]);
      worst = std::max(worst, iso.residual[j]);
      table.add_row(std::move(row));
    }
    per.push_back({{"theta", iso.theta},
                   {"points", iso.points.size()},
                   {"extent", iso.extent}});
  }
  ctx.write_table("isochrons", table);
  ctx.write_json("summary", {{"model", model_json(model)},
                             {"T", cycle.period},
                             {"isochrons", per},
                             {"max_residual", worst}});
}

void cmd_prc(Context& ctx) {
  const OscillatorModel model = require_model(ctx).build();
  const LimitCycle cycle = cycle_for(ctx, model);
  SensitivityOptions opt;
  ctx.tolerances["sensitivity"] = tol_json(opt.tol);
  const PhaseSensitivity Z =
      phase_sensitivity(model, cycle, ctx.cfg.prc_method, opt);
  std::vector<std::string> cols{"theta"};
  for (int i = 0; i < model.dim; ++i) cols.push_back("Z" + std::to_string(i + 1));
  Table table(std::move(cols));
  double analytic_err = 0.0;
  for (std::size_t k = 0; k < Z.Z.size(); ++k) {
    std::vector<double> row{Z.grid[k]};
    for (int i = 0; i < model.dim; ++i) row.push_back(Z.Z[k][i]);
    table.add_row(std::move(row));
    if (model.analytic_Z)
      analytic_err = std::max(
          analytic_err,
          (Z.Z[k] - model.analytic_Z(Z.grid[k])).lpNorm<Eigen::Infinity>());
  }
  ctx.write_table("prc", table);
  json summary = {
      {"model", model_json(model)},
      {"method", ctx.cfg.prc_method == SensitivityMethod::adjoint
                     ? "adjoint"
                     : "finite_difference"},
      {"omega0", cycle.omega0},
      {"normalization_error", normalization_error(model, cycle, Z)},
      {"analytic_max_error",
       model.analytic_Z ? json(analytic_err) : json(nullptr)}};
  ctx.write_json("summary", summary);
}

void cmd_reduce(Context& ctx) {
  const OscillatorModel model = require_model(ctx).build();
  if (!ctx.cfg.forcing) throw ConfigError("forcing", "missing required field");
  const ForcingConfig& fc = *ctx.cfg.forcing;
  if (fc.component >= model.dim)
    throw ConfigError("forcing.component", "exceeds the model dimension");
  const LimitCycle cycle = cycle_for(ctx, model);
  SensitivityOptions sopt;
  ctx.tolerances["sensitivity"] = tol_json(sopt.tol);
  const PhaseSensitivity Z =
      phase_sensitivity(model, cycle, SensitivityMethod::adjoint, sopt);
  const Perturbation pert =
      sinusoidal_forcing(model.dim, fc.component, fc.amplitude, fc.frequency);
  const ReduceConfig& rc = ctx.cfg.reduce;
  AverageOptions aopt;
  aopt.grid_size = rc.grid_size;
  aopt.threads = ctx.threads;
  const CouplingFunction gbar =
      average_periodic(Z, cycle, pert, rc.omega_force, aopt);

  Table table({"phi", "q"});
  for (std::size_t k = 0; k < gbar.size(); ++k)
    table.add_row({gbar.grid()[k], gbar.values()[k]});
  ctx.write_table("coupling", table);

  const double delta = cycle.omega0 - rc.omega_force;
  json summary = {{"model", model_json(model)},
                  {"omega0", cycle.omega0},
                  {"omega_force", rc.omega_force},
                  {"epsilon", fc.amplitude},
                  {"delta", delta},
                  {"provenance", to_string(gbar.provenance())},
                  {"max_abs", gbar.max_abs()},
                  {"lock", nullptr},
                  {"comparison", nullptr}};
  if (fc.amplitude > 0.0)
    summary["lock"] = lock_json(lock_analysis(delta, fc.amplitude, gbar));
  if (rc.compare) {
    if (!(fc.amplitude > 0.0))
      throw ConfigError("forcing.amplitude", "comparison needs a positive amplitude");
    const ReductionError e = forced_reduction_error(
        model, cycle, Z, pert, 0.0, rc.horizon_mult / fc.amplitude, rc.samples);
    summary["comparison"] = {{"horizon", e.horizon},
                             {"max_error", e.max_error},
                             {"rms_error", e.rms_error}};
    Table ph({"t", "theta_full", "theta_reduced"});
    for (std::size_t k = 0; k < e.times.size(); ++k)
      ph.add_row({e.times[k], e.full_phase[k], e.reduced_phase[k]});
    ctx.write_table("phases", ph);
  }
  ctx.write_json("summary", summary);
}

void cmd_simulate(Context& ctx) {
  if (!ctx.cfg.network) throw ConfigError("network", "missing required field");
  const NetworkConfig& nc = *ctx.cfg.network;
  const NetworkSpec spec = nc.build();
  NetworkOptions nopt;
  nopt.cycle = ctx.cfg.cycle;
  ctx.tolerances["cycle"] = tol_json(nopt.cycle.tol);
  const PhaseModel pm = build_phase_model(spec, nopt);

  const std::size_t n = spec.size();
  CompareOptions copt;
  copt.samples = nc.samples;
  if (nc.random_theta0) {
    std::mt19937_64 rng(ctx.seed);
    for (std::size_t i = 0; i < n; ++i)
      copt.theta0.push_back(two_pi * std::generate_canonical<double, 53>(rng));
  } else {
    copt.theta0 = nc.theta0;
  }
  ctx.tolerances["full"] = tol_json(copt.full_tol);
  ctx.tolerances["reduced"] = tol_json(copt.reduced_tol);
  const ComparisonReport rep =
      compare_full_vs_reduced(spec, pm, nc.horizon_mult, copt);

  auto phase_table = [&](const PhaseTrajectory& tr) {
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 0; i < n; ++i) cols.push_back("theta" + std::to_string(i + 1));
    Table t(std::move(cols));
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      std::vector<double> row{tr.times[k]};
      for (std::size_t i = 0; i < n; ++i) row.push_back(tr.wrapped(i, k));
      t.add_row(std::move(row));
    }
    return t;
  };
  ctx.write_table("phases_full", phase_table(rep.full));
  ctx.write_table("phases_reduced", phase_table(rep.reduced));

  std::vector<std::string> cols{"phi"};
  std::vector<const CouplingFunction*> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (pm.Q[i][j]) {
        cols.push_back("q_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
        edges.push_back(&*pm.Q[i][j]);
      }
  if (!edges.empty()) {
    Table qt(std::move(cols));
    for (std::size_t k = 0; k < edges.front()->size(); ++k) {
      std::vector<double> row{edges.front()->grid()[k]};
      for (const auto* q : edges) row.push_back(q->values()[k]);
      qt.add_row(std::move(row));
    }
    ctx.write_table("coupling", qt);
  }

  json omega = json::array(), prescribed = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    omega.push_back(pm.Omega[i]);
    prescribed.push_back(static_cast<bool>(pm.prescribed[i]));
  }
  json summary = {
      {"N", n},
      {"epsilon", spec.epsilon},
      {"Omega", omega},
      {"prescribed_Z", prescribed},
      {"max_abs_q", pm.max_abs_q()},
      {"adjoint_max_abs_q", number_or_null(pm.adjoint_max_q)},
      {"warnings", pm.warnings},
      {"theta0", copt.theta0.empty() ? std::vector<double>(n, 0.0) : copt.theta0},
      {"comparison",
       {{"horizon", rep.horizon},
        {"max_error", rep.max_error},
        {"rms_error", rep.rms_error},
        {"max_difference_error", rep.max_difference_error},
        {"exceeds_first_order_bound", rep.exceeds_first_order}}},
      {"sync", nullptr}};
  if (n == 2) {
    std::vector<double> phi;
    for (std::size_t k = 0; k < rep.full.times.size(); ++k)
      phi.push_back(wrap_difference(rep.full.theta[1][k] - rep.full.theta[0][k]));
    try {
      const double omega_mean = 0.5 * (pm.Omega[0] + pm.Omega[1]);
      summary["sync"] = sync_json(sync_measure(rep.full.times, phi, 1e-3 * omega_mean));
    } catch (const InvalidArgument&) {
    }
  }
  ctx.write_json("summary", summary);
}

Table sweep_table(const std::vector<CriticalResult>& results) {
  Table t({"detuning", "epsilon", "S", "locked", "psi_star", "slips"});
  for (const CriticalResult& r : results)
    for (const SweepPoint& p : r.points)
      t.add_row({p.detuning, p.epsilon, p.report.S, p.report.locked ? 1.0 : 0.0,
                 p.report.psi_star.value_or(std::nan("")),
                 static_cast<double>(p.report.slips)});
  return t;
}

json order_ratio_json(const SweepConfig& sc, double detuning, double eps_c) {
  NetworkSpec spec = sc.experiment.make_spec(detuning, eps_c);
  if (sc.order_ratio_z == "imaginary_exp")
    spec.prescribed_Z = {imaginary_exp_sensitivity, imaginary_exp_sensitivity};
  const PhaseModel pm = build_phase_model(spec);
  const OrderRatio r = order_ratio(pm, eps_c, detuning);
  return {{"sensitivity", sc.order_ratio_z},
          {"first_order_force", r.first_order},
          {"effective_force", r.effective},
          {"empirical_effective_ratio", r.ratio},
          {"first_order_vanishing", r.first_order_vanishing}};
}

std::vector<CriticalResult> run_sweep(Context& ctx, const SweepConfig& sc) {
  ctx.tolerances["sweep"] = tol_json(sc.experiment.tol);
  CriticalOptions copt;
  copt.rel_width = sc.rel_width;
  copt.threads = ctx.threads;
  std::vector<CriticalResult> results;
  for (double d : sc.detunings)
    results.push_back(critical_coupling(sc.experiment, d, sc.eps_grid, copt));
  ctx.write_table("sweep", sweep_table(results));
  return results;
}

void cmd_sweep(Context& ctx) {
  if (!ctx.cfg.sweep) throw ConfigError("sweep", "missing required field");
  const SweepConfig& sc = *ctx.cfg.sweep;
  const auto results = run_sweep(ctx, sc);
  json per = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const CriticalResult& r = results[i];
    json entry = {{"detuning", sc.detunings[i]},
                  {"status", to_string(r.status)},
                  {"eps_c", number_or_null(r.epsilon_c)},
                  {"lower", r.lower},
                  {"order_ratio", nullptr}};
    if (!sc.order_ratio_z.empty() && r.status == CriticalStatus::found)
      entry["order_ratio"] = order_ratio_json(sc, sc.detunings[i], r.epsilon_c);
    per.push_back(entry);
  }
  ctx.write_json("summary", {{"s_threshold", sc.experiment.s_threshold()},
                             {"eps_grid", sc.eps_grid},
                             {"results", per}});
}

void cmd_fit_scaling(Context& ctx) {
  ScalingFit fit;
  if (!ctx.cfg.fit_points.empty()) {
    fit = scaling_fit(ctx.cfg.fit_points);
  } else {
    if (!ctx.cfg.sweep)
      throw ConfigError("fit_scaling.points",
                        "missing required field (or give a sweep section)");
    const SweepConfig& sc = *ctx.cfg.sweep;
    const auto results = run_sweep(ctx, sc);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].status != CriticalStatus::found)
        throw ConvergenceError("no critical coupling inside the grid for detuning " +
                               format_double(sc.detunings[i]));
      pts.emplace_back(sc.detunings[i], results[i].epsilon_c);
    }
    fit = scaling_fit(pts);
  }
  json pts = json::array();
  for (const auto& [d, e] : fit.points) pts.push_back({d, e});
  ctx.write_json("scaling", {{"points", pts},
                             {"exponent", fit.exponent},
                             {"intercept", fit.intercept},
                             {"r_squared", fit.r_squared},
                             {"warnings", fit.warnings}});
}

void write_manifest(Context& ctx) {
  const std::string canonical = ctx.cfg.raw.dump();
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical);
  std::vector<std::string> outputs = ctx.outputs;
  outputs.push_back("manifest.json");
  const json manifest = {{"command", ctx.command},
                         {"config", ctx.cfg.raw},
                         {"config_hash", hash.str()},
                         {"seed", ctx.seed},
                         {"threads", ctx.threads},
                         {"format", ctx.format},
                         {"tolerances", ctx.tolerances},
                         {"outputs", outputs}};
  write_file_atomic(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void report_error(std::ostream& err, int code, const std::string& kind,
                  const std::string& message, const std::string& field = "") {
  json j = {{"error", {{"kind", kind}, {"message", message}}},
            {"exit_code", code}};
  if (!field.empty()) j["error"]["field"] = field;
  err << j.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Phase reduction toolkit for limit-cycle oscillators"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out", format;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for randomized initial phases");
  app.add_option("--threads", threads, "worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--format", format, "data table format")
      ->check(CLI::IsMember({"csv", "json"}));

  const std::map<std::string, std::function<void(Context&)>> commands = {
      {"find-cycle", cmd_find_cycle}, {"isochrons", cmd_isochrons},
      {"prc", cmd_prc},               {"reduce", cmd_reduce},
      {"simulate", cmd_simulate},     {"sweep", cmd_sweep},
      {"fit-scaling", cmd_fit_scaling}};
  const std::map<std::string, std::string> help = {
      {"find-cycle", "locate the limit cycle, its period and Floquet exponent"},
      {"isochrons", "sample isochrons of the cycle"},
      {"prc", "phase sensitivity function Z(theta)"},
      {"reduce", "averaged coupling function of a forced oscillator"},
      {"simulate", "full network versus reduced phase model"},
      {"sweep", "critical coupling of a detuned Stuart-Landau pair"},
      {"fit-scaling", "log-log fit of critical coupling against detuning"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, exit_config, "usage", e.what());
    return exit_config;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  try {
    ctx.cfg = load_config(config_path);
    ctx.format = !format.empty() ? format : ctx.cfg.format.value_or("csv");
    ctx.seed = app.count("--seed") > 0 ? seed : ctx.cfg.seed.value_or(0);
    ctx.threads = threads;
    ctx.out_dir = out_dir;
    fs::create_directories(ctx.out_dir);
    commands.at(ctx.command)(ctx);
    write_manifest(ctx);
  } catch (const ConfigError& e) {
    report_error(err, exit_config, "config", e.what(), e.field());
    return exit_config;
  } catch (const InvalidArgument& e) {
    report_error(err, exit_config, "invalid_argument", e.what());
    return exit_config;
  } catch (const ConvergenceError& e) {
    report_error(err, exit_failure, "convergence", e.what());
    return exit_failure;
  } catch (const std::exception& e) {
    report_error(err, exit_failure, "computation", e.what());
    return exit_failure;
  }
  out << "wrote " << ctx.outputs.size() + 1 << " files to " << ctx.out_dir.string()
      << "\n";
  return exit_ok;
}

}  // namespace phasered::cli
