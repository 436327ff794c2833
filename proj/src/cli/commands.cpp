#include "mrsde/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrsde/cli/csv.hpp"
#include "mrsde/errors.hpp"
#include "mrsde/harness.hpp"
#include "mrsde/malliavin.hpp"
#include "mrsde/noise.hpp"
#include "mrsde/particle.hpp"
#include "mrsde/rate.hpp"
#include "mrsde/skeleton.hpp"

namespace mrsde::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json header_fields(const RunConfig& c) { return {{"config_hash", hex(c.hash)}, {"seed", c.seed}}; }

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::int64_t as_int(Index i) { return static_cast<std::int64_t>(i); }

// K path plus each node's time; shared by the simulate and skeleton files.
void write_path_file(const fs::path& path, const RunConfig& c, const DeterministicPath& p) {
  CsvWriter w(path, "t,x,k", c.hash, c.seed);
  for (Index k = 0; k < p.grid.n_nodes(); ++k) w.row({p.grid.node(k), p.x[k], p.k[k]});
  w.commit();
}

ControlPath control_from(const TimeGrid& grid, const std::optional<std::vector<double>>& phi) {
  if (!phi) return ControlPath::zero(grid);
  if (phi->size() == 1) return ControlPath::constant(grid, phi->front());
  return ControlPath(grid, Eigen::Map<const VectorXd>(phi->data(), static_cast<Index>(phi->size())));
}

}  // namespace

void cmd_simulate(const RunConfig& c, const RunContext& ctx) {
  const SimulateConfig& s = c.simulate;
  const TimeGrid grid(c.model.horizon, s.n_steps);
  SimulationOptions options;
  options.keep_paths = s.write_paths;
  options.workers = ctx.workers;
  options.tol_g0 = s.tol_g0;
  const EnsemblePath path = simulate(c.model, grid, s.n_particles, s.epsilon, c.seed, options);

  if (s.write_paths) {
    CsvWriter w(ctx.out_dir / "paths.csv", "t,particle,u,x", c.hash, c.seed);
    for (Index k = 0; k < grid.n_nodes(); ++k)
      for (Index i = 0; i < s.n_particles; ++i)
        w.row({grid.node(k), as_int(i), path.u(i, k), path.x(i, k)});
    w.commit();
  }
  {
    CsvWriter w(ctx.out_dir / "kpath.csv", "t,k", c.hash, c.seed);
    for (Index k = 0; k < grid.n_nodes(); ++k) w.row({grid.node(k), path.k_path[k]});
    w.commit();
  }

  const FlatnessReport flat = check_flat_structure(path);
  // Discrete slack: one step of drift and noise can push the mean below the
  // constraint before K reacts.
  const double b_loc = c.model.b.abs_bound_on(c.model.xi - 10.0, c.model.xi + 10.0) +
                       std::sqrt(s.epsilon) *
                           c.model.sigma.abs_bound_on(c.model.xi - 10.0, c.model.xi + 10.0) /
                           std::sqrt(grid.dt());
  const double floor_tol = 1e-6 + c.model.h.M() * grid.dt() * b_loc;

  json summary = header_fields(c);
  summary["n_particles"] = s.n_particles;
  summary["n_steps"] = s.n_steps;
  summary["epsilon"] = s.epsilon;
  summary["k_terminal"] = flat.k_terminal;
  summary["mean_x_terminal"] = path.x_terminal().mean();
  summary["checks"] = {
      {"k_starts_at_zero", flat.k_starts_at_zero},
      {"k_nondecreasing", flat.k_nondecreasing},
      {"min_constraint", flat.min_constraint},
      {"constraint_floor", -floor_tol},
      {"constraint_floor_ok", flat.min_constraint >= -floor_tol},
      {"flatness_residual", flat.flatness_residual},
      {"flatness_ok", flat.flatness_residual <= 1e-8 * std::max(flat.k_terminal, grid.dt())},
  };
  if (s.k_check) {
    const double expected = s.k_check->slope * c.model.horizon;
    const double err = std::abs(flat.k_terminal - expected);
    summary["k_check"] = {{"expected", expected},
                          {"abs_error", err},
                          {"tolerance", s.k_check->tolerance},
                          {"pass", err <= s.k_check->tolerance}};
  }
  write_json(ctx.out_dir / "summary.json", summary);
}

void cmd_skeleton(const RunConfig& c, const RunContext& ctx) {
  const SkeletonConfig& s = c.skeleton;
  const TimeGrid grid(c.model.horizon, s.n_steps);
  const DeterministicPath ode = solve_mr_ode(c.model, grid);
  write_path_file(ctx.out_dir / "mr_ode.csv", c, ode);

  const ControlPath phi = control_from(grid, s.phi);
  json summary = header_fields(c);
  summary["mr_ode_terminal"] = ode.x[grid.n_steps()];
  if (s.phi) {
    const DeterministicPath sk = solve_skeleton(c.model, grid, phi, ode.k);
    write_path_file(ctx.out_dir / "skeleton.csv", c, sk);
    summary["skeleton_terminal"] = sk.x[grid.n_steps()];
    summary["control_energy"] = phi.energy();
  }
  if (s.short_time) {
    const TimeGrid unit(1.0, s.n_steps);
    const DeterministicPath sh = solve_short_skeleton(c.model, unit, control_from(unit, s.phi));
    write_path_file(ctx.out_dir / "short_skeleton.csv", c, sh);
    summary["short_skeleton_terminal"] = sh.x[unit.n_steps()];
  }
  write_json(ctx.out_dir / "skeleton_summary.json", summary);
}

void cmd_rate(const RunConfig& c, const RunContext& ctx) {
  const RateConfig& r = c.rate;
  EndpointOptions options;
  options.n_steps = r.n_steps;
  CsvWriter w(ctx.out_dir / "rate.csv", "target,rate,iterations,grad_norm", c.hash, c.seed);
  for (double target : r.targets) {
    const RateResult res = endpoint_rate(c.model, target, r.mode, options);
    w.row({target, res.value, std::int64_t{res.iterations}, res.grad_norm});
  }
  w.commit();
}

void cmd_malliavin(const RunConfig& c, const RunContext& ctx) {
  const MalliavinConfig& m = c.malliavin;
  const TimeGrid grid(c.model.horizon, m.n_steps);
  const VectorXd k = frozen_reflection(c.model, grid, m.n_particles, c.seed, ctx.workers);
  const TangentBundle bundle =
      tangent_simulate(c.model, grid, k, derive_seed(c.seed, 1), 1.0, static_cast<std::uint64_t>(m.path));
  const MalliavinKernel kernel = kernel_product(bundle);
  const Index n = grid.n_steps();

  {
    CsvWriter w(ctx.out_dir / "kernel.csv", "r,t,d", c.hash, c.seed);
    for (Index j = 0; j <= n; j += m.kernel_stride)
      for (Index t = j; t <= n; t += m.kernel_stride)
        w.row({grid.node(j), grid.node(t), kernel.d(j, t)});
    w.commit();
  }

  SimulationOptions options;
  options.keep_paths = false;
  options.workers = ctx.workers;
  const TimeGrid dgrid(c.model.horizon, m.density_steps);
  const EnsemblePath ens =
      simulate(c.model, dgrid, m.density_particles, 1.0, derive_seed(c.seed, 2), options);
  const DensityGrid density = density_estimate(ens.x_terminal(), m.bandwidth);
  {
    CsvWriter w(ctx.out_dir / "density.csv", "x,f", c.hash, c.seed);
    for (Index i = 0; i < density.x.size(); ++i) w.row({density.x[i], density.f[i]});
    w.commit();
  }

  const CameronMartinReport cm =
      cameron_martin_check(c.model, bundle, ControlPath::constant(grid, 1.0), m.bump);
  const VectorXd direct = kernel_direct(c.model, bundle, 0);
  const double yz_dev = (bundle.y.array() * bundle.z.array() - 1.0).abs().maxCoeff();

  json summary = header_fields(c);
  summary["covariance_T"] = malliavin_covariance(kernel, n);
  summary["max_abs_yz_minus_one"] = yz_dev;
  summary["kernel_direct_max_abs_diff_r0"] = (direct.transpose() - kernel.d.row(0)).cwiseAbs().maxCoeff();
  summary["cameron_martin"] = {{"fd_derivative", cm.fd_derivative},
                               {"kernel_pairing", cm.kernel_pairing},
                               {"abs_error", cm.abs_error},
                               {"bump", m.bump}};
  summary["density_integral"] = trapezoid(density);
  write_json(ctx.out_dir / "malliavin_summary.json", summary);
}

void cmd_ldp(const RunConfig& c, const RunContext& ctx) {
  ExperimentPlan plan;
  plan.model = c.model;
  plan.variant = c.ldp.variant;
  plan.epsilons = c.ldp.epsilons;
  plan.event = c.ldp.event;
  plan.n_particles = c.ldp.n_particles;
  plan.n_steps = c.ldp.n_steps;
  plan.n_mc_batches = c.ldp.n_mc_batches;
  plan.seed = c.seed;
  plan.workers = ctx.workers;
  const LdpReport report = run_ldp_experiment(plan);

  CsvWriter w(ctx.out_dir / "ldp.csv", "epsilon,p_hat,std_err,neg_eps_log_p,reference_rate", c.hash,
              c.seed);
  for (const LdpRow& row : report.rows)
    w.row({row.epsilon, row.p_hat, row.std_err, row.neg_eps_log_p, report.reference_rate});
  w.commit();

  json summary = header_fields(c);
  summary["reference_rate"] = report.reference_rate;
  summary["reference_label"] = report.reference_label;
  summary["reference_is_upper_bound"] = report.reference_is_upper_bound;
  summary["statistic"] = report.statistic;
  summary["nonincreasing_in_epsilon"] = report.nonincreasing_in_epsilon;
  summary["strictly_increasing_in_epsilon"] = report.strictly_increasing_in_epsilon;
  json rows = json::array();
  for (const LdpRow& row : report.rows)
    rows.push_back({{"epsilon", row.epsilon},
                    {"hits", row.hits},
                    {"samples", row.samples},
                    {"zero_hits", row.zero_hits},
                    {"neg_eps_log_p_se", row.neg_eps_log_p_se}});
  summary["rows"] = rows;
  write_json(ctx.out_dir / "ldp_summary.json", summary);
}

void cmd_converge(const RunConfig& c, const RunContext& ctx) {
  const ConvergeConfig& cv = c.converge;
  const ConvergenceTable table =
      run_convergence_study(c.model, cv.dts, cv.n_particles, c.seed, cv.replicates, ctx.workers);
  {
    CsvWriter w(ctx.out_dir / "converge.csv", "dt,n_particles,k_error,x_error", c.hash, c.seed);
    for (const ConvergenceRow& row : table.rows)
      w.row({row.dt, as_int(row.n_particles), row.k_error, row.x_error});
    w.commit();
  }
  json summary = header_fields(c);
  summary["slope_in_n"] = table.slope_in_n;
  summary["slope_in_dt"] = table.slope_in_dt;

  if (cv.eps_limit) {
    const EpsLimitConfig& e = *cv.eps_limit;
    const std::vector<EpsLimitRow> rows = run_eps_limit_study(
        c.model, e.epsilons, e.n_particles, e.n_steps, c.seed, e.n_batches, ctx.workers);
    CsvWriter w(ctx.out_dir / "eps_limit.csv", "epsilon,mean_sq_sup_x_dev,std_err,sup_k_dev,w1_bound",
                c.hash, c.seed);
    for (const EpsLimitRow& row : rows)
      w.row({row.epsilon, row.mean_sq_sup_x_dev, row.std_err, row.sup_k_dev, row.w1_bound});
    w.commit();
  }
  write_json(ctx.out_dir / "converge_summary.json", summary);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for mean-reflected SDEs", "mrsde"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir = ".";
  int workers = 1;
  std::optional<std::uint64_t> seed;

  using Cmd = void (*)(const RunConfig&, const RunContext&);
  const std::pair<const char*, Cmd> table[] = {
      {"simulate", cmd_simulate}, {"skeleton", cmd_skeleton}, {"rate", cmd_rate},
      {"malliavin", cmd_malliavin}, {"ldp", cmd_ldp},       {"converge", cmd_converge},
  };
  const char* help[] = {
      "particle ensemble: paths.csv, kpath.csv, summary.json",
      "mean-reflected ODE and controlled skeletons: t,x,k files",
      "endpoint rate values: rate.csv",
      "tangent processes, kernel and density: kernel.csv, density.csv",
      "Monte Carlo tail probabilities across epsilon: ldp.csv",
      "scheme convergence and epsilon-limit studies: converge.csv, eps_limit.csv",
  };
  for (std::size_t i = 0; i < std::size(table); ++i) {
    CLI::App* sub = app.add_subcommand(table[i].first, help[i]);
    sub->add_option("--config", config_file, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory (created if missing)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 4096));
    sub->add_option("--seed", seed, "overrides the config seed");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  Cmd cmd = nullptr;
  for (const auto& [name, fn] : table)
    if (app.got_subcommand(name)) cmd = fn;

  try {
    RunConfig config = load_config(config_file);
    if (seed) config.seed = *seed;
    RunContext ctx{out_dir, workers};
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir))
      throw ConfigError("cannot create output directory " + out_dir);
    cmd(config, ctx);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalAbort& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace mrsde::cli
