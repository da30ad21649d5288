#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "bmf/error.hpp"
#include "bmf/factorizability.hpp"
#include "bmf/forge.hpp"
#include "bmf/io.hpp"
#include "bmf/solver.hpp"
#include "bmf/stationarity.hpp"
#include "bmf/trace_bounds.hpp"

namespace bmf::cli {

namespace {

struct RegimeFlags {
  int m = 0, n = 0, r = 0, r_star = -1;
  double L = 0.0, mu = 0.0, lambda = 1.0;

  void attach(CLI::App* app, bool required) {
    auto* om = app->add_option("--m", m, "row dimension");
    app->add_option("--n", n, "column dimension (defaults to m)");
    auto* orr = app->add_option("--r", r, "factor width");
    auto* ors = app->add_option("--rstar", r_star, "rank of the global minimiser");
    auto* oL = app->add_option("--L", L, "smoothness constant");
    auto* omu = app->add_option("--mu", mu, "strong convexity constant");
    app->add_option("--lambda", lambda, "nuclear norm weight");
    if (required)
      for (auto* o : {om, orr, ors, oL, omu}) o->required();
  }

  bool given() const { return m > 0; }

  RegimeParams params() const {
    RegimeParams p{m, n > 0 ? n : m, r, r_star, L, mu, lambda};
    validate(p);
    return p;
  }
};

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Io: return kIoError;
    case ErrorKind::FactorizableRegime: return kForgeRefused;
    case ErrorKind::Internal: return kInternal;
    default: return kBadInput;
  }
}

void print_report(std::ostream& out, const VerificationReport& rep) {
  out << "grad_Fr_residual      " << rep.grad_Fr_residual << '\n'
      << "min_hessian_eig       " << rep.min_hessian_eig << '\n'
      << "f_gap                 " << rep.f_gap << '\n'
      << "xstar_is_stationary   " << (rep.xstar_is_stationary ? "true" : "false") << '\n'
      << "xbar_spectral_excess  " << rep.xbar_spectral_excess << '\n'
      << "gradient_identity     " << rep.gradient_identity_residual << '\n'
      << "certified (mu, L)     " << rep.certified_mu << ", " << rep.certified_L << '\n'
      << "bounds_ok             " << (rep.bounds_ok ? "true" : "false") << '\n'
      << "gap_ineq_value        " << rep.gap_ineq_value << '\n';
  if (rep.all_pass) {
    out << "all checks passed\n";
  } else {
    out << "FAILED:";
    for (const auto& c : rep.failed_checks) out << ' ' << c;
    out << '\n';
  }
}

int cmd_oracle(const RegimeFlags& rf, bool as_json, std::ostream& out) {
  const RegimeParams p = rf.params();
  const Verdict v = oracle(p);
  if (as_json) {
    out << verdict_json(v, p) << '\n';
  } else {
    out << (v.factorizable ? "factorizable" : "not factorizable") << " (" << v.reason << ")";
    if (v.witness) out << " d*=" << v.witness->d << " w=" << v.witness->w;
    out << '\n';
  }
  return v.factorizable ? kOk : kNotFactorizable;
}

int cmd_forge(const RegimeFlags& rf, const std::string& path, double w, std::uint64_t seed, bool as_json,
              std::ostream& out) {
  const RegimeParams p = rf.params();
  const CounterexampleInstance inst = forge(p, w);
  write_file(path, serialize_counterexample(inst));
  VerifyTolerances tol;
  tol.rayleigh_seed = seed;
  const VerificationReport rep = verify_counterexample(inst, tol);
  if (as_json) {
    out << verification_json(rep) << '\n';
  } else {
    out << "wrote " << path << " (branch " << to_string(inst.branch) << ", qp objective " << inst.qp_objective
        << ")\n";
    print_report(out, rep);
  }
  return rep.all_pass ? kOk : kVerifyFailed;
}

int cmd_verify(const std::string& path, double tol_g, double tol_h, bool as_json, std::ostream& out) {
  const LoadedInstance li = load_instance(path);
  if (li.kind != InstanceKind::Counterexample) fail(ErrorKind::InvalidInput, "verify needs a counterexample file");
  VerifyTolerances tol;
  tol.grad_rel = tol_g;
  tol.hess_abs = tol_h;
  const VerificationReport rep = verify_counterexample(*li.counterexample, tol);
  if (as_json)
    out << verification_json(rep) << '\n';
  else
    print_report(out, rep);
  return rep.all_pass ? kOk : kVerifyFailed;
}

struct SolveFlags {
  std::string in;
  std::string init = "random";
  std::string step = "armijo";
  double eta = 1e-2;
  double init_scale = 0.5;
  int max_iters = 20000;
  std::uint64_t seed = 1;
  bool as_json = false;
};

int cmd_solve(const RegimeFlags& rf, const SolveFlags& sf, std::ostream& out) {
  QuadraticObjective h;
  double lambda = 0.0;
  int r = 0;
  std::optional<FactorPair> spurious;
  if (!sf.in.empty()) {
    LoadedInstance li = load_instance(sf.in);
    if (li.kind == InstanceKind::Counterexample) {
      h = li.counterexample->h;
      lambda = li.counterexample->params.lambda;
      r = li.counterexample->params.r;
      spurious = li.counterexample->pair;
    } else if (li.kind == InstanceKind::QuadraticObjective) {
      h = *li.objective;
      // flags fill in whatever the file leaves out
      lambda = li.lambda.value_or(rf.lambda);
      r = rf.r > 0 ? rf.r : li.r.value_or(0);
      if (r < 1 || r > h.rows()) fail(ErrorKind::InvalidInput, "quadratic objective needs 1 <= r <= m");
    } else {
      fail(ErrorKind::InvalidInput, "solve needs a counterexample or quadratic_objective file");
    }
  } else if (rf.given()) {
    const RegimeParams p = rf.params();
    lambda = p.lambda;
    r = p.r;
    if (oracle(p).factorizable) {
      h = random_psd_instance(p, sf.seed).h;
    } else {
      CounterexampleInstance inst = forge(p);
      h = inst.h;
      spurious = inst.pair;
    }
  } else {
    fail(ErrorKind::InvalidInput, "solve needs --in or regime flags");
  }

  FactorPair init;
  if (sf.init == "spurious") {
    if (!spurious) fail(ErrorKind::InvalidInput, "no spurious point available for this instance");
    init = *spurious;
  } else if (sf.init == "random") {
    init = random_pair(h.rows(), h.cols(), r, sf.init_scale, sf.seed);
  } else {
    fail(ErrorKind::InvalidInput, "--init must be random or spurious");
  }
  SolverOptions opts;
  opts.max_iters = sf.max_iters;
  if (sf.step == "fixed") {
    opts.step_rule = StepRule::FixedStep;
    opts.fixed_step = sf.eta;
  } else if (sf.step != "armijo") {
    fail(ErrorKind::InvalidInput, "--step must be armijo or fixed");
  }
  const SolveTrace tr = solve(h, lambda, init, opts);
  if (sf.as_json) {
    out << solve_json(tr, lambda) << '\n';
  } else {
    const Mat X = tr.final.U * tr.final.V.transpose();
    out << to_string(tr.classification) << " after " << tr.iterations << " iterations (" << tr.escapes
        << " escapes)\n"
        << "F_r = " << eval_Fr(h, lambda, tr.final) << ", |grad| = " << tr.final_grad_norm
        << ", lambda_min = " << tr.final_min_eig << '\n'
        << "sigma(UV^T) =";
    const Vec s = full_svd(X).sigma;
    for (Eigen::Index i = 0; i < s.size(); ++i) out << ' ' << s(i);
    out << '\n';
  }
  return kOk;
}

int cmd_sweep(const std::string& grid, int trials, const std::string& path, std::uint64_t seed, int max_iters,
              int threads, std::ostream& out, std::ostream& err) {
  const std::vector<RegimeParams> cells = grid == "default" ? default_grid() : parse_grid(read_file(grid));
  SweepOptions opts;
  opts.seed = seed;
  opts.threads = threads;
  opts.solver.max_iters = max_iters;
  const PhaseTable table = sweep(cells, trials, opts);
  int spurious_in_factorizable = 0;
  for (const PhaseRow& row : table)
    if (row.oracle_factorizable) spurious_in_factorizable += row.n_spurious;
  if (path.empty()) {
    out << to_csv(table);
  } else {
    write_file(path, to_csv(table));
    out << "wrote " << table.size() << " rows to " << path << '\n';
  }
  if (spurious_in_factorizable > 0)
    err << "warning: " << spurious_in_factorizable << " spurious runs inside the factorizable region\n";
  return kOk;
}

int cmd_trace_ineq(int m, int n, int samples, int instances, std::uint64_t seed, bool as_json,
                   std::ostream& out) {
  if (m < 1 || n < m || samples < 0 || instances < 1) fail(ErrorKind::InvalidInput, "need 1 <= m <= n");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool ok = true;
  double worst_excess = -std::numeric_limits<double>::infinity(), worst_witness = 0.0;
  int brute_mismatch = 0;
  // values of the first instance, reported verbatim
  double first_assignment = 0.0, first_brute = std::nan(""), first_sampled = std::nan("");
  for (int inst = 0; inst < instances; ++inst) {
    Vec a(m), b(m), c(m), d(m);
    for (Vec* v : {&a, &b, &c, &d})
      for (int i = 0; i < m; ++i) (*v)(i) = unif(rng);
    const Assignment best = max_permutation_pairing(a, b, c, d);
    if (m <= 7) {
      std::vector<int> perm(static_cast<std::size_t>(m));
      std::iota(perm.begin(), perm.end(), 0);
      double brute = -std::numeric_limits<double>::infinity();
      do brute = std::max(brute, pairing_value(perm, a, b, c, d));
      while (std::next_permutation(perm.begin(), perm.end()));
      if (brute != best.value) ++brute_mismatch;
      if (inst == 0) first_brute = brute;
    }
    if (inst == 0) first_assignment = best.value;
    const Mat A = a.asDiagonal(), B = b.asDiagonal(), C = c.asDiagonal(), D = d.asDiagonal();
    const OrthogonalPair wp = witness_orthogonal_pair(best.perm, m, n);
    worst_witness = std::max(worst_witness, std::abs(lhs_trace_form(wp.R, wp.P, A, B, C, D) - best.value));
    for (int k = 0; k < samples; ++k) {
      const double lhs = lhs_trace_form(random_orthogonal(m, rng()), random_orthogonal(n, rng()), A, B, C, D);
      worst_excess = std::max(worst_excess, lhs - best.value);
      if (inst == 0) first_sampled = k == 0 ? lhs : std::max(first_sampled, lhs);
    }
  }
  ok = brute_mismatch == 0 && worst_witness <= 1e-12 && (samples == 0 || worst_excess <= 1e-9);
  if (as_json) {
    nlohmann::json j = {{"m", m},
                        {"n", n},
                        {"instances", instances},
                        {"samples", samples},
                        {"assignment_value", first_assignment},
                        {"brute_force_value", std::isnan(first_brute) ? nlohmann::json(nullptr) : nlohmann::json(first_brute)},
                        {"max_sampled_value", std::isnan(first_sampled) ? nlohmann::json(nullptr) : nlohmann::json(first_sampled)},
                        {"brute_force_mismatches", brute_mismatch},
                        {"max_sample_excess", samples ? worst_excess : 0.0},
                        {"max_witness_error", worst_witness},
                        {"ok", ok}};
    out << j.dump() << '\n';
  } else {
    out << "assignment value " << first_assignment << '\n';
    if (m <= 7) out << "brute-force value " << first_brute << '\n';
    if (samples > 0) out << "max sampled orthogonal value " << first_sampled << '\n';
    out << "instances " << instances << ", samples per instance " << samples << '\n'
        << "brute-force mismatches " << brute_mismatch << (m <= 7 ? "" : " (skipped, m > 7)") << '\n'
        << "max sampled lhs - assignment value " << (samples ? worst_excess : 0.0) << '\n'
        << "max witness error " << worst_witness << '\n'
        << (ok ? "inequality holds\n" : "inequality VIOLATED\n");
  }
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bmf: factorizability oracle, counterexample forge and certifier"};
  app.require_subcommand(1);
  bool as_json = false;

  RegimeFlags oracle_rf;
  auto* oracle_cmd = app.add_subcommand("oracle", "decide whether every second-order point is global");
  oracle_rf.attach(oracle_cmd, true);
  oracle_cmd->add_flag("--json", as_json, "print a JSON document instead of text");

  RegimeFlags forge_rf;
  std::string forge_out;
  double forge_w = 1.0;
  std::uint64_t forge_seed = 7;
  auto* forge_cmd = app.add_subcommand("forge", "build and verify a spurious second-order instance");
  forge_rf.attach(forge_cmd, true);
  forge_cmd->add_option("--out", forge_out, "output instance file")->required();
  forge_cmd->add_option("--w", forge_w, "reduced scale");
  forge_cmd->add_option("--seed", forge_seed, "seed for the sampled curvature check");
  forge_cmd->add_flag("--json", as_json, "print a JSON document instead of text");

  std::string verify_in;
  double tol_g = 1e-9, tol_h = 1e-8;
  auto* verify_cmd = app.add_subcommand("verify", "re-run every check on an instance file");
  verify_cmd->add_option("--in", verify_in, "instance file")->required();
  verify_cmd->add_option("--tol-g", tol_g, "relative gradient tolerance");
  verify_cmd->add_option("--tol-h", tol_h, "absolute Hessian eigenvalue tolerance");
  verify_cmd->add_flag("--json", as_json, "print a JSON document instead of text");

  RegimeFlags solve_rf;
  SolveFlags sf;
  auto* solve_cmd = app.add_subcommand("solve", "run gradient descent on the factored problem");
  solve_rf.attach(solve_cmd, false);
  solve_cmd->add_option("--in", sf.in, "counterexample or quadratic_objective file");
  solve_cmd->add_option("--seed", sf.seed, "seed for the generated instance and the start");
  solve_cmd->add_option("--init", sf.init, "random | spurious");
  solve_cmd->add_option("--init-scale", sf.init_scale, "standard deviation of random starts");
  solve_cmd->add_option("--step", sf.step, "armijo | fixed");
  solve_cmd->add_option("--eta", sf.eta, "step size for --step fixed");
  solve_cmd->add_option("--max-iters", sf.max_iters, "iteration budget");
  solve_cmd->add_flag("--json", sf.as_json, "print a JSON document instead of text");

  std::string grid = "default", sweep_out;
  int trials = 10, sweep_iters = 20000, threads = 0;
  std::uint64_t sweep_seed = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "phase table over a grid of regimes");
  sweep_cmd->add_option("--grid", grid, "grid file or 'default'");
  sweep_cmd->add_option("--trials", trials, "runs per cell");
  sweep_cmd->add_option("--out", sweep_out, "CSV output (stdout when omitted)");
  sweep_cmd->add_option("--seed", sweep_seed, "base seed");
  sweep_cmd->add_option("--max-iters", sweep_iters, "iteration budget per run");
  sweep_cmd->add_option("--threads", threads, "worker threads (overrides BMF_THREADS)");

  int tm = 0, tn = 0, tsamples = 1000, tinstances = 1;
  std::uint64_t tseed = 1;
  auto* trace_cmd = app.add_subcommand("trace-ineq", "check the permutation form of the trace bound");
  trace_cmd->add_option("--m", tm, "dimension")->required();
  trace_cmd->add_option("--n", tn, "column dimension (defaults to m)");
  trace_cmd->add_option("--samples", tsamples, "orthogonal samples per instance");
  trace_cmd->add_option("--instances", tinstances, "random quadruples");
  trace_cmd->add_option("--seed", tseed, "seed");
  trace_cmd->add_flag("--json", as_json, "print a JSON document instead of text");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kBadInput;
  }

  try {
    if (*oracle_cmd) return cmd_oracle(oracle_rf, as_json, out);
    if (*forge_cmd) return cmd_forge(forge_rf, forge_out, forge_w, forge_seed, as_json, out);
    if (*verify_cmd) return cmd_verify(verify_in, tol_g, tol_h, as_json, out);
    if (*solve_cmd) return cmd_solve(solve_rf, sf, out);
    if (*sweep_cmd) return cmd_sweep(grid, trials, sweep_out, sweep_seed, sweep_iters, threads, out, err);
    if (*trace_cmd) return cmd_trace_ineq(tm, tn > 0 ? tn : tm, tsamples, tinstances, tseed, as_json, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kBadInput;
}

}  // namespace bmf::cli
