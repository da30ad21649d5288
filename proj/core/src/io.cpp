#include "bmf/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bmf/error.hpp"

namespace bmf {

using nlohmann::json;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double get_num(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) fail(ErrorKind::InvalidInput, "expected a number");
  return j.get<double>();
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::InvalidInput, std::string("missing field '") + key + "'");
  return j.at(key);
}

json mat_json(const Mat& X) {
  json data = json::array();
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) data.push_back(num(X(i, j)));
  return {{"rows", X.rows()}, {"cols", X.cols()}, {"data", data}};
}

Mat mat_from(const json& j) {
  const auto rows = field(j, "rows").get<Eigen::Index>();
  const auto cols = field(j, "cols").get<Eigen::Index>();
  const json& data = field(j, "data");
  if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
    fail(ErrorKind::InvalidInput, "matrix data does not match its shape");
  Mat X(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) X(i, c) = get_num(data[k++]);
  return X;
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

Vec vec_from(const json& j) {
  if (!j.is_array()) fail(ErrorKind::InvalidInput, "expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_num(j[i]);
  return v;
}

json regime_json(const RegimeParams& p) {
  return {{"m", p.m}, {"n", p.n}, {"r", p.r}, {"r_star", p.r_star},
          {"L", num(p.L)}, {"mu", num(p.mu)}, {"lambda", num(p.lambda)}};
}

RegimeParams regime_from(const json& j) {
  RegimeParams p;
  p.m = field(j, "m").get<int>();
  p.n = j.contains("n") ? j.at("n").get<int>() : p.m;
  p.r = field(j, "r").get<int>();
  p.r_star = field(j, "r_star").get<int>();
  p.L = get_num(field(j, "L"));
  p.mu = get_num(field(j, "mu"));
  p.lambda = j.contains("lambda") ? get_num(j.at("lambda")) : 1.0;
  validate(p);
  return p;
}

json objective_json(const QuadraticObjective& h) {
  if (h.mode() == ObjectiveMode::GeneralPsd)
    return {{"mode", "GeneralPsd"},
            {"eigenbasis", mat_json(h.eigenbasis())},
            {"eigenvalues", vec_json(h.eigenvalues())},
            {"linear", mat_json(h.linear())},
            {"constant", num(h.constant())}};
  json j = {{"mode", "EntrywiseWeighted"},
            {"offdiag_weight", num(h.offdiag_weight())},
            {"diag_weight", num(h.diag_weight())},
            {"anchor", mat_json(h.anchor())},
            {"linear", mat_json(h.linear())}};
  if (h.has_rankone()) {
    j["rankone_numerator"] = mat_json(h.rankone_numerator());
    j["rankone_denominator"] = num(h.rankone_denominator());
  } else {
    j["rankone_numerator"] = nullptr;
    j["rankone_denominator"] = nullptr;
  }
  return j;
}

QuadraticObjective objective_from(const json& j) {
  const std::string mode = field(j, "mode").get<std::string>();
  if (mode == "GeneralPsd")
    return QuadraticObjective::general_psd(mat_from(field(j, "eigenbasis")), vec_from(field(j, "eigenvalues")),
                                           mat_from(field(j, "linear")), get_num(field(j, "constant")));
  if (mode != "EntrywiseWeighted") fail(ErrorKind::InvalidInput, "unknown objective mode '" + mode + "'");
  Mat numer;
  double den = 0.0;
  if (j.contains("rankone_numerator") && !j.at("rankone_numerator").is_null()) {
    numer = mat_from(j.at("rankone_numerator"));
    den = get_num(field(j, "rankone_denominator"));
  }
  return QuadraticObjective::entrywise(get_num(field(j, "offdiag_weight")), get_num(field(j, "diag_weight")),
                                       mat_from(field(j, "anchor")), mat_from(field(j, "linear")), numer, den);
}

json witness_json(const QpWitness& w) {
  return {{"x", vec_json(w.x)}, {"g", vec_json(w.g)}, {"y", vec_json(w.y)},
          {"v", vec_json(w.v)}, {"w", num(w.w)},      {"tau", w.tau}};
}

QpWitness witness_from(const json& j, const RegimeParams& p) {
  QpWitness w;
  w.x = vec_from(field(j, "x"));
  w.g = vec_from(field(j, "g"));
  w.y = vec_from(field(j, "y"));
  w.v = vec_from(field(j, "v"));
  w.w = get_num(field(j, "w"));
  w.tau = field(j, "tau").get<std::vector<int>>();
  if (static_cast<int>(w.tau.size()) != p.m) fail(ErrorKind::InvalidInput, "tau length differs from m");
  w.sets = index_sets(w.tau, p.r, p.r_star);
  return w;
}

std::string wrap(InstanceKind kind, json payload) {
  json j = {{"schema_version", kSchemaVersion}, {"kind", std::string(to_string(kind))}, {"payload", std::move(payload)}};
  return j.dump(2) + "\n";
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

json sigma_d_json(const StationaryDecomposition& d) {
  return {{"s", d.s}, {"r", d.r}, {"sigma", vec_json(d.sigma)}, {"d", vec_json(d.d)}};
}

}  // namespace

std::string_view to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::Regime: return "regime";
    case InstanceKind::Counterexample: return "counterexample";
    case InstanceKind::QuadraticObjective: return "quadratic_objective";
    case InstanceKind::Report: return "report";
  }
  return "?";
}

std::string serialize_regime(const RegimeParams& p) { return wrap(InstanceKind::Regime, regime_json(p)); }

std::string serialize_counterexample(const CounterexampleInstance& inst) {
  json payload = {{"params", regime_json(inst.params)},
                  {"objective", objective_json(inst.h)},
                  {"branch", std::string(to_string(inst.branch))},
                  {"U", mat_json(inst.pair.U)},
                  {"V", mat_json(inst.pair.V)},
                  {"Xbar", mat_json(inst.Xbar)},
                  {"Xstar", mat_json(inst.Xstar)},
                  {"Gbar", mat_json(inst.Gbar)},
                  {"Gstar", mat_json(inst.Gstar)},
                  {"witness", witness_json(inst.witness)},
                  {"qp_objective", num(inst.qp_objective)}};
  return wrap(InstanceKind::Counterexample, std::move(payload));
}

std::string serialize_objective(const QuadraticObjective& h, std::optional<double> lambda, std::optional<int> r) {
  json payload = {{"objective", objective_json(h)}};
  if (lambda) payload["lambda"] = num(*lambda);
  if (r) payload["r"] = *r;
  return wrap(InstanceKind::QuadraticObjective, std::move(payload));
}

std::string serialize_report(const std::string& payload_json) {
  return wrap(InstanceKind::Report, parse_json(payload_json));
}

LoadedInstance parse_instance(const std::string& text) {
  const json j = parse_json(text);
  try {
    const json& ver = field(j, "schema_version");
    if (!ver.is_string() || ver.get<std::string>() != kSchemaVersion)
      fail(ErrorKind::SchemaMismatch, "unsupported schema_version " + ver.dump());
    const std::string kind = field(j, "kind").get<std::string>();
    const json& payload = field(j, "payload");
    LoadedInstance out;
    if (kind == "regime") {
      out.kind = InstanceKind::Regime;
      out.regime = regime_from(payload);
    } else if (kind == "counterexample") {
      out.kind = InstanceKind::Counterexample;
      CounterexampleInstance inst;
      inst.params = regime_from(field(payload, "params"));
      inst.h = objective_from(field(payload, "objective"));
      const std::string branch = field(payload, "branch").get<std::string>();
      if (branch != "RankOne" && branch != "Plain") fail(ErrorKind::InvalidInput, "unknown branch");
      inst.branch = branch == "RankOne" ? ObjectiveBranch::RankOne : ObjectiveBranch::Plain;
      inst.pair = {mat_from(field(payload, "U")), mat_from(field(payload, "V"))};
      inst.Xbar = mat_from(field(payload, "Xbar"));
      inst.Xstar = mat_from(field(payload, "Xstar"));
      inst.Gbar = mat_from(field(payload, "Gbar"));
      inst.Gstar = mat_from(field(payload, "Gstar"));
      inst.witness = witness_from(field(payload, "witness"), inst.params);
      inst.qp_objective = get_num(field(payload, "qp_objective"));
      const auto m = inst.params.m, n = inst.params.n;
      for (const Mat* X : {&inst.Xbar, &inst.Xstar, &inst.Gbar, &inst.Gstar})
        if (X->rows() != m || X->cols() != n) fail(ErrorKind::InvalidInput, "matrix shape differs from (m, n)");
      if (inst.h.rows() != m || inst.h.cols() != n) fail(ErrorKind::InvalidInput, "objective shape differs");
      if (inst.pair.U.rows() != m || inst.pair.V.rows() != n || inst.pair.U.cols() != inst.params.r ||
          inst.pair.V.cols() != inst.params.r)
        fail(ErrorKind::InvalidInput, "factor pair shape differs from (m, n, r)");
      out.counterexample = std::move(inst);
    } else if (kind == "quadratic_objective") {
      out.kind = InstanceKind::QuadraticObjective;
      out.objective = objective_from(field(payload, "objective"));
      if (payload.contains("lambda")) out.lambda = get_num(payload.at("lambda"));
      if (payload.contains("r")) out.r = payload.at("r").get<int>();
    } else if (kind == "report") {
      out.kind = InstanceKind::Report;
      out.report = payload.dump();
    } else {
      fail(ErrorKind::SchemaMismatch, "unknown kind '" + kind + "'");
    }
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("bad field type: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "read error on " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

LoadedInstance load_instance(const std::filesystem::path& path) { return parse_instance(read_file(path)); }

std::string verdict_json(const Verdict& v, const RegimeParams& p) {
  json j = {{"params", regime_json(p)},
            {"kappa", num(p.kappa())},
            {"factorizable", v.factorizable},
            {"scenario", std::string(to_string(v.scenario))},
            {"reason", v.reason}};
  j["witness"] = v.witness ? json{{"d", v.witness->d}, {"w", num(v.witness->w)}} : json(nullptr);
  j["alpha"] = v.alpha ? num(*v.alpha) : json(nullptr);
  return j.dump();
}

std::string verification_json(const VerificationReport& rep) {
  json j = {{"grad_Fr_residual", num(rep.grad_Fr_residual)},
            {"min_hessian_eig", num(rep.min_hessian_eig)},
            {"f_gap", num(rep.f_gap)},
            {"xstar_is_stationary", rep.xstar_is_stationary},
            {"xbar_spectral_excess", num(rep.xbar_spectral_excess)},
            {"gradient_identity_residual", num(rep.gradient_identity_residual)},
            {"certified_mu", num(rep.certified_mu)},
            {"certified_L", num(rep.certified_L)},
            {"rayleigh_min", num(rep.rayleigh_min)},
            {"rayleigh_max", num(rep.rayleigh_max)},
            {"bounds_ok", rep.bounds_ok},
            {"gap_ineq_value", num(rep.gap_ineq_value)},
            {"all_pass", rep.all_pass},
            {"failed_checks", rep.failed_checks}};
  return j.dump();
}

std::string second_order_json(const SecondOrderReport& rep) {
  json j = {{"verdict", std::string(to_string(rep.verdict))},
            {"grad_residual", num(rep.grad_residual)},
            {"min_hessian_eig", num(rep.min_hessian_eig)},
            {"tol_g", num(rep.tol_g)},
            {"tol_h", num(rep.tol_h)}};
  j["decomposition"] = rep.decomposition ? sigma_d_json(*rep.decomposition) : json(nullptr);
  return j.dump();
}

std::string solve_json(const SolveTrace& tr, double lambda) {
  const Mat X = tr.final.U * tr.final.V.transpose();
  json j = {{"classification", std::string(to_string(tr.classification))},
            {"converged", tr.converged},
            {"iterations", tr.iterations},
            {"escapes", tr.escapes},
            {"final_objective", tr.objective.empty() ? json(nullptr) : num(tr.objective.back())},
            {"final_grad_norm", num(tr.final_grad_norm)},
            {"final_min_eig", num(tr.final_min_eig)},
            {"lambda", num(lambda)},
            {"X", mat_json(X)},
            {"U", mat_json(tr.final.U)},
            {"V", mat_json(tr.final.V)}};
  return j.dump();
}

std::string to_csv(const PhaseTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "m,n,r,r_star,L,mu,lambda,oracle,n_global,n_spurious,n_undetermined\n";
  for (const PhaseRow& row : table) {
    const RegimeParams& p = row.params;
    out << p.m << ',' << p.n << ',' << p.r << ',' << p.r_star << ',' << p.L << ',' << p.mu << ',' << p.lambda << ','
        << (row.oracle_factorizable ? "factorizable" : "not_factorizable") << ',' << row.n_global << ','
        << row.n_spurious << ',' << row.n_undetermined << '\n';
  }
  return out.str();
}

std::vector<RegimeParams> parse_grid(const std::string& text) {
  const json j = parse_json(text);
  try {
    std::vector<RegimeParams> out;
    if (j.contains("cells")) {
      for (const json& c : j.at("cells")) out.push_back(regime_from(c));
      return out;
    }
    out = product_grid(field(j, "m").get<std::vector<int>>(), field(j, "r").get<std::vector<int>>(),
                       field(j, "r_star").get<std::vector<int>>(), field(j, "kappa").get<std::vector<double>>(),
                       j.contains("lambda") ? j.at("lambda").get<std::vector<double>>() : std::vector<double>{1.0},
                       j.contains("extra_cols") ? j.at("extra_cols").get<int>() : 0);
    if (out.empty()) fail(ErrorKind::InvalidInput, "grid has no valid cells");
    for (const RegimeParams& p : out) validate(p);
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("bad grid: ") + e.what());
  }
}

}  // namespace bmf
