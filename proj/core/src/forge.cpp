#include "bmf/forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bmf/error.hpp"
#include "bmf/trace_bounds.hpp"

namespace bmf {

namespace {

constexpr double kBranchTol = 1e-12;

Vec permuted(const Vec& z, const std::vector<int>& tau) {
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out(i) = z(tau[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

DiagonalEmbedding embed_diagonals(const QpWitness& wit, int n) {
  const auto m = wit.x.size();
  if (n < m) fail(ErrorKind::InvalidInput, "need n >= m");
  if (static_cast<Eigen::Index>(wit.tau.size()) != m || !is_permutation(wit.tau))
    fail(ErrorKind::InvalidInput, "witness carries no valid permutation");
  DiagonalEmbedding e;
  e.Xbar = tilde_diag_embed(wit.x, m, n);
  e.Xstar = tilde_diag_embed(permuted(wit.y, wit.tau), m, n);
  e.Gbar = tilde_diag_embed(wit.g, m, n);
  e.Gstar = tilde_diag_embed(permuted(wit.v, wit.tau), m, n);
  return e;
}

BuiltObjective build_objective(const DiagonalEmbedding& e, const RegimeParams& p) {
  validate(p);
  const double L = p.L, mu = p.mu;
  const Mat N = e.Gbar + mu * e.Xbar - e.Gstar - mu * e.Xstar;
  if (N.norm() <= kBranchTol)
    return {QuadraticObjective::entrywise(L, mu, e.Xbar, -e.Gbar), ObjectiveBranch::Plain};
  if (L == mu) fail(ErrorKind::ConstructionFailed, "rank-one correction needs L > mu");
  const double c = (e.Xstar - e.Xbar).cwiseProduct(N).sum();
  if (!(c > 0.0)) fail(ErrorKind::ConstructionFailed, "rank-one denominator is not positive");
  // with N diagonal, L - mu >= |N|^2 / c is exactly the curvature budget
  if (N.squaredNorm() / c > (L - mu) * (1.0 + 1e-9) + 1e-12)
    fail(ErrorKind::ConstructionFailed, "rank-one correction exceeds L - mu");
  return {QuadraticObjective::entrywise(L, mu, e.Xbar, -e.Gbar, N, 2.0 * c), ObjectiveBranch::RankOne};
}

FactorPair build_factor_pair(const Mat& Xbar, int r) {
  const Eigen::Index m = Xbar.rows(), n = Xbar.cols();
  if (r < 1 || r > m || m > n) fail(ErrorKind::InvalidInput, "need 1 <= r <= m <= n");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && Xbar(i, j) != 0.0) fail(ErrorKind::InvalidInput, "Xbar must be diagonal");
  const Vec x = tilde_diag(Xbar);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (i < r && !(x(i) > 0.0)) fail(ErrorKind::InvalidInput, "leading r diagonal entries must be positive");
    if (i >= r && x(i) != 0.0) fail(ErrorKind::InvalidInput, "rank of Xbar exceeds r");
    if (i > 0 && x(i) > x(i - 1)) fail(ErrorKind::InvalidInput, "diagonal must be sorted descending");
  }
  FactorPair out{Mat::Zero(m, r), Mat::Zero(n, r)};
  for (int i = 0; i < r; ++i) out.U(i, i) = out.V(i, i) = std::sqrt(x(i));
  return out;
}

CounterexampleInstance forge(const RegimeParams& p, double w) {
  validate(p);
  const Verdict ov = oracle(p);
  if (ov.factorizable) fail(ErrorKind::FactorizableRegime, "every second-order point is global (" + ov.reason + ")");
  const Verdict qv = solve_reduced_qp(p);
  if (!qv.witness) fail(ErrorKind::Internal, "threshold test and case analysis disagree");

  CounterexampleInstance inst;
  inst.params = p;
  inst.witness = sort_and_permute(build_witness(qv.witness->d, w, p), p);
  inst.qp_objective = qp_objective(inst.witness, p);
  const double scale = p.lambda * p.lambda * p.L * (p.L + p.L * p.L / p.mu) * p.m * w * w;
  if (inst.qp_objective < -1e-12 * scale) fail(ErrorKind::Internal, "witness has negative objective");

  const DiagonalEmbedding e = embed_diagonals(inst.witness, p.n);
  inst.Xbar = e.Xbar;
  inst.Xstar = e.Xstar;
  inst.Gbar = e.Gbar;
  inst.Gstar = e.Gstar;
  auto built = build_objective(e, p);
  inst.branch = built.branch;
  inst.h = std::move(built.h);
  inst.pair = build_factor_pair(e.Xbar, p.r);
  return inst;
}

VerificationReport verify_counterexample(const CounterexampleInstance& inst, const VerifyTolerances& tol) {
  const RegimeParams& p = inst.params;
  validate(p);
  const double lam = p.lambda;
  const QuadraticObjective& h = inst.h;
  VerificationReport rep;
  auto check = [&](bool ok, const char* name) {
    if (!ok) rep.failed_checks.emplace_back(name);
  };

  const Mat gbar = h.gradient(inst.Xbar);
  const Mat gstar = h.gradient(inst.Xstar);
  rep.grad_Fr_residual = grad_norm(grad_Fr(h, lam, inst.pair));
  check(rep.grad_Fr_residual <= tol.grad_rel * (1.0 + gbar.norm()), "grad_Fr_residual");

  try {
    rep.min_hessian_eig = min_hessian_eigenvalue(h, lam, inst.pair);
  } catch (const Error&) {
    rep.min_hessian_eig = std::numeric_limits<double>::quiet_NaN();
  }
  check(rep.min_hessian_eig >= -tol.hess_abs, "min_hessian_eig");

  rep.f_gap = eval_f(h, lam, inst.Xbar) - eval_f(h, lam, inst.Xstar);
  check(rep.f_gap >= tol.gap_rel * lam * lam, "f_gap");

  rep.xstar_is_stationary = is_stationary_f(h, lam, inst.Xstar, tol.stationary_tol);
  check(rep.xstar_is_stationary, "xstar_is_stationary");

  rep.xbar_spectral_excess = norms(gbar).spectral - lam;
  check(rep.xbar_spectral_excess >= tol.excess_rel * lam, "xbar_spectral_excess");

  const double id_scale = 1.0 + inst.Gbar.norm() + inst.Gstar.norm();
  rep.gradient_identity_residual =
      std::max({(gbar + inst.Gbar).norm() / id_scale, (gstar + inst.Gstar).norm() / id_scale,
                (inst.pair.U * inst.pair.V.transpose() - inst.Xbar).norm() / (1.0 + inst.Xbar.norm())});
  check(rep.gradient_identity_residual <= tol.identity_rel, "gradient_identity");

  bool bounds = true;
  try {
    const CertifiedBounds cb = h.certified_bounds();
    rep.certified_mu = cb.mu;
    rep.certified_L = cb.L;
    bounds = cb.mu >= p.mu - tol.bounds_abs && cb.L <= p.L + tol.bounds_abs;
  } catch (const Error&) {
    bounds = false;
  }
  std::mt19937_64 rng(tol.rayleigh_seed);
  std::normal_distribution<double> gauss;
  rep.rayleigh_min = std::numeric_limits<double>::infinity();
  rep.rayleigh_max = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < tol.rayleigh_samples; ++k) {
    Mat Y(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < Y.size(); ++i) Y.data()[i] = gauss(rng);
    const double q = h.hess_quadform(Y) / Y.squaredNorm();
    rep.rayleigh_min = std::min(rep.rayleigh_min, q);
    rep.rayleigh_max = std::max(rep.rayleigh_max, q);
  }
  if (tol.rayleigh_samples > 0)
    bounds = bounds && rep.rayleigh_min >= p.mu - tol.bounds_abs && rep.rayleigh_max <= p.L + tol.bounds_abs;
  rep.bounds_ok = bounds;
  check(rep.bounds_ok, "bounds_ok");

  try {
    const StationaryDecomposition c1 = certify_pseudo_stationary(h, lam, inst.Xbar);
    const StationaryDecomposition c2 = certify_pseudo_stationary(h, lam, inst.Xstar);
    rep.gap_ineq_value = pseudo_stationary_gap(c1, c2, p.L, p.mu);
  } catch (const Error&) {
    rep.gap_ineq_value = std::numeric_limits<double>::quiet_NaN();
  }
  check(rep.gap_ineq_value >= -1e-9 * (1.0 + lam) * (1.0 + lam), "gap_ineq_value");

  rep.all_pass = rep.failed_checks.empty();
  return rep;
}

std::string_view to_string(ObjectiveBranch b) { return b == ObjectiveBranch::RankOne ? "RankOne" : "Plain"; }

}  // namespace bmf
