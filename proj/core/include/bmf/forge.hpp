#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmf/factorizability.hpp"
#include "bmf/objective.hpp"
#include "bmf/stationarity.hpp"

namespace bmf {

struct DiagonalEmbedding {
  Mat Xbar, Xstar, Gbar, Gstar;
};

// Xbar = diag~(x), Xstar = diag~(tau(y)), Gbar = diag~(g), Gstar = diag~(tau(v))
// with tau(z)_i = z_tau(i).
DiagonalEmbedding embed_diagonals(const QpWitness& wit, int n);

enum class ObjectiveBranch { RankOne, Plain };

struct BuiltObjective {
  QuadraticObjective h;
  ObjectiveBranch branch;
};

// Quadratic with grad h(Xbar) = -Gbar and grad h(Xstar) = -Gstar.
BuiltObjective build_objective(const DiagonalEmbedding& e, const RegimeParams& p);

// Balanced pair with U V^T = Xbar, from the leading r diagonal entries.
FactorPair build_factor_pair(const Mat& Xbar, int r);

struct CounterexampleInstance {
  RegimeParams params;
  QuadraticObjective h;
  ObjectiveBranch branch;
  FactorPair pair;
  Mat Xbar, Xstar, Gbar, Gstar;
  QpWitness witness;
  double qp_objective = 0.0;
};

// FactorizableRegime when the oracle says every second-order point is global.
// w is the reduced scale at unit lambda.
CounterexampleInstance forge(const RegimeParams& p, double w = 1.0);

struct VerifyTolerances {
  double grad_rel = 1e-9;      // |grad F_r| <= grad_rel (1 + |grad h(Xbar)|_F)
  double hess_abs = 1e-8;      // lambda_min(Hessian) >= -hess_abs
  double gap_rel = 1e-9;       // f(Xbar) - f(Xstar) >= gap_rel lambda^2
  double excess_rel = 1e-9;    // |grad h(Xbar)|_2 - lambda >= excess_rel lambda
  double identity_rel = 1e-10; // gradient identities at Xbar and Xstar
  double bounds_abs = 1e-9;    // certified (mu, L) within the requested ones
  double stationary_tol = 1e-8;
  int rayleigh_samples = 1000;
  std::uint64_t rayleigh_seed = 7;
};

struct VerificationReport {
  double grad_Fr_residual = 0.0;
  double min_hessian_eig = 0.0;
  double f_gap = 0.0;
  bool xstar_is_stationary = false;
  double xbar_spectral_excess = 0.0;
  double gradient_identity_residual = 0.0;
  double certified_mu = 0.0;
  double certified_L = 0.0;
  double rayleigh_min = 0.0;
  double rayleigh_max = 0.0;
  bool bounds_ok = false;
  double gap_ineq_value = 0.0;
  bool all_pass = false;
  std::vector<std::string> failed_checks;
};

VerificationReport verify_counterexample(const CounterexampleInstance& inst, const VerifyTolerances& tol = {});

std::string_view to_string(ObjectiveBranch b);

}  // namespace bmf
