#pragma once

#include <cstdint>
#include <vector>

#include "bmf/objective.hpp"

namespace bmf {

enum class StepRule { Armijo, FixedStep };

struct SolverOptions {
  StepRule step_rule = StepRule::Armijo;
  double fixed_step = 1e-2;  // capped by 1 / (2 (L B^2 + lambda)), B^2 = |U|_F^2 + |V|_F^2
  int max_iters = 20000;
  double grad_tol = 1e-9;
  double eig_tol = 1e-8;
  double perturb_radius = 1e-2;
  int max_escapes = 50;
  double stationary_tol = 1e-6;
  bool record_trace = true;
};

enum class Classification { GlobalByCertificate, SpuriousSecondOrder, Undetermined };

struct SolveTrace {
  FactorPair final;
  std::vector<double> objective;
  std::vector<double> grad_norm;
  int iterations = 0;
  int escapes = 0;
  bool converged = false;
  double final_grad_norm = 0.0;
  double final_min_eig = 0.0;
  Classification classification = Classification::Undetermined;
};

// Gradient descent on F_r with negative-curvature escapes at small gradients.
SolveTrace solve(const QuadraticObjective& h, double lambda, const FactorPair& init, const SolverOptions& opts = {});

struct GeneratedInstance {
  QuadraticObjective h;
  Mat Xstar;
  Mat Gstar;  // -grad h(Xstar)
};

// Random GeneralPsd loss with spectrum spanning [mu, L] whose minimiser of
// f has rank r* and strict complementarity on its kernel.
GeneratedInstance random_psd_instance(const RegimeParams& p, std::uint64_t seed);

struct PhaseRow {
  RegimeParams params;
  bool oracle_factorizable = false;
  int n_global = 0;
  int n_spurious = 0;
  int n_undetermined = 0;
};

using PhaseTable = std::vector<PhaseRow>;

struct SweepOptions {
  SolverOptions solver;
  std::uint64_t seed = 1;
  double init_scale = 0.5;
  int threads = 0;  // 0: BMF_THREADS if set, else hardware concurrency
};

// One row per cell sorted by (m, n, r, r*, L, mu, lambda). Cells outside the
// factorizable region run once from the forged spurious point and
// trials - 1 times from random starts; other cells run trials random starts.
PhaseTable sweep(const std::vector<RegimeParams>& grid, int trials, const SweepOptions& opts = {});

// Cartesian product with n = m + extra_cols, mu = 1, L = kappa.
std::vector<RegimeParams> product_grid(const std::vector<int>& ms, const std::vector<int>& rs,
                                       const std::vector<int>& r_stars, const std::vector<double>& kappas,
                                       const std::vector<double>& lambdas, int extra_cols = 0);
std::vector<RegimeParams> default_grid();

int resolve_threads(int requested);

std::string_view to_string(Classification c);
std::string_view to_string(StepRule s);

}  // namespace bmf
