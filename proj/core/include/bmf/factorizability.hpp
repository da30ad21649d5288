#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bmf/objective.hpp"

namespace bmf {

enum class Scenario { S1, S2 };

struct ReducedWitness {
  int d = 0;
  double w = 1.0;
};

struct Verdict {
  bool factorizable = false;
  Scenario scenario = Scenario::S1;
  std::optional<ReducedWitness> witness;  // present iff scenario == S2
  std::optional<double> alpha;             // present iff kappa is neither 1 nor 3
  std::string reason;
};

// kappa within kKappaTieRelTol of 3 is treated as exactly 3.
constexpr double kKappaTieRelTol = 1e-12;
bool kappa_is_three(double kappa);

// Direct threshold test: r = m, or r >= r* and
// min{r, m - r*} > (kappa - 1)^2 / 4 * min{r*, m - r}.
Verdict oracle(const RegimeParams& p);

// Case-by-case supremum of the reduced program over (d, w); S1 exactly
// when no feasible (d, w) with r* - r + d > 0 has a nonnegative value.
Verdict solve_reduced_qp(const RegimeParams& p);

// H(d, w) at unit lambda. Feasible d: max(0, r - r*) <= d <= min{r, m - r*}.
double reduced_qp_value(int d, double w, const RegimeParams& p);
int d_min(const RegimeParams& p);
int d_max(const RegimeParams& p);

enum class Subproblem { J1, J2, J3, J4 };

struct SubproblemArgmax {
  // one maximiser at unit lambda
  double x = 0.0, g = 0.0, y = 0.0, v = 0.0;
  std::string description;
};

struct SubproblemSolution {
  double value = 0.0;
  SubproblemArgmax argmax;
};

SubproblemSolution subproblem_optimum(Subproblem which, const RegimeParams& p, double w);

struct IndexSets {
  std::vector<int> J1, J2, J3, J4;
};

// Feasible point of the two-sequence program together with its pairing tau.
// Entries are 0-based; x and g live on [m] indexed by i, y and v by tau(i).
struct QpWitness {
  Vec x, g, y, v;
  double w = 0.0;  // x_i >= w on [r], in the units of lambda
  std::vector<int> tau;
  IndexSets sets;
};

IndexSets index_sets(const std::vector<int>& tau, int r, int r_star);

// Lexicographically smallest tau with |J2| = d.
std::vector<int> lexicographic_tau(int m, int r, int r_star, int d);

// Full-dimensional witness at lambda for a feasible (d, w); w is at unit
// lambda and is scaled by lambda in the result.
QpWitness build_witness(int d, double w, const RegimeParams& p);

// Feasibility slack check; false on any violated constraint.
bool qp_feasible(const QpWitness& wit, const RegimeParams& p, std::string* why = nullptr);

// Objective of the two-sequence program. Infeasible on violated constraints.
double qp_objective(const QpWitness& wit, const RegimeParams& p);

// Sorts x and y descending, carrying g, v and the pairing along.
QpWitness sort_and_permute(const QpWitness& wit, const RegimeParams& p);

// Grid for the brute-force oracle. With W = lambda w and Y = lambda (kappa + 1) w
// the boxes are x in [W, Y], y in [Y / 5, Y], g in [0, lambda + L W] off [r]
// and v in [0, lambda] off [r*], each with `points` equispaced values.
// Refining points -> 2 points - 1 nests the grids; the default grid already
// contains every subproblem maximiser.
struct GridSpec {
  int points = 9;
  std::vector<double> w_values = {0.5, 1.0, 2.0};  // at unit lambda
};

struct BruteForceResult {
  double approx_sup = 0.0;
  QpWitness best_witness;
  // sup over grid points with |g|_inf > lambda; -inf when there are none
  double sup_large_g = 0.0;
};

// Enumerates every tau and every grid point. The objective separates over
// i once tau and w are fixed, so the maximum over the product grid is the sum
// of per-index maxima. TooLarge for m > 5.
BruteForceResult brute_force_qp(const RegimeParams& p, const GridSpec& grid = {});

std::string_view to_string(Scenario s);
std::string_view to_string(Subproblem s);

}  // namespace bmf
