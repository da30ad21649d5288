#pragma once

#include <optional>

#include "bmf/decomposition.hpp"
#include "bmf/objective.hpp"

namespace bmf {

// U = R diag~(sigma) Q^T and V = P diag~(sigma) Q^T for a balanced pair
// (U^T U = V^T V). sigma has length r.
struct BalancedDecomposition {
  Mat R;
  Mat P;
  Mat Q;
  Vec sigma;
};

BalancedDecomposition balanced_decompose(const Mat& U, const Mat& V, double tol = 1e-8);

// Requires |grad_U F_r|, |grad_V F_r| <= tol (1 + |grad h(UV^T)|_F).
StationaryDecomposition certify_first_order(const QuadraticObjective& h, double lambda, const FactorPair& p,
                                            double tol = 1e-8);

// Frames of X aligned so that -grad h(X) = R diag~(d) P^T with d_1..d_s = lambda.
StationaryDecomposition certify_pseudo_stationary(const QuadraticObjective& h, double lambda, const Mat& X,
                                                  double tol = 1e-8);

// -G in lambda * subdifferential of the nuclear norm at X.
bool nuclear_subdiff_member(const Mat& X, const Mat& G, double lambda, double tol = 1e-8);
bool is_stationary_f(const QuadraticObjective& h, double lambda, const Mat& X, double tol = 1e-8);

enum class SecondOrderVerdict { SecondOrder, FirstOrderOnly, NotStationary };

struct SecondOrderReport {
  SecondOrderVerdict verdict = SecondOrderVerdict::NotStationary;
  double grad_residual = 0.0;
  double min_hessian_eig = 0.0;
  double tol_g = 0.0;
  double tol_h = 0.0;
  std::optional<StationaryDecomposition> decomposition;
};

// Defaults: tol_g = 1e-8 (1 + |grad h(UV^T)|_F), tol_h = 1e-8 (1 + L).
SecondOrderReport certify_second_order(const QuadraticObjective& h, double lambda, const FactorPair& p,
                                       std::optional<double> tol_g = std::nullopt,
                                       std::optional<double> tol_h = std::nullopt);

double min_hessian_eigenvalue(const QuadraticObjective& h, double lambda, const FactorPair& p);

// max_{i > s} d_i <= lambda + L_bound * sigma_r + tol, sigma_r the r-th
// singular value of the certified point.
bool spectral_norm_bound_check(const StationaryDecomposition& cert, double lambda, double L_bound,
                               double tol = 1e-9);

std::string_view to_string(SecondOrderVerdict v);

}  // namespace bmf
