#pragma once

#include <cstdint>
#include <optional>

#include "bmf/linalg.hpp"

namespace bmf {

struct RegimeParams {
  int m = 0;
  int n = 0;
  int r = 0;
  int r_star = 0;
  double L = 1.0;
  double mu = 1.0;
  double lambda = 1.0;

  double kappa() const { return L / mu; }
};

// Throws InvalidInput unless 1 <= m <= n, 1 <= r <= m, 0 <= r* <= m,
// 0 < mu <= L and lambda > 0.
void validate(const RegimeParams& p);

struct FactorPair {
  Mat U;  // m x r
  Mat V;  // n x r
};

enum class ObjectiveMode { EntrywiseWeighted, GeneralPsd };

struct CertifiedBounds {
  double mu = 0.0;
  double L = 0.0;
};

// Quadratic loss on m x n matrices.
//
// EntrywiseWeighted:
//   h(X) = offdiag/2 * sum_{i != j} X_ij^2 + diag/2 * sum_i (X_ii - A_ii)^2
//          + <C, X> + <X - A, N>^2 / den
// GeneralPsd:
//   h(X) = 1/2 vec(X)^T H vec(X) + <C, X> + c0, H = Q diag(ev) Q^T
// vec() is row-major throughout.
class QuadraticObjective {
 public:
  // Empty placeholder; only assignment and the accessors are meaningful.
  QuadraticObjective() = default;
  static QuadraticObjective entrywise(double offdiag_weight, double diag_weight, const Mat& anchor, const Mat& linear,
                                      const Mat& rankone_numerator = Mat(), double rankone_denominator = 0.0);
  static QuadraticObjective general_psd(const Mat& eigenbasis, const Vec& eigenvalues, const Mat& linear,
                                        double constant = 0.0);

  ObjectiveMode mode() const { return mode_; }
  Eigen::Index rows() const { return m_; }
  Eigen::Index cols() const { return n_; }

  double value(const Mat& X) const;
  Mat gradient(const Mat& X) const;
  // Hessian operator applied to a direction.
  Mat hess_apply(const Mat& Y) const;
  double hess_quadform(const Mat& Y) const;
  // Dense (mn x mn) Hessian in row-major vec coordinates.
  Mat hessian_matrix() const;

  CertifiedBounds certified_bounds() const;

  // EntrywiseWeighted accessors
  double offdiag_weight() const { return offdiag_; }
  double diag_weight() const { return diag_; }
  const Mat& anchor() const { return anchor_; }
  const Mat& linear() const { return linear_; }
  bool has_rankone() const { return has_rankone_; }
  const Mat& rankone_numerator() const { return numerator_; }
  double rankone_denominator() const { return denominator_; }

  // GeneralPsd accessors
  const Mat& eigenbasis() const { return eigenbasis_; }
  const Vec& eigenvalues() const { return eigenvalues_; }
  double constant() const { return constant_; }

 private:
  ObjectiveMode mode_ = ObjectiveMode::EntrywiseWeighted;
  Eigen::Index m_ = 0, n_ = 0;
  double offdiag_ = 0.0, diag_ = 0.0;
  Mat anchor_, linear_, numerator_;
  bool has_rankone_ = false;
  double denominator_ = 0.0;
  Mat eigenbasis_, hessian_;
  Vec eigenvalues_;
  double constant_ = 0.0;
};

// K -> h(Uframe [K 0; 0 0] Vframe^T) on k x k matrices, as a GeneralPsd
// objective. Its spectrum lies inside [mu, L] of h.
QuadraticObjective restrict_to_block(const QuadraticObjective& h, const Mat& Uframe, const Mat& Vframe,
                                     Eigen::Index k);

Vec vec_rowmajor(const Mat& X);
Mat unvec_rowmajor(const Vec& v, Eigen::Index m, Eigen::Index n);

double nuclear_norm(const Mat& X);
double eval_f(const QuadraticObjective& h, double lambda, const Mat& X);
double eval_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p);
FactorPair grad_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p);
double grad_norm(const FactorPair& g);

// Second derivative of F_r at p along (dU, dV).
double hess_quadform_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p, const FactorPair& dir);
// Hessian-vector product, same layout as grad_Fr.
FactorPair hess_apply_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p, const FactorPair& dir);

constexpr Eigen::Index kDenseHessianLimit = 2000;
// Dense Hessian in coordinates [vec(U); vec(V)], row-major. TooLarge when
// (m + n) r exceeds kDenseHessianLimit.
Mat hess_matrix_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p);

Vec flatten(const FactorPair& p);
FactorPair unflatten(const Vec& v, Eigen::Index m, Eigen::Index n, Eigen::Index r);

// (U, V) with i.i.d. N(0, scale^2) entries.
FactorPair random_pair(Eigen::Index m, Eigen::Index n, Eigen::Index r, double scale, std::uint64_t seed);

}  // namespace bmf
