#include "bmf/stationarity.hpp"

#include <cmath>

#include "bmf/error.hpp"

namespace bmf {

namespace {

Mat with_leading_identity(const Mat& tail, Eigen::Index lead) {
  const Eigen::Index total = lead + tail.rows();
  Mat out = Mat::Identity(total, total);
  out.bottomRightCorner(tail.rows(), tail.cols()) = tail;
  return out;
}

// Orthonormal basis of R^m whose first columns are the (re-orthonormalised)
// columns of B.
Mat complete_basis(const Mat& B, Eigen::Index m) {
  if (B.cols() == 0) return Mat::Identity(m, m);
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Mat polar = svd.matrixU() * svd.matrixV().transpose();
  Eigen::HouseholderQR<Mat> qr(polar);
  Mat full = qr.householderQ() * Mat::Identity(m, m);
  full.leftCols(B.cols()) = polar;
  return full;
}

struct Alignment {
  Mat R, P;
  Vec sigma, d;
  Eigen::Index s = 0;
  double leading_err = 0.0;  // max |M_ij - lambda delta_ij| on the leading block
  double cross_err = 0.0;    // max |M_ij| on the off-diagonal blocks
  double trailing_spectral = 0.0;
};

// Rotates the kernel frames of (R0, P0) so that M = -R^T G P is diagonal on
// its trailing block, then measures how far the rest is from lambda I / 0.
Alignment align_frames(const Mat& R0, const Mat& P0, const Vec& sigma, Eigen::Index s, const Mat& G, double lambda) {
  const Eigen::Index m = R0.rows(), n = P0.rows();
  Alignment a;
  a.s = s;
  a.sigma = sigma;
  Mat M = -R0.transpose() * G * P0;
  const FullSvd tail = full_svd(M.bottomRightCorner(m - s, n - s));
  a.R = R0 * with_leading_identity(tail.R, s);
  a.P = P0 * with_leading_identity(tail.P, s);
  M = -a.R.transpose() * G * a.P;
  a.d = tilde_diag(M);
  if (s < m) a.trailing_spectral = tail.sigma.size() ? tail.sigma(0) : 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool lead_i = i < s, lead_j = j < s;
      if (lead_i && lead_j) {
        a.leading_err = std::max(a.leading_err, std::abs(M(i, j) - (i == j ? lambda : 0.0)));
      } else if (lead_i != lead_j) {
        a.cross_err = std::max(a.cross_err, std::abs(M(i, j)));
      }
    }
  for (Eigen::Index i = s; i < m; ++i) a.d(i) = i - s < tail.sigma.size() ? tail.sigma(i - s) : 0.0;
  return a;
}

Alignment align_at(const Mat& X, const Mat& G, double lambda) {
  const FullSvd svd = full_svd(X);
  const Eigen::Index s = numerical_rank(svd.sigma);
  return align_frames(svd.R, svd.P, svd.sigma, s, G, lambda);
}

}  // namespace

BalancedDecomposition balanced_decompose(const Mat& U, const Mat& V, double tol) {
  if (U.cols() != V.cols() || U.cols() < 1 || U.rows() > V.rows())
    fail(ErrorKind::InvalidInput, "need U (m x r), V (n x r) with m <= n");
  if (!U.allFinite() || !V.allFinite()) fail(ErrorKind::InvalidInput, "non-finite factors");
  const Mat UtU = U.transpose() * U;
  if ((UtU - V.transpose() * V).norm() > tol * (1.0 + UtU.norm())) fail(ErrorKind::NotBalanced, "U^T U != V^T V");

  const Eigen::Index m = U.rows();
  const FullSvd sv = full_svd(V);
  const Eigen::Index s = numerical_rank(sv.sigma);
  BalancedDecomposition out;
  out.P = sv.R;
  out.Q = sv.P;
  out.sigma = sv.sigma;
  // U Q = R diag(sigma) on the range, any orthonormal completion elsewhere
  Mat head = U * sv.P.leftCols(s);
  for (Eigen::Index i = 0; i < s; ++i) head.col(i) /= sv.sigma(i);
  out.R = complete_basis(head, m);
  return out;
}

StationaryDecomposition certify_first_order(const QuadraticObjective& h, double lambda, const FactorPair& p,
                                            double tol) {
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidInput, "lambda must be positive");
  const FactorPair g = grad_Fr(h, lambda, p);
  const Mat G = h.gradient(p.U * p.V.transpose());
  const double scale = 1.0 + G.norm();
  if (g.U.norm() > tol * scale || g.V.norm() > tol * scale)
    fail(ErrorKind::NotStationary, "factor gradient exceeds tolerance");

  // lambda (U^T U - V^T V) = U^T gU - gV^T V bounds the imbalance
  const double imbalance = (p.U.norm() * g.U.norm() + p.V.norm() * g.V.norm()) / lambda;
  const double gram = (p.U.transpose() * p.U).norm();
  const double bal_tol = std::max(1e-12, (2.0 * imbalance + 1e-12 * (1.0 + gram)) / (1.0 + gram));
  const BalancedDecomposition bal = balanced_decompose(p.U, p.V, bal_tol);

  const Eigen::Index m = p.U.rows(), r = p.U.cols();
  const Vec sigma_x = pad(Vec(bal.sigma.array().square()), m);
  const Eigen::Index s = numerical_rank(sigma_x);
  const Alignment a = align_frames(bal.R, bal.P, sigma_x, s, G, lambda);
  const double align_tol = std::max(1e-7, 10.0 * tol) * (1.0 + G.norm());
  if (a.leading_err > align_tol || a.cross_err > align_tol)
    fail(ErrorKind::CertificationFailed, "frames do not align with -grad h");

  StationaryDecomposition out;
  out.R = a.R;
  out.P = a.P;
  out.Q = bal.Q;
  out.sigma = sigma_x;
  out.d = a.d;
  out.d.head(s).setConstant(lambda);
  out.s = s;
  out.r = r;
  return out;
}

StationaryDecomposition certify_pseudo_stationary(const QuadraticObjective& h, double lambda, const Mat& X,
                                                  double tol) {
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidInput, "lambda must be positive");
  const Mat G = h.gradient(X);
  const Alignment a = align_at(X, G, lambda);
  const double scale = tol * (1.0 + lambda + G.norm());
  if (a.leading_err > scale || a.cross_err > scale)
    fail(ErrorKind::NotPseudoStationary, "-grad h(X) is not lambda I on the range of X");
  StationaryDecomposition out;
  out.R = a.R;
  out.P = a.P;
  out.sigma = a.sigma;
  out.d = a.d;
  out.d.head(a.s).setConstant(lambda);
  out.s = a.s;
  return out;
}

bool nuclear_subdiff_member(const Mat& X, const Mat& G, double lambda, double tol) {
  if (X.rows() != G.rows() || X.cols() != G.cols()) fail(ErrorKind::InvalidInput, "shape mismatch");
  if (X.rows() > X.cols()) fail(ErrorKind::InvalidInput, "need m <= n");
  const Alignment a = align_at(X, G, lambda);
  const double scale = tol * (1.0 + lambda);
  return a.leading_err <= scale && a.cross_err <= scale && a.trailing_spectral <= lambda * (1.0 + tol);
}

bool is_stationary_f(const QuadraticObjective& h, double lambda, const Mat& X, double tol) {
  return nuclear_subdiff_member(X, h.gradient(X), lambda, tol);
}

double min_hessian_eigenvalue(const QuadraticObjective& h, double lambda, const FactorPair& p) {
  return symmetric_eigenvalues(hess_matrix_Fr(h, lambda, p)).minCoeff();
}

SecondOrderReport certify_second_order(const QuadraticObjective& h, double lambda, const FactorPair& p,
                                       std::optional<double> tol_g, std::optional<double> tol_h) {
  SecondOrderReport rep;
  const double gnorm = h.gradient(p.U * p.V.transpose()).norm();
  rep.tol_g = tol_g.value_or(1e-8 * (1.0 + gnorm));
  rep.tol_h = tol_h.value_or(1e-8 * (1.0 + h.certified_bounds().L));
  rep.grad_residual = grad_norm(grad_Fr(h, lambda, p));
  rep.min_hessian_eig = min_hessian_eigenvalue(h, lambda, p);
  if (rep.grad_residual > rep.tol_g) {
    rep.verdict = SecondOrderVerdict::NotStationary;
    return rep;
  }
  rep.verdict = rep.min_hessian_eig >= -rep.tol_h ? SecondOrderVerdict::SecondOrder
                                                  : SecondOrderVerdict::FirstOrderOnly;
  try {
    rep.decomposition = certify_first_order(h, lambda, p, rep.tol_g / (1.0 + gnorm));
  } catch (const Error&) {
    rep.decomposition.reset();
  }
  return rep;
}

bool spectral_norm_bound_check(const StationaryDecomposition& cert, double lambda, double L_bound, double tol) {
  const Eigen::Index m = cert.d.size();
  if (cert.r < 1 || cert.r > m) fail(ErrorKind::InvalidInput, "certificate carries no factor width");
  double trailing = 0.0;
  for (Eigen::Index i = cert.s; i < m; ++i) trailing = std::max(trailing, cert.d(i));
  return trailing <= lambda + L_bound * cert.sigma(cert.r - 1) + tol;
}

std::string_view to_string(SecondOrderVerdict v) {
  switch (v) {
    case SecondOrderVerdict::SecondOrder: return "SecondOrder";
    case SecondOrderVerdict::FirstOrderOnly: return "FirstOrderOnly";
    case SecondOrderVerdict::NotStationary: return "NotStationary";
  }
  return "Unknown";
}

}  // namespace bmf
