#include "bmf/linalg.hpp"

#include <cmath>
#include <random>

#include "bmf/error.hpp"

namespace bmf {

namespace {

void require_finite(const Mat& X, const char* what) {
  if (!X.allFinite()) fail(ErrorKind::InvalidInput, std::string(what) + " has non-finite entries");
}

Mat block_diag_with_identity(const Mat& head, Eigen::Index total) {
  Mat out = Mat::Identity(total, total);
  out.topLeftCorner(head.rows(), head.cols()) = head;
  return out;
}

}  // namespace

FullSvd full_svd(const Mat& X) {
  require_finite(X, "svd input");
  FullSvd out;
  if (X.size() == 0) {
    out.R = Mat::Identity(X.rows(), X.rows());
    out.P = Mat::Identity(X.cols(), X.cols());
    out.sigma = Vec::Zero(0);
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.R = svd.matrixU();
  out.P = svd.matrixV();
  out.sigma = svd.singularValues();
  return out;
}

Mat tilde_diag_embed(const Vec& x, Eigen::Index m, Eigen::Index n) {
  if (m < 1 || n < 1) fail(ErrorKind::InvalidInput, "embedding dimensions must be positive");
  if (x.size() != std::min(m, n)) fail(ErrorKind::InvalidInput, "diagonal length must be min(m, n)");
  Mat out = Mat::Zero(m, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i, i) = x(i);
  return out;
}

Vec tilde_diag(const Mat& X) {
  const Eigen::Index k = std::min(X.rows(), X.cols());
  Vec out(k);
  for (Eigen::Index i = 0; i < k; ++i) out(i) = X(i, i);
  return out;
}

Mat random_orthogonal(Eigen::Index k, std::uint64_t seed) {
  if (k < 1) fail(ErrorKind::InvalidInput, "orthogonal dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat G(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(k, k);
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  // sign fix makes the distribution Haar rather than QR-biased
  for (Eigen::Index j = 0; j < k; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

BlockSvd simultaneous_block_svd(const Mat& A, const Mat& B, Eigen::Index k) {
  require_finite(A, "A");
  require_finite(B, "B");
  if (A.rows() != B.rows() || A.cols() != B.cols()) fail(ErrorKind::InvalidInput, "A and B must share a shape");
  const Eigen::Index m = A.rows(), n = A.cols();
  if (k < 0 || k > std::min(m, n)) fail(ErrorKind::InvalidInput, "block size out of range");
  const Eigen::Index ra = numerical_rank(A), rb = numerical_rank(B);
  if (ra + rb > k) fail(ErrorKind::RankBudgetExceeded, "rank(A) + rank(B) exceeds block size");

  Mat AB(m, 2 * n);
  AB << A, B;
  Mat AoverB(2 * m, n);
  AoverB << A, B;
  const FullSvd s1 = full_svd(AB);
  const FullSvd s2 = full_svd(AoverB);
  const Mat& U1 = s1.R;
  const Mat& V2 = s2.P;

  // after the two rotations both A and B live in the leading k x k block
  const Mat A1 = (U1.transpose() * A * V2).topLeftCorner(k, k);
  const FullSvd s3 = full_svd(A1);

  BlockSvd out;
  out.U = U1 * block_diag_with_identity(s3.R, m);
  out.V = V2 * block_diag_with_identity(s3.P, n);
  out.B1 = out.U.transpose() * B * out.V;
  return out;
}

MatrixNorms norms(const Mat& X) {
  MatrixNorms out;
  out.frobenius = X.norm();
  if (X.size() == 0) return out;
  const Vec s = Eigen::JacobiSVD<Mat>(X).singularValues();
  out.nuclear = s.sum();
  out.spectral = s(0);
  return out;
}

Eigen::Index numerical_rank(const Vec& sigma) {
  if (sigma.size() == 0) return 0;
  const double tol = std::max(kRankRelTol * sigma.maxCoeff(), kRankAbsTol);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tol) ++r;
  return r;
}

Eigen::Index numerical_rank(const Mat& X) {
  if (X.size() == 0) return 0;
  return numerical_rank(Vec(Eigen::JacobiSVD<Mat>(X).singularValues()));
}

Vec symmetric_eigenvalues(const Mat& S) {
  require_finite(S, "symmetric matrix");
  if (S.rows() != S.cols()) fail(ErrorKind::InvalidInput, "eigenvalues need a square matrix");
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Vec pad(const Vec& v, Eigen::Index len) {
  Vec out = Vec::Zero(len);
  const Eigen::Index k = std::min(len, v.size());
  out.head(k) = v.head(k);
  return out;
}

bool is_orthogonal(const Mat& Q, double tol) {
  if (Q.rows() != Q.cols()) return false;
  return (Q.transpose() * Q - Mat::Identity(Q.rows(), Q.cols())).norm() <= tol;
}

}  // namespace bmf
