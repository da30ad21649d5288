#include "bmf/objective.hpp"

#include <cmath>
#include <random>

#include "bmf/error.hpp"

namespace bmf {

void validate(const RegimeParams& p) {
  if (p.m < 1 || p.n < p.m) fail(ErrorKind::InvalidInput, "need 1 <= m <= n");
  if (p.r < 1 || p.r > p.m) fail(ErrorKind::InvalidInput, "need 1 <= r <= m");
  if (p.r_star < 0 || p.r_star > p.m) fail(ErrorKind::InvalidInput, "need 0 <= r* <= m");
  if (!std::isfinite(p.L) || !std::isfinite(p.mu) || !(p.mu > 0.0) || !(p.L >= p.mu))
    fail(ErrorKind::InvalidInput, "need 0 < mu <= L");
  if (!std::isfinite(p.lambda) || !(p.lambda > 0.0)) fail(ErrorKind::InvalidInput, "need lambda > 0");
}

Vec vec_rowmajor(const Mat& X) {
  Vec out(X.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) out(k++) = X(i, j);
  return out;
}

Mat unvec_rowmajor(const Vec& v, Eigen::Index m, Eigen::Index n) {
  if (v.size() != m * n) fail(ErrorKind::InvalidInput, "vector length does not match shape");
  Mat out(m, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = v(k++);
  return out;
}

namespace {

void require_shape(const Mat& X, Eigen::Index m, Eigen::Index n, const char* what) {
  if (X.rows() != m || X.cols() != n) fail(ErrorKind::InvalidInput, std::string(what) + " has the wrong shape");
}

bool diagonal_support(const Mat& X) {
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      if (i != j && X(i, j) != 0.0) return false;
  return true;
}

}  // namespace

QuadraticObjective QuadraticObjective::entrywise(double offdiag_weight, double diag_weight, const Mat& anchor,
                                                 const Mat& linear, const Mat& rankone_numerator,
                                                 double rankone_denominator) {
  if (!(offdiag_weight > 0.0) || !(diag_weight > 0.0) || !std::isfinite(offdiag_weight) ||
      !std::isfinite(diag_weight))
    fail(ErrorKind::InvalidInput, "weights must be positive and finite");
  if (anchor.size() == 0) fail(ErrorKind::InvalidInput, "anchor must be nonempty");
  const Eigen::Index m = anchor.rows(), n = anchor.cols();
  if (m > n) fail(ErrorKind::InvalidInput, "need m <= n");
  require_shape(linear, m, n, "linear term");
  if (!anchor.allFinite() || !linear.allFinite()) fail(ErrorKind::InvalidInput, "non-finite coefficients");

  QuadraticObjective h;
  h.mode_ = ObjectiveMode::EntrywiseWeighted;
  h.m_ = m;
  h.n_ = n;
  h.offdiag_ = offdiag_weight;
  h.diag_ = diag_weight;
  h.anchor_ = anchor;
  h.linear_ = linear;
  if (rankone_numerator.size() != 0) {
    require_shape(rankone_numerator, m, n, "rank-one numerator");
    if (!rankone_numerator.allFinite() || !std::isfinite(rankone_denominator))
      fail(ErrorKind::InvalidInput, "non-finite rank-one term");
    if (!(rankone_denominator > 0.0)) fail(ErrorKind::NotInClass, "rank-one denominator must be positive");
    h.has_rankone_ = true;
    h.numerator_ = rankone_numerator;
    h.denominator_ = rankone_denominator;
  }
  return h;
}

QuadraticObjective QuadraticObjective::general_psd(const Mat& eigenbasis, const Vec& eigenvalues, const Mat& linear,
                                                   double constant) {
  const Eigen::Index m = linear.rows(), n = linear.cols();
  if (m == 0 || m > n) fail(ErrorKind::InvalidInput, "need 1 <= m <= n");
  const Eigen::Index k = m * n;
  require_shape(eigenbasis, k, k, "eigenbasis");
  if (eigenvalues.size() != k) fail(ErrorKind::InvalidInput, "eigenvalue count must be mn");
  if (!eigenbasis.allFinite() || !eigenvalues.allFinite() || !linear.allFinite() || !std::isfinite(constant))
    fail(ErrorKind::InvalidInput, "non-finite coefficients");
  if (!is_orthogonal(eigenbasis, 1e-8)) fail(ErrorKind::InvalidInput, "eigenbasis is not orthogonal");
  if (!(eigenvalues.minCoeff() > 0.0)) fail(ErrorKind::InvalidInput, "eigenvalues must be positive");

  QuadraticObjective h;
  h.mode_ = ObjectiveMode::GeneralPsd;
  h.m_ = m;
  h.n_ = n;
  h.eigenbasis_ = eigenbasis;
  h.eigenvalues_ = eigenvalues;
  h.linear_ = linear;
  h.constant_ = constant;
  h.hessian_ = eigenbasis * eigenvalues.asDiagonal() * eigenbasis.transpose();
  h.hessian_ = 0.5 * (h.hessian_ + h.hessian_.transpose()).eval();
  return h;
}

double QuadraticObjective::value(const Mat& X) const {
  require_shape(X, m_, n_, "argument");
  if (mode_ == ObjectiveMode::GeneralPsd) {
    const Vec x = vec_rowmajor(X);
    return 0.5 * x.dot(hessian_ * x) + linear_.cwiseProduct(X).sum() + constant_;
  }
  double off = 0.0, diag = 0.0;
  for (Eigen::Index i = 0; i < m_; ++i)
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (i == j) {
        const double t = X(i, i) - anchor_(i, i);
        diag += t * t;
      } else {
        off += X(i, j) * X(i, j);
      }
    }
  double out = 0.5 * offdiag_ * off + 0.5 * diag_ * diag + linear_.cwiseProduct(X).sum();
  if (has_rankone_) {
    const double t = (X - anchor_).cwiseProduct(numerator_).sum();
    out += t * t / denominator_;
  }
  return out;
}

Mat QuadraticObjective::gradient(const Mat& X) const {
  require_shape(X, m_, n_, "argument");
  if (mode_ == ObjectiveMode::GeneralPsd) return unvec_rowmajor(hessian_ * vec_rowmajor(X), m_, n_) + linear_;
  Mat G = offdiag_ * X;
  for (Eigen::Index i = 0; i < m_; ++i) G(i, i) = diag_ * (X(i, i) - anchor_(i, i));
  G += linear_;
  if (has_rankone_) G += (2.0 * (X - anchor_).cwiseProduct(numerator_).sum() / denominator_) * numerator_;
  return G;
}

Mat QuadraticObjective::hess_apply(const Mat& Y) const {
  require_shape(Y, m_, n_, "direction");
  if (mode_ == ObjectiveMode::GeneralPsd) return unvec_rowmajor(hessian_ * vec_rowmajor(Y), m_, n_);
  Mat out = offdiag_ * Y;
  for (Eigen::Index i = 0; i < m_; ++i) out(i, i) = diag_ * Y(i, i);
  if (has_rankone_) out += (2.0 * Y.cwiseProduct(numerator_).sum() / denominator_) * numerator_;
  return out;
}

double QuadraticObjective::hess_quadform(const Mat& Y) const {
  require_shape(Y, m_, n_, "direction");
  if (mode_ == ObjectiveMode::GeneralPsd) {
    const Vec y = vec_rowmajor(Y);
    return y.dot(hessian_ * y);
  }
  double off = 0.0, diag = 0.0;
  for (Eigen::Index i = 0; i < m_; ++i)
    for (Eigen::Index j = 0; j < n_; ++j) (i == j ? diag : off) += Y(i, j) * Y(i, j);
  double out = offdiag_ * off + diag_ * diag;
  if (has_rankone_) {
    const double t = Y.cwiseProduct(numerator_).sum();
    out += 2.0 * t * t / denominator_;
  }
  return out;
}

Mat QuadraticObjective::hessian_matrix() const {
  if (mode_ == ObjectiveMode::GeneralPsd) return hessian_;
  const Eigen::Index k = m_ * n_;
  Mat H = Mat::Zero(k, k);
  for (Eigen::Index i = 0; i < m_; ++i)
    for (Eigen::Index j = 0; j < n_; ++j) H(i * n_ + j, i * n_ + j) = (i == j) ? diag_ : offdiag_;
  if (has_rankone_) {
    const Vec nv = vec_rowmajor(numerator_);
    H += (2.0 / denominator_) * nv * nv.transpose();
  }
  return H;
}

CertifiedBounds QuadraticObjective::certified_bounds() const {
  CertifiedBounds b;
  if (mode_ == ObjectiveMode::GeneralPsd) {
    b.mu = eigenvalues_.minCoeff();
    b.L = eigenvalues_.maxCoeff();
    return b;
  }
  const bool has_offdiag = m_ * n_ > std::min(m_, n_);
  b.mu = has_offdiag ? std::min(offdiag_, diag_) : diag_;
  const double base_hi = has_offdiag ? std::max(offdiag_, diag_) : diag_;
  if (!has_rankone_) {
    b.L = base_hi;
  } else {
    if (!(denominator_ > 0.0)) fail(ErrorKind::NotInClass, "rank-one denominator must be positive");
    // <Y, N>^2 <= |N|^2 |Y restricted to supp N|^2 by Cauchy-Schwarz
    const double spike = 2.0 * numerator_.squaredNorm() / denominator_;
    if (diagonal_support(numerator_))
      b.L = has_offdiag ? std::max(offdiag_, diag_ + spike) : diag_ + spike;
    else
      b.L = base_hi + spike;
  }
  if (!(b.mu > 0.0)) fail(ErrorKind::NotInClass, "no positive strong convexity modulus");
  return b;
}

QuadraticObjective restrict_to_block(const QuadraticObjective& h, const Mat& Uframe, const Mat& Vframe,
                                     Eigen::Index k) {
  const Eigen::Index m = h.rows(), n = h.cols();
  require_shape(Uframe, m, m, "Uframe");
  require_shape(Vframe, n, n, "Vframe");
  if (!is_orthogonal(Uframe, 1e-8) || !is_orthogonal(Vframe, 1e-8))
    fail(ErrorKind::InvalidFrame, "frames must be orthogonal");
  if (k < 1 || k > m) fail(ErrorKind::InvalidInput, "block size out of range");
  // columns of T are vec(u_a v_b^T); T is an isometry onto the block
  Mat T(m * n, k * k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      T.col(a * k + b) = vec_rowmajor(Uframe.col(a) * Vframe.col(b).transpose());
  const Mat zero = Mat::Zero(m, n);
  Mat Hk = T.transpose() * h.hessian_matrix() * T;
  Hk = 0.5 * (Hk + Hk.transpose()).eval();
  const Vec lin = T.transpose() * vec_rowmajor(h.gradient(zero));
  Eigen::SelfAdjointEigenSolver<Mat> es(Hk);
  return QuadraticObjective::general_psd(es.eigenvectors(), es.eigenvalues(), unvec_rowmajor(lin, k, k),
                                         h.value(zero));
}

double nuclear_norm(const Mat& X) { return norms(X).nuclear; }

double eval_f(const QuadraticObjective& h, double lambda, const Mat& X) {
  return h.value(X) + lambda * nuclear_norm(X);
}

namespace {

void require_pair(const QuadraticObjective& h, const FactorPair& p) {
  if (p.U.rows() != h.rows() || p.V.rows() != h.cols() || p.U.cols() != p.V.cols() || p.U.cols() < 1)
    fail(ErrorKind::InvalidInput, "factor pair shape does not match the objective");
  if (!p.U.allFinite() || !p.V.allFinite()) fail(ErrorKind::InvalidInput, "factor pair has non-finite entries");
}

}  // namespace

double eval_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p) {
  require_pair(h, p);
  return h.value(p.U * p.V.transpose()) + 0.5 * lambda * (p.U.squaredNorm() + p.V.squaredNorm());
}

FactorPair grad_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p) {
  require_pair(h, p);
  const Mat G = h.gradient(p.U * p.V.transpose());
  return {G * p.V + lambda * p.U, G.transpose() * p.U + lambda * p.V};
}

double grad_norm(const FactorPair& g) { return std::sqrt(g.U.squaredNorm() + g.V.squaredNorm()); }

double hess_quadform_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p, const FactorPair& dir) {
  require_pair(h, p);
  if (dir.U.rows() != p.U.rows() || dir.U.cols() != p.U.cols() || dir.V.rows() != p.V.rows() ||
      dir.V.cols() != p.V.cols())
    fail(ErrorKind::InvalidInput, "direction shape does not match the pair");
  const Mat G = h.gradient(p.U * p.V.transpose());
  const Mat dX = dir.U * p.V.transpose() + p.U * dir.V.transpose();
  return h.hess_quadform(dX) + 2.0 * G.cwiseProduct(dir.U * dir.V.transpose()).sum() +
         lambda * (dir.U.squaredNorm() + dir.V.squaredNorm());
}

FactorPair hess_apply_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p, const FactorPair& dir) {
  require_pair(h, p);
  const Mat G = h.gradient(p.U * p.V.transpose());
  const Mat D = h.hess_apply(dir.U * p.V.transpose() + p.U * dir.V.transpose());
  return {D * p.V + G * dir.V + lambda * dir.U, D.transpose() * p.U + G.transpose() * dir.U + lambda * dir.V};
}

Vec flatten(const FactorPair& p) {
  Vec out(p.U.size() + p.V.size());
  out << vec_rowmajor(p.U), vec_rowmajor(p.V);
  return out;
}

FactorPair unflatten(const Vec& v, Eigen::Index m, Eigen::Index n, Eigen::Index r) {
  if (v.size() != (m + n) * r) fail(ErrorKind::InvalidInput, "flat vector length does not match shape");
  return {unvec_rowmajor(v.head(m * r), m, r), unvec_rowmajor(v.tail(n * r), n, r)};
}

Mat hess_matrix_Fr(const QuadraticObjective& h, double lambda, const FactorPair& p) {
  require_pair(h, p);
  const Eigen::Index m = p.U.rows(), n = p.V.rows(), r = p.U.cols();
  const Eigen::Index N = (m + n) * r;
  if (N > kDenseHessianLimit) fail(ErrorKind::TooLarge, "dense Hessian dimension exceeds limit");
  const Mat X = p.U * p.V.transpose();
  const Mat G = h.gradient(X);
  Mat H(N, N);
  FactorPair e{Mat::Zero(m, r), Mat::Zero(n, r)};
  for (Eigen::Index k = 0; k < N; ++k) {
    Mat& block = k < m * r ? e.U : e.V;
    const Eigen::Index kk = k < m * r ? k : k - m * r;
    block(kk / r, kk % r) = 1.0;
    const Mat D = h.hess_apply(e.U * p.V.transpose() + p.U * e.V.transpose());
    const FactorPair col{D * p.V + G * e.V + lambda * e.U, D.transpose() * p.U + G.transpose() * e.U + lambda * e.V};
    H.col(k) = flatten(col);
    block(kk / r, kk % r) = 0.0;
  }
  return 0.5 * (H + H.transpose());
}

FactorPair random_pair(Eigen::Index m, Eigen::Index n, Eigen::Index r, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  FactorPair p{Mat(m, r), Mat(n, r)};
  for (Eigen::Index i = 0; i < p.U.size(); ++i) p.U.data()[i] = gauss(rng);
  for (Eigen::Index i = 0; i < p.V.size(); ++i) p.V.data()[i] = gauss(rng);
  return p;
}

}  // namespace bmf
