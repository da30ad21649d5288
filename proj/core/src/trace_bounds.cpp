#include "bmf/trace_bounds.hpp"

#include <algorithm>
#include <limits>

#include "bmf/error.hpp"

namespace bmf {

namespace {

constexpr double kSumSlack = 1e-12;

void require_pairing_inputs(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
  const Eigen::Index m = a.size();
  if (m == 0 || b.size() != m || c.size() != m || d.size() != m)
    fail(ErrorKind::InvalidInput, "pairing vectors must share a positive length");
  for (const Vec* v : {&a, &b, &c, &d}) {
    if (!v->allFinite()) fail(ErrorKind::InvalidInput, "pairing vectors must be finite");
    if ((v->array() < 0.0).any()) fail(ErrorKind::InvalidInput, "pairing vectors must be nonnegative");
  }
}

// Shortest augmenting path Hungarian method, minimising cost; 1-based
// potentials as in the classic e-maxx formulation.
std::vector<int> hungarian_min(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(n, 0);
  for (int j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

}  // namespace

bool is_permutation(const std::vector<int>& perm) {
  std::vector<char> seen(perm.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(perm.size()) || seen[p]) return false;
    seen[p] = 1;
  }
  return true;
}

Mat complete_to_doubly_stochastic(const Mat& A) {
  if (A.rows() != A.cols() || A.rows() == 0) fail(ErrorKind::InvalidInput, "completion needs a square matrix");
  if (!A.allFinite()) fail(ErrorKind::InvalidInput, "completion input must be finite");
  if ((A.array() < 0.0).any()) fail(ErrorKind::InfeasibleInput, "negative entry");
  const Eigen::Index m = A.rows();
  Vec row_def = Vec::Ones(m) - A.rowwise().sum();
  Vec col_def = Vec::Ones(m) - A.colwise().sum().transpose();
  if ((row_def.array() < -kSumSlack).any() || (col_def.array() < -kSumSlack).any())
    fail(ErrorKind::InfeasibleInput, "row or column sum exceeds 1");
  row_def = row_def.cwiseMax(0.0);
  col_def = col_def.cwiseMax(0.0);

  Mat out = A;
  Eigen::Index i = 0, j = 0;
  // smallest under-full row meets smallest under-full column; each step
  // saturates one of them, so at most 2m steps
  while (true) {
    while (i < m && row_def(i) <= 0.0) ++i;
    while (j < m && col_def(j) <= 0.0) ++j;
    if (i == m || j == m) break;
    const double delta = std::min(row_def(i), col_def(j));
    out(i, j) += delta;
    if (row_def(i) <= col_def(j)) {
      col_def(j) -= delta;
      row_def(i) = 0.0;
    } else {
      row_def(i) -= delta;
      col_def(j) = 0.0;
    }
  }
  return out;
}

double pairing_value(const std::vector<int>& perm, const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    total += a(ii) * b(perm[i]) + c(ii) * d(perm[i]);
  }
  return total;
}

Assignment max_permutation_pairing(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
  require_pairing_inputs(a, b, c, d);
  const Mat gain = a * b.transpose() + c * d.transpose();
  Assignment out;
  out.perm = hungarian_min(-gain);
  out.value = pairing_value(out.perm, a, b, c, d);
  return out;
}

OrthogonalPair witness_orthogonal_pair(const std::vector<int>& perm, Eigen::Index m, Eigen::Index n) {
  if (static_cast<Eigen::Index>(perm.size()) != m || !is_permutation(perm))
    fail(ErrorKind::InvalidInput, "not a permutation of [m]");
  if (n < m) fail(ErrorKind::InvalidInput, "need m <= n");
  Mat E = Mat::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) E(i, perm[static_cast<std::size_t>(i)]) = 1.0;
  OrthogonalPair out;
  out.R = E.transpose();
  out.P = Mat::Identity(n, n);
  out.P.topLeftCorner(m, m) = E;
  return out;
}

double lhs_trace_form(const Mat& R, const Mat& P, const Mat& A, const Mat& B, const Mat& C, const Mat& D) {
  const Eigen::Index m = R.rows();
  if (R.cols() != m || P.rows() != P.cols() || P.rows() < m)
    fail(ErrorKind::InvalidInput, "R must be m x m and P n x n with n >= m");
  for (const Mat* X : {&A, &B, &C, &D})
    if (X->rows() != m || X->cols() != m) fail(ErrorKind::InvalidInput, "blocks must be m x m");
  // [A 0] P [B; 0] only touches the leading m x m block of P
  const Mat P11 = P.topLeftCorner(m, m);
  return (R * A * P11 * B).trace() + (R * C * P11 * D).trace();
}

double pseudo_stationary_gap(const Vec& sigma1, const Vec& d1, const Vec& sigma2, const Vec& d2, double L,
                             double mu) {
  const Eigen::Index m = sigma1.size();
  if (d1.size() != m || sigma2.size() != m || d2.size() != m)
    fail(ErrorKind::InvalidInput, "certificates must share a length");
  const Vec a = L * sigma1 + d1;
  const Vec b = mu * sigma2 + d2;
  const Vec c = mu * sigma1 + d1;
  const Vec d = L * sigma2 + d2;
  const Assignment best = max_permutation_pairing(a, b, c, d);
  return best.value - c.dot(a) - b.dot(d);
}

double pseudo_stationary_gap(const StationaryDecomposition& cert1, const StationaryDecomposition& cert2, double L,
                             double mu) {
  return pseudo_stationary_gap(cert1.sigma, cert1.d, cert2.sigma, cert2.d, L, mu);
}

}  // namespace bmf
