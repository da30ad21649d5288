#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace bmf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// X = R * tilde_diag_embed(sigma) * P^T with R (m x m), P (n x n) orthogonal
// and sigma (min(m, n)) sorted descending.
struct FullSvd {
  Mat R;
  Vec sigma;
  Mat P;
};

struct BlockSvd {
  Mat U;
  Mat V;
  Mat B1;  // U^T B V
};

struct MatrixNorms {
  double nuclear = 0.0;
  double spectral = 0.0;
  double frobenius = 0.0;
};

constexpr double kRankRelTol = 1e-9;
constexpr double kRankAbsTol = 1e-12;

FullSvd full_svd(const Mat& X);

// m x n matrix carrying x on its leading diagonal. x.size() must be min(m, n).
Mat tilde_diag_embed(const Vec& x, Eigen::Index m, Eigen::Index n);
Vec tilde_diag(const Mat& X);

// Haar-distributed k x k orthogonal matrix from a seeded Gaussian QR.
Mat random_orthogonal(Eigen::Index k, std::uint64_t seed);

// Common frames with U^T A V = tilde_diag_embed(sigma(A)) and U^T B V
// block diagonal with a leading k x k block. Requires rank A + rank B <= k.
BlockSvd simultaneous_block_svd(const Mat& A, const Mat& B, Eigen::Index k);

MatrixNorms norms(const Mat& X);

// Count of sigma_i > max(kRankRelTol * sigma_1, kRankAbsTol).
Eigen::Index numerical_rank(const Vec& sigma);
Eigen::Index numerical_rank(const Mat& X);

Vec symmetric_eigenvalues(const Mat& S);

// Lifts sigma of length k into a vector of length len padded with zeros.
Vec pad(const Vec& v, Eigen::Index len);

bool is_orthogonal(const Mat& Q, double tol = 1e-10);

}  // namespace bmf
