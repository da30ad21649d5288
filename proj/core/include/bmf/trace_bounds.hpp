#pragma once

#include <vector>

#include "bmf/decomposition.hpp"
#include "bmf/linalg.hpp"

namespace bmf {

// Greedy completion of a nonnegative square matrix with row and column sums
// at most 1 into a doubly stochastic matrix dominating it entrywise.
Mat complete_to_doubly_stochastic(const Mat& A);

struct Assignment {
  std::vector<int> perm;  // row i is paired with column perm[i]
  double value = 0.0;
};

// max over permutations tau of sum_i a_i b_tau(i) + c_i d_tau(i); O(m^3).
Assignment max_permutation_pairing(const Vec& a, const Vec& b, const Vec& c, const Vec& d);

double pairing_value(const std::vector<int>& perm, const Vec& a, const Vec& b, const Vec& c, const Vec& d);

// R = E^T and P = blockdiag(E, I_{n-m}) where E(i, perm[i]) = 1.
struct OrthogonalPair {
  Mat R;
  Mat P;
};
OrthogonalPair witness_orthogonal_pair(const std::vector<int>& perm, Eigen::Index m, Eigen::Index n);

// tr(R [A 0] P [B; 0]) + tr(R [C 0] P [D; 0]) for m x m blocks A..D.
double lhs_trace_form(const Mat& R, const Mat& P, const Mat& A, const Mat& B, const Mat& C, const Mat& D);

// Pairing gap between two pseudo-stationary certificates. Nonnegative
// whenever the two points are pseudo-stationary for the same (h, lambda).
double pseudo_stationary_gap(const Vec& sigma1, const Vec& d1, const Vec& sigma2, const Vec& d2, double L,
                             double mu);
double pseudo_stationary_gap(const StationaryDecomposition& cert1, const StationaryDecomposition& cert2, double L,
                             double mu);

bool is_permutation(const std::vector<int>& perm);

}  // namespace bmf
