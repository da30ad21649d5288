#pragma once

// Instance builders shared by the unit and acceptance tests.

#include <algorithm>
#include <functional>

#include "bmf/linalg.hpp"
#include "bmf/objective.hpp"
#include "oracles.hpp"

namespace fixtures {

using bmf::FactorPair;
using bmf::Mat;
using bmf::QuadraticObjective;
using bmf::Vec;
using bmf::tilde_diag_embed;

// A stationary pair built from chosen frames: U = R diag~(sqrt s) Q^T,
// V = P diag~(sqrt s) Q^T and a quadratic h (|X|^2/2 + <C, X> when
// kappa = 1, spectrum in [1, kappa] otherwise) with
// -grad h(UV^T) = R diag~(d) P^T, d_1..d_s = lambda.
struct Planted {
  QuadraticObjective h;
  FactorPair pair;
  Vec sigma, d;
  Mat R, P;
  int s;
};

inline Planted plant(ref::Gen& g, int m, int n, int r, int s, double lam, bool degenerate,
                     double trailing_max = 3.0, double kappa = 1.0) {
  Planted out;
  out.R = g.orthogonal(m);
  out.P = g.orthogonal(n);
  const Mat Q = g.orthogonal(r);
  out.sigma = Vec::Zero(m);
  for (int i = 0; i < s; ++i) out.sigma(i) = degenerate ? 1.5 : g.uniform(0.5, 3.0);
  std::sort(out.sigma.data(), out.sigma.data() + s, std::greater<double>());
  out.d = Vec::Zero(m);
  for (int i = 0; i < m; ++i) out.d(i) = i < s ? lam : (degenerate ? 0.5 * lam : g.uniform(0.0, trailing_max * lam));
  Mat Sr = Mat::Zero(m, r);
  for (int i = 0; i < std::min(m, r); ++i) Sr(i, i) = std::sqrt(out.sigma(i));
  Mat Snr = Mat::Zero(n, r);
  Snr.topRows(m) = Sr;
  out.pair = {out.R * Sr * Q.transpose(), out.P * Snr * Q.transpose()};
  const Mat X = out.pair.U * out.pair.V.transpose();
  const Mat minus_grad = out.R * tilde_diag_embed(out.d, m, n) * out.P.transpose();
  if (kappa == 1.0) {
    out.h = QuadraticObjective::entrywise(1.0, 1.0, Mat::Zero(m, n), -minus_grad - X);
  } else {
    // general loss with spectrum in [1, kappa]
    const Eigen::Index k = static_cast<Eigen::Index>(m) * n;
    const Mat B = g.orthogonal(k);
    Vec ev(k);
    for (Eigen::Index i = 0; i < k; ++i) ev(i) = g.uniform(1.0, kappa);
    const Mat H = B * ev.asDiagonal() * B.transpose();
    const Mat HX = bmf::unvec_rowmajor(H * bmf::vec_rowmajor(X), m, n);
    out.h = QuadraticObjective::general_psd(B, ev, -minus_grad - HX);
  }
  out.s = s;
  return out;
}

}  // namespace fixtures
