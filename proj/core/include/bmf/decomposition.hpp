#pragma once

#include "bmf/linalg.hpp"

namespace bmf {

// Frames (R, P) in the SVD orbit of X with -grad h(X) = R * diag~(d) * P^T.
// sigma and d have length m; d_1..d_s equal lambda where s = rank X.
// Q is the right factor of U = R * diag~(sigma(U)) * Q^T when the
// decomposition came from a factor pair, empty otherwise.
struct StationaryDecomposition {
  Mat R;
  Mat P;
  Mat Q;
  Vec sigma;
  Vec d;
  Eigen::Index s = 0;
  Eigen::Index r = 0;  // factor width, 0 for a plain matrix certificate
};

}  // namespace bmf
