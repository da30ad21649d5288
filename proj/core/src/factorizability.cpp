#include "bmf/factorizability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bmf/error.hpp"
#include "bmf/trace_bounds.hpp"

namespace bmf {

bool kappa_is_three(double kappa) { return std::abs(kappa - 3.0) <= kKappaTieRelTol * 3.0; }

namespace {

std::optional<double> alpha_of(const RegimeParams& p) {
  const double kappa = p.kappa();
  if (kappa == 1.0 || kappa_is_three(kappa)) return std::nullopt;
  const double km1 = kappa - 1.0;
  return (p.r - p.r_star) / (1.0 - 4.0 / (km1 * km1)) + 0.0;
}

Verdict global(const RegimeParams& p, const char* reason) {
  Verdict v;
  v.factorizable = true;
  v.scenario = Scenario::S1;
  v.alpha = alpha_of(p);
  v.reason = reason;
  return v;
}

Verdict spurious(const RegimeParams& p, int d, const char* reason) {
  Verdict v;
  v.factorizable = false;
  v.scenario = Scenario::S2;
  v.witness = ReducedWitness{d, 1.0};
  v.alpha = alpha_of(p);
  v.reason = reason;
  return v;
}

}  // namespace

Verdict oracle(const RegimeParams& p) {
  validate(p);
  const int m = p.m, r = p.r, rs = p.r_star;
  if (r == m) return global(p, "r=m");
  if (r < rs) return spurious(p, 0, "r<r*");
  const double kappa = p.kappa();
  const double coef = kappa_is_three(kappa) ? 1.0 : (kappa - 1.0) * (kappa - 1.0) / 4.0;
  const int lhs = std::min(r, m - rs);
  const int rhs = std::min(rs, m - r);
  if (lhs > coef * rhs) return global(p, "threshold");
  return spurious(p, lhs, "threshold-violated");
}

int d_min(const RegimeParams& p) { return std::max(0, p.r - p.r_star); }
int d_max(const RegimeParams& p) { return std::min(p.r, p.m - p.r_star); }

double reduced_qp_value(int d, double w, const RegimeParams& p) {
  validate(p);
  if (d < d_min(p) || d > d_max(p)) fail(ErrorKind::InfeasibleD, "d outside [max(0, r - r*), min{r, m - r*}]");
  if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidInput, "w must be positive");
  const double L = p.L, mu = p.mu;
  return (-L * mu * d + (p.r_star - p.r + d) * L * (L - mu) * (L - mu) / (4.0 * mu)) * w * w;
}

Verdict solve_reduced_qp(const RegimeParams& p) {
  validate(p);
  const int m = p.m, r = p.r, rs = p.r_star;
  if (r == m) return global(p, "r=m");
  if (rs == 0) return global(p, "r*=0");

  Verdict v;
  if (r < rs) {
    // d = 0 leaves r* - r > 0 indices in J3 and nothing in J2
    v = spurious(p, 0, "r<r*");
  } else {
    const double kappa = p.kappa();
    const int top = std::min(r, m - rs);
    if (kappa == 1.0) return global(p, "kappa=1");
    if (kappa_is_three(kappa)) {
      if (r > rs) return global(p, "kappa=3,r>r*");
      v = spurious(p, top, "kappa=3,r=r*");
    } else if (kappa < 3.0) {
      return global(p, "kappa<3");
    } else {
      const double alpha = *alpha_of(p);
      if (alpha > top) return global(p, "alpha>min");
      v = spurious(p, top, "alpha<=min");
    }
  }

  // self-check of the chosen witness; a failure here is a bug, not an input error
  const int d = v.witness->d;
  const double H = reduced_qp_value(d, 1.0, p);
  const double scale = p.L * p.mu * std::max(1, d) + p.L * (p.L - p.mu) * (p.L - p.mu) / p.mu * m;
  if (rs - r + d <= 0 || H < -1e-12 * scale)
    fail(ErrorKind::Internal, "reduced witness does not certify S2 (case " + v.reason + ")");
  return v;
}

SubproblemSolution subproblem_optimum(Subproblem which, const RegimeParams& p, double w) {
  validate(p);
  if (!(w > 0.0)) fail(ErrorKind::InvalidInput, "w must be positive");
  const double L = p.L, mu = p.mu;
  SubproblemSolution s;
  switch (which) {
    case Subproblem::J1:
      s.value = 0.0;
      s.argmax = {w, 1.0, w, 1.0, "x = y, any value >= w"};
      break;
    case Subproblem::J2:
      s.value = -L * mu * w * w;
      s.argmax = {w, 1.0, 0.0, 1.0, "x = w, v = 1"};
      break;
    case Subproblem::J3:
      s.value = L * (L - mu) * (L - mu) * w * w / (4.0 * mu);
      if (L == mu)
        s.argmax = {0.0, 1.0 + L * w, (L + mu) * L * w / (2.0 * L * mu), 1.0,
                    "g in (1, 1 + L w], y = (L + mu)(g - 1) / (2 L mu)"};
      else
        s.argmax = {0.0, 1.0 + L * w, (L + mu) * w / (2.0 * mu), 1.0, "g = 1 + L w, y = (L + mu) w / (2 mu)"};
      break;
    case Subproblem::J4:
      s.value = 0.0;
      s.argmax = {0.0, 0.0, 0.0, 0.0, "g = v, any value in [0, 1]"};
      break;
  }
  return s;
}

IndexSets index_sets(const std::vector<int>& tau, int r, int r_star) {
  IndexSets s;
  for (int i = 0; i < static_cast<int>(tau.size()); ++i) {
    const bool in_r = i < r, hits = tau[static_cast<std::size_t>(i)] < r_star;
    (in_r ? (hits ? s.J1 : s.J2) : (hits ? s.J3 : s.J4)).push_back(i);
  }
  return s;
}

std::vector<int> lexicographic_tau(int m, int r, int r_star, int d) {
  // remaining slots in J1..J4
  int left[4] = {r - d, d, r_star - r + d, m - r_star - d};
  for (int c : left)
    if (c < 0) fail(ErrorKind::InfeasibleD, "d incompatible with (m, r, r*)");
  std::vector<int> tau(static_cast<std::size_t>(m), -1);
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    for (int val = 0; val < m; ++val) {
      if (used[static_cast<std::size_t>(val)]) continue;
      const int cls = (i < r ? 0 : 2) + (val < r_star ? 0 : 1);
      if (left[cls] == 0) continue;
      --left[cls];
      used[static_cast<std::size_t>(val)] = 1;
      tau[static_cast<std::size_t>(i)] = val;
      break;
    }
  }
  return tau;
}

QpWitness build_witness(int d, double w, const RegimeParams& p) {
  validate(p);
  if (d < d_min(p) || d > d_max(p)) fail(ErrorKind::InfeasibleD, "d outside its feasible range");
  if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidInput, "w must be positive");
  const int m = p.m;
  const double lam = p.lambda, L = p.L, mu = p.mu;
  QpWitness wit;
  wit.tau = lexicographic_tau(m, p.r, p.r_star, d);
  wit.sets = index_sets(wit.tau, p.r, p.r_star);
  wit.w = lam * w;
  wit.x = wit.g = wit.y = wit.v = Vec::Zero(m);
  for (int i : wit.sets.J1) {
    const int t = wit.tau[static_cast<std::size_t>(i)];
    wit.x(i) = lam * w;
    wit.g(i) = lam;
    wit.y(t) = lam * w;
    wit.v(t) = lam;
  }
  for (int i : wit.sets.J2) {
    const int t = wit.tau[static_cast<std::size_t>(i)];
    wit.x(i) = lam * w;
    wit.g(i) = lam;
    wit.v(t) = lam;
  }
  for (int i : wit.sets.J3) {
    const int t = wit.tau[static_cast<std::size_t>(i)];
    wit.g(i) = lam * (1.0 + L * w);
    wit.y(t) = lam * (L + mu) * w / (2.0 * mu);
    wit.v(t) = lam;
  }
  // J4 stays at zero
  return wit;
}

bool qp_feasible(const QpWitness& wit, const RegimeParams& p, std::string* why) {
  auto bad = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  const int m = p.m, r = p.r, rs = p.r_star;
  const double lam = p.lambda, eps = 1e-12;
  if (wit.x.size() != m || wit.g.size() != m || wit.y.size() != m || wit.v.size() != m)
    return bad("sequence length differs from m");
  if (static_cast<int>(wit.tau.size()) != m || !is_permutation(wit.tau)) return bad("tau is not a permutation");
  if (!(wit.w > 0.0)) return bad("w must be positive");
  double xmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < r; ++i) {
    if (!(wit.x(i) >= wit.w * (1.0 - eps))) return bad("x_i < w on [r]");
    if (std::abs(wit.g(i) - lam) > eps * lam) return bad("g_i != lambda on [r]");
    xmin = std::min(xmin, wit.x(i));
  }
  const double gcap = lam + p.L * xmin;
  for (int i = r; i < m; ++i) {
    if (wit.x(i) != 0.0) return bad("x_i != 0 off [r]");
    if (wit.g(i) < 0.0 || wit.g(i) > gcap * (1.0 + eps)) return bad("g_i outside [0, lambda + L min x]");
  }
  for (int j = 0; j < rs; ++j) {
    if (!(wit.y(j) > 0.0)) return bad("y_j <= 0 on [r*]");
    if (std::abs(wit.v(j) - lam) > eps * lam) return bad("v_j != lambda on [r*]");
  }
  for (int j = rs; j < m; ++j) {
    if (wit.y(j) != 0.0) return bad("y_j != 0 off [r*]");
    if (wit.v(j) < 0.0 || wit.v(j) > lam * (1.0 + eps)) return bad("v_j outside [0, lambda]");
  }
  return true;
}

double qp_objective(const QpWitness& wit, const RegimeParams& p) {
  validate(p);
  std::string why;
  if (!qp_feasible(wit, p, &why)) fail(ErrorKind::Infeasible, why);
  const double L = p.L, mu = p.mu;
  double total = 0.0;
  for (int i = 0; i < p.m; ++i) {
    const int t = wit.tau[static_cast<std::size_t>(i)];
    const double lx = L * wit.x(i) + wit.g(i), mx = mu * wit.x(i) + wit.g(i);
    total += lx * (mu * wit.y(t) + wit.v(t)) + mx * (L * wit.y(t) + wit.v(t)) - lx * mx -
             (L * wit.y(i) + wit.v(i)) * (mu * wit.y(i) + wit.v(i));
  }
  return total;
}

QpWitness sort_and_permute(const QpWitness& wit, const RegimeParams& p) {
  std::string why;
  if (!qp_feasible(wit, p, &why)) fail(ErrorKind::Infeasible, why);
  const int m = p.m;
  auto descending = [m](const Vec& z) {
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return z(a) > z(b); });
    return idx;
  };
  const std::vector<int> t1 = descending(wit.x), t2 = descending(wit.y);
  std::vector<int> t2inv(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) t2inv[static_cast<std::size_t>(t2[static_cast<std::size_t>(i)])] = i;

  QpWitness out;
  out.w = wit.w;
  out.x = out.g = out.y = out.v = Vec::Zero(m);
  out.tau.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    out.x(i) = wit.x(t1[ui]);
    out.g(i) = wit.g(t1[ui]);
    out.y(i) = wit.y(t2[ui]);
    out.v(i) = wit.v(t2[ui]);
    out.tau[ui] = t2inv[static_cast<std::size_t>(wit.tau[static_cast<std::size_t>(t1[ui])])];
  }
  out.sets = index_sets(out.tau, p.r, p.r_star);
  return out;
}

namespace {

std::vector<double> linspace(double lo, double hi, int k) {
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (k - 1);
  out.back() = hi;
  return out;
}

struct IndexBest {
  double value = -std::numeric_limits<double>::infinity();
  double x = 0, g = 0, y = 0, v = 0;
};

}  // namespace

BruteForceResult brute_force_qp(const RegimeParams& p, const GridSpec& grid) {
  validate(p);
  if (p.m > 5) fail(ErrorKind::TooLarge, "brute force is limited to m <= 5");
  if (grid.points < 2 || grid.w_values.empty()) fail(ErrorKind::InvalidInput, "grid needs >= 2 points and a w");
  for (double w : grid.w_values)
    if (!(w > 0.0)) fail(ErrorKind::InvalidInput, "grid w values must be positive");
  const int m = p.m, r = p.r, rs = p.r_star;
  const double lam = p.lambda, L = p.L, mu = p.mu, kappa = p.kappa();
  const double inf = std::numeric_limits<double>::infinity();

  auto term = [&](double x, double g, double y, double v) {
    const double lx = L * x + g, mx = mu * x + g;
    return lx * (mu * y + v) + mx * (L * y + v) - lx * mx - (L * y + v) * (mu * y + v);
  };

  BruteForceResult res;
  res.approx_sup = -inf;
  res.sup_large_g = -inf;
  std::vector<int> tau(static_cast<std::size_t>(m));
  std::iota(tau.begin(), tau.end(), 0);
  do {
    for (double wn : grid.w_values) {
      const double W = lam * wn, Y = lam * (kappa + 1.0) * wn;
      const std::vector<double> xs = linspace(W, Y, grid.points);
      const std::vector<double> ys = linspace(Y / 5.0, Y, grid.points);
      const std::vector<double> gs = linspace(0.0, lam + L * W, grid.points);
      const std::vector<double> vs = linspace(0.0, lam, grid.points);
      const std::vector<double> x_fixed{0.0}, g_fixed{lam}, y_fixed{0.0}, v_fixed{lam};

      std::vector<IndexBest> best(static_cast<std::size_t>(m)), best_large(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        const int t = tau[static_cast<std::size_t>(i)];
        const auto& X = i < r ? xs : x_fixed;
        const auto& G = i < r ? g_fixed : gs;
        const auto& Yg = t < rs ? ys : y_fixed;
        const auto& V = t < rs ? v_fixed : vs;
        IndexBest& b = best[static_cast<std::size_t>(i)];
        IndexBest& bl = best_large[static_cast<std::size_t>(i)];
        for (double x : X)
          for (double g : G)
            for (double y : Yg)
              for (double v : V) {
                const double val = term(x, g, y, v);
                if (val > b.value) b = {val, x, g, y, v};
                if (g > lam && val > bl.value) bl = {val, x, g, y, v};
              }
      }
      double total = 0.0;
      for (const IndexBest& b : best) total += b.value;
      for (int k = 0; k < m; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (best_large[uk].value == -inf) continue;
        res.sup_large_g = std::max(res.sup_large_g, total - best[uk].value + best_large[uk].value);
      }
      if (total > res.approx_sup) {
        res.approx_sup = total;
        QpWitness& wit = res.best_witness;
        wit.x = wit.g = wit.y = wit.v = Vec::Zero(m);
        wit.tau = tau;
        wit.w = W;
        for (int i = 0; i < m; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          const int t = tau[ui];
          wit.x(i) = best[ui].x;
          wit.g(i) = best[ui].g;
          wit.y(t) = best[ui].y;
          wit.v(t) = best[ui].v;
        }
        wit.sets = index_sets(tau, r, rs);
      }
    }
  } while (std::next_permutation(tau.begin(), tau.end()));
  return res;
}

std::string_view to_string(Scenario s) { return s == Scenario::S1 ? "S1" : "S2"; }

std::string_view to_string(Subproblem s) {
  switch (s) {
    case Subproblem::J1: return "J1";
    case Subproblem::J2: return "J2";
    case Subproblem::J3: return "J3";
    case Subproblem::J4: return "J4";
  }
  return "?";
}

}  // namespace bmf
