#include <gtest/gtest.h>

#include <set>

#include "bmf/error.hpp"
#include "bmf/factorizability.hpp"
#include "oracles.hpp"

using namespace bmf;

namespace {

RegimeParams regime(int m, int r, int rs, double kappa, double lambda = 1.0) {
  return RegimeParams{m, m, r, rs, kappa, 1.0, lambda};
}

std::vector<RegimeParams> threshold_grid(int max_m) {
  std::vector<RegimeParams> out;
  for (int m = 1; m <= max_m; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs)
        for (double k : {1.0, 1.5, 2.0, 2.99, 3.0, 3.01, 4.0, 6.0, 10.0})
          for (double lam : {0.5, 1.0, 2.0}) out.push_back(regime(m, r, rs, k, lam));
  return out;
}

bool same_tau(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

}  // namespace

TEST(Oracle, Examples) {
  Verdict v = oracle(regime(5, 5, 3, 10));
  EXPECT_TRUE(v.factorizable);
  EXPECT_EQ(v.reason, "r=m");
  v = oracle(regime(3, 1, 1, 4));
  EXPECT_FALSE(v.factorizable);
  EXPECT_EQ(v.scenario, Scenario::S2);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(v.witness->d, 1);
  v = oracle(regime(3, 2, 1, 3));
  EXPECT_TRUE(v.factorizable);
  EXPECT_EQ(v.reason, "threshold");
  EXPECT_FALSE(v.witness.has_value());
  EXPECT_THROW(oracle(regime(0, 1, 0, 2)), Error);
}

TEST(Oracle, MatchesEnumerationAndReducedQp) {
  for (const RegimeParams& p : threshold_grid(6)) {
    const Verdict a = oracle(p), b = solve_reduced_qp(p);
    const bool want = ref::factorizable_by_enumeration(p.m, p.r, p.r_star, p.L, p.mu);
    ASSERT_EQ(a.factorizable, want) << p.m << " " << p.r << " " << p.r_star << " " << p.L;
    ASSERT_EQ(b.factorizable, want) << p.m << " " << p.r << " " << p.r_star << " " << p.L << " " << b.reason;
    ASSERT_EQ(a.factorizable, a.scenario == Scenario::S1);
    ASSERT_EQ(b.witness.has_value(), b.scenario == Scenario::S2);
  }
}

TEST(Oracle, LambdaInvariant) {
  for (const RegimeParams& p : threshold_grid(5)) {
    RegimeParams q = p;
    q.lambda = 1.0;
    ASSERT_EQ(solve_reduced_qp(p).factorizable, solve_reduced_qp(q).factorizable);
  }
}

TEST(Oracle, RankIdentity) {
  for (int m = 1; m <= 8; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs) ASSERT_EQ(std::min(r, m - rs) - std::min(rs, m - r), r - rs);
}

TEST(Oracle, KappaTie) {
  EXPECT_TRUE(kappa_is_three(3.0));
  EXPECT_TRUE(kappa_is_three(3.0 * (1 + 1e-13)));
  EXPECT_FALSE(kappa_is_three(3.0 * (1 + 1e-9)));
  // r = r* < m at kappa = 3 is non-factorizable even with rounding in L / mu
  RegimeParams p{3, 3, 1, 1, 0.3 * 10.0, 1.0, 1.0};
  p.L = 3.0000000000001;
  EXPECT_FALSE(oracle(p).factorizable);
  EXPECT_FALSE(solve_reduced_qp(p).factorizable);
}

TEST(ReducedQpValue, Examples) {
  EXPECT_EQ(reduced_qp_value(1, 1.0, regime(3, 1, 1, 3)), 0.0);
  EXPECT_EQ(reduced_qp_value(1, 1.0, regime(3, 1, 1, 4)), 5.0);
  EXPECT_EQ(reduced_qp_value(2, 1.5, regime(4, 2, 2, 1)), -1.0 * 2 * 2.25);
  try {
    reduced_qp_value(3, 1.0, regime(3, 1, 1, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleD);
  }
}

TEST(ReducedQpValue, MatchesDirectFormula) {
  ref::Gen g(1);
  for (int t = 0; t < 500; ++t) {
    const int m = g.integer(1, 7), r = g.integer(1, m), rs = g.integer(0, m);
    const RegimeParams p{m, m, r, rs, g.uniform(1.0, 9.0), g.uniform(0.5, 1.0), 1.0};
    for (int d = d_min(p); d <= d_max(p); ++d) {
      const double w = g.uniform(0.1, 3.0);
      ASSERT_NEAR(reduced_qp_value(d, w, p), ref::H(d, w, r, rs, p.L, p.mu), 1e-12 * (1 + p.L * p.L * m * w * w));
    }
  }
}

TEST(SolveReducedQp, Cases) {
  Verdict v = solve_reduced_qp(regime(4, 2, 1, 1));
  EXPECT_TRUE(v.factorizable);
  EXPECT_EQ(v.reason, "kappa=1");
  v = solve_reduced_qp(regime(3, 1, 1, 3));
  EXPECT_FALSE(v.factorizable);
  EXPECT_EQ(v.reason, "kappa=3,r=r*");
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(reduced_qp_value(v.witness->d, v.witness->w, regime(3, 1, 1, 3)), 0.0);
  v = solve_reduced_qp(regime(3, 1, 1, 4));
  EXPECT_FALSE(v.factorizable);
  EXPECT_EQ(v.witness->d, 1);
  EXPECT_EQ(v.witness->w, 1.0);
  EXPECT_EQ(reduced_qp_value(1, 1.0, regime(3, 1, 1, 4)), 5.0);
  v = solve_reduced_qp(regime(4, 1, 3, 2));
  EXPECT_FALSE(v.factorizable);
  EXPECT_EQ(v.reason, "r<r*");
  EXPECT_EQ(v.witness->d, 0);
  v = solve_reduced_qp(regime(4, 3, 0, 10));
  EXPECT_TRUE(v.factorizable);
  EXPECT_EQ(v.reason, "r*=0");
  v = solve_reduced_qp(regime(4, 4, 2, 10));
  EXPECT_EQ(v.reason, "r=m");
  v = solve_reduced_qp(regime(4, 2, 1, 2));
  EXPECT_EQ(v.reason, "kappa<3");
  EXPECT_TRUE(v.alpha.has_value());
  EXPECT_FALSE(solve_reduced_qp(regime(4, 2, 1, 3)).alpha.has_value());
}

TEST(SolveReducedQp, WitnessesAreValid) {
  for (const RegimeParams& p : threshold_grid(6)) {
    const Verdict v = solve_reduced_qp(p);
    if (v.factorizable) continue;
    const int d = v.witness->d;
    ASSERT_GE(d, d_min(p));
    ASSERT_LE(d, d_max(p));
    ASSERT_GT(p.r_star - p.r + d, 0);
    ASSERT_GE(reduced_qp_value(d, v.witness->w, p), -1e-12 * p.L * p.L * p.m);
  }
}

TEST(Subproblem, ClosedForms) {
  const RegimeParams p = regime(3, 1, 1, 4);
  SubproblemSolution s = subproblem_optimum(Subproblem::J2, p, 1.0);
  EXPECT_EQ(s.value, -4.0);
  EXPECT_EQ(s.argmax.x, 1.0);
  EXPECT_EQ(s.argmax.v, 1.0);
  s = subproblem_optimum(Subproblem::J3, p, 1.0);
  EXPECT_EQ(s.value, 9.0);
  EXPECT_EQ(s.argmax.g, 5.0);
  EXPECT_EQ(s.argmax.y, 2.5);
  EXPECT_EQ(subproblem_optimum(Subproblem::J1, p, 1.0).value, 0.0);
  EXPECT_EQ(subproblem_optimum(Subproblem::J4, p, 1.0).value, 0.0);
}

TEST(Subproblem, ClosedFormsBeatDenseScan) {
  // per-index objectives scanned on a fine grid never beat the closed forms
  ref::Gen g(2);
  for (int t = 0; t < 30; ++t) {
    const double mu = g.uniform(0.5, 1.5), L = mu * g.uniform(1.0, 8.0), w = g.uniform(0.3, 2.0);
    const RegimeParams p{3, 3, 1, 1, L, mu, 1.0};
    // J2: x>=w, g=1, y=0 (index outside [r*] for y), v in [0,1]
    double best2 = -1e300, best3 = -1e300;
    const int K = 200;
    const double Y = (L + 1) / mu * w * 2;
    for (int a = 0; a <= K; ++a)
      for (int b = 0; b <= K; ++b) {
        const double x = w + (Y - w) * a / K, v = 1.0 * b / K;
        best2 = std::max(best2, (L * x + 1) * v + (mu * x + 1) * v - (L * x + 1) * (mu * x + 1) - v * v);
        const double gg = 1.0 + L * w * a / K, y = Y * b / K;
        best3 = std::max(best3, gg * (mu * y + 1) + gg * (L * y + 1) - gg * gg - (mu * y + 1) * (L * y + 1));
      }
    ASSERT_LE(best2, subproblem_optimum(Subproblem::J2, p, w).value + 1e-9);
    ASSERT_LE(best3, subproblem_optimum(Subproblem::J3, p, w).value + 1e-9);
    ASSERT_NEAR(best3, subproblem_optimum(Subproblem::J3, p, w).value, 1e-2 * (1 + L * L));
  }
}

TEST(IndexSets, PartitionAndCardinalities) {
  ref::Gen g(3);
  for (int t = 0; t < 200; ++t) {
    const int m = g.integer(1, 7), r = g.integer(1, m), rs = g.integer(0, m);
    std::vector<int> tau(m);
    std::iota(tau.begin(), tau.end(), 0);
    std::shuffle(tau.begin(), tau.end(), g.engine());
    const IndexSets s = index_sets(tau, r, rs);
    std::set<int> all;
    for (const auto* J : {&s.J1, &s.J2, &s.J3, &s.J4}) all.insert(J->begin(), J->end());
    ASSERT_EQ(static_cast<int>(all.size()), m);
    ASSERT_EQ(s.J1.size() + s.J2.size() + s.J3.size() + s.J4.size(), static_cast<std::size_t>(m));
    const int d = static_cast<int>(s.J2.size());
    ASSERT_EQ(static_cast<int>(s.J1.size()), r - d);
    ASSERT_EQ(static_cast<int>(s.J3.size()), rs - r + d);
    ASSERT_EQ(static_cast<int>(s.J4.size()), m - rs - d);
  }
}

TEST(LexicographicTau, SmallestWithRequestedD) {
  for (int m = 1; m <= 6; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs) {
        const RegimeParams p = regime(m, r, rs, 2.0);
        for (int d = d_min(p); d <= d_max(p); ++d) {
          const std::vector<int> tau = lexicographic_tau(m, r, rs, d);
          ASSERT_EQ(static_cast<int>(index_sets(tau, r, rs).J2.size()), d);
          std::vector<int> p2(m);
          std::iota(p2.begin(), p2.end(), 0);
          do {
            if (static_cast<int>(index_sets(p2, r, rs).J2.size()) == d) break;
          } while (std::next_permutation(p2.begin(), p2.end()));
          ASSERT_TRUE(same_tau(tau, p2)) << m << r << rs << d;
        }
      }
}

TEST(Witness, SumDecompositionEqualsH) {
  for (int m = 1; m <= 6; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs)
        for (double k : {1.0, 2.0, 4.0})
          for (double lam : {0.5, 2.0}) {
            const RegimeParams p = regime(m, r, rs, k, lam);
            for (int d = d_min(p); d <= d_max(p); ++d) {
              const QpWitness w = build_witness(d, 1.0, p);
              std::string why;
              ASSERT_TRUE(qp_feasible(w, p, &why)) << why;
              ASSERT_NEAR(qp_objective(w, p), lam * lam * reduced_qp_value(d, 1.0, p), 1e-10 * (1 + k * k * m));
              const QpWitness s = sort_and_permute(w, p);
              ASSERT_TRUE(qp_feasible(s, p));
              ASSERT_NEAR(qp_objective(s, p), qp_objective(w, p), 1e-12 * (1 + k * k * m));
              for (int i = 1; i < m; ++i) {
                ASSERT_GE(s.x(i - 1), s.x(i));
                ASSERT_GE(s.y(i - 1), s.y(i));
              }
            }
          }
}

TEST(Witness, CanonicalAndScaling) {
  const RegimeParams p = regime(3, 1, 1, 4);
  const QpWitness w = sort_and_permute(build_witness(1, 1.0, p), p);
  EXPECT_EQ(w.x, (Vec(3) << 1, 0, 0).finished());
  EXPECT_EQ(w.g, (Vec(3) << 1, 5, 0).finished());
  EXPECT_EQ(w.y, (Vec(3) << 2.5, 0, 0).finished());
  EXPECT_EQ(w.v, (Vec(3) << 1, 1, 0).finished());
  EXPECT_EQ(w.tau, (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(qp_objective(w, p), 5.0);
  const RegimeParams p2 = regime(3, 1, 1, 4, 2.0);
  const QpWitness w2 = sort_and_permute(build_witness(1, 1.0, p2), p2);
  EXPECT_EQ(w2.x, 2 * w.x);
  EXPECT_EQ(w2.g, 2 * w.g);
  EXPECT_EQ(w2.y, 2 * w.y);
  EXPECT_EQ(w2.v, 2 * w.v);
  EXPECT_EQ(qp_objective(w2, p2), 20.0);
}

TEST(Witness, KappaThreeBoundary) {
  const RegimeParams p = regime(3, 1, 1, 3);
  const QpWitness w = build_witness(1, 1.0, p);
  EXPECT_EQ(qp_objective(w, p), 0.0);
  EXPECT_EQ(w.g.maxCoeff(), 4.0);
}

TEST(QpObjective, DegenerateAndInfeasible) {
  const RegimeParams p = regime(3, 2, 2, 4);
  QpWitness w;
  w.x = (Vec(3) << 2, 1, 0).finished();
  w.y = w.x;
  w.g = (Vec(3) << 1, 1, 0.5).finished();
  w.v = w.g;
  w.w = 1.0;
  w.tau = {0, 1, 2};
  w.sets = index_sets(w.tau, 2, 2);
  EXPECT_EQ(qp_objective(w, p), 0.0);
  QpWitness bad = w;
  bad.g(2) = 1.0 + 4.0 * 1.0 + 0.1;
  EXPECT_FALSE(qp_feasible(bad, p));
  try {
    qp_objective(bad, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
  bad = w;
  bad.x(2) = 1.0;
  EXPECT_FALSE(qp_feasible(bad, p));
}

TEST(SortAndPermute, RandomFeasibleWitnesses) {
  ref::Gen g(4);
  for (int t = 0; t < 300; ++t) {
    const int m = g.integer(1, 6), r = g.integer(1, m), rs = g.integer(0, m);
    const double L = g.uniform(1, 6), lam = g.uniform(0.5, 2);
    const RegimeParams p{m, m, r, rs, L, 1.0, lam};
    QpWitness w;
    w.w = lam * g.uniform(0.2, 1.5);
    w.x = Vec::Zero(m);
    w.g = Vec::Zero(m);
    w.y = Vec::Zero(m);
    w.v = Vec::Zero(m);
    w.tau.resize(m);
    std::iota(w.tau.begin(), w.tau.end(), 0);
    std::shuffle(w.tau.begin(), w.tau.end(), g.engine());
    for (int i = 0; i < m; ++i) {
      if (i < r) {
        w.x(i) = w.w + g.uniform(0, 2);
        w.g(i) = lam;
      } else {
        w.g(i) = g.uniform(0, lam + L * w.w);
      }
      if (i < rs) {
        w.y(i) = g.uniform(0.1, 3);
        w.v(i) = lam;
      } else {
        w.v(i) = g.uniform(0, lam);
      }
    }
    w.sets = index_sets(w.tau, r, rs);
    std::string why;
    ASSERT_TRUE(qp_feasible(w, p, &why)) << why;
    const QpWitness s = sort_and_permute(w, p);
    ASSERT_TRUE(qp_feasible(s, p));
    ASSERT_NEAR(qp_objective(s, p), qp_objective(w, p), 1e-12 * (1 + std::abs(qp_objective(w, p))));
    if (t == 0) {
      const QpWitness again = sort_and_permute(s, p);
      ASSERT_TRUE(same_tau(again.tau, s.tau));
    }
  }
}

TEST(BruteForce, Examples) {
  const RegimeParams p = regime(3, 1, 1, 4);
  GridSpec grid;
  grid.w_values = {1.0};
  const BruteForceResult b = brute_force_qp(p, grid);
  EXPECT_GE(b.approx_sup, 5.0 - 1e-9);
  EXPECT_LE(b.approx_sup, 5.0 + 1e-9);
  const BruteForceResult one = brute_force_qp(RegimeParams{1, 1, 1, 0, 3.0, 1.0, 1.0});
  EXPECT_LE(one.approx_sup, -3.0 * 0.25 + 1e-12);
  try {
    brute_force_qp(regime(6, 2, 2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
  }
}

TEST(BruteForce, BestWitnessIsFeasibleAndScored) {
  for (int m = 1; m <= 4; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs) {
        const RegimeParams p = regime(m, r, rs, 4.0, 0.5);
        const BruteForceResult b = brute_force_qp(p);
        ASSERT_TRUE(qp_feasible(b.best_witness, p));
        ASSERT_NEAR(qp_objective(b.best_witness, p), b.approx_sup, 1e-9 * (1 + std::abs(b.approx_sup)));
      }
}

TEST(BruteForce, LargeGradientPointsMatchTheVerdict) {
  // a feasible grid point with |g|_inf > lambda and nonnegative value exists
  // exactly outside the factorizable region
  for (int m = 1; m <= 4; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs)
        for (double k : {1.0, 2.0, 3.0, 4.0, 6.0, 10.0})
          for (double lam : {0.5, 1.0, 2.0}) {
            const RegimeParams p = regime(m, r, rs, k, lam);
            const BruteForceResult b = brute_force_qp(p);
            if (oracle(p).factorizable)
              ASSERT_LT(b.sup_large_g, 0.0) << m << r << rs << " k=" << k;
            else
              ASSERT_GE(b.sup_large_g, -1e-12 * lam * lam * k * k) << m << r << rs << " k=" << k;
          }
}
