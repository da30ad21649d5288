// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failing criteria.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bmf/error.hpp"
#include "bmf/factorizability.hpp"
#include "bmf/forge.hpp"
#include "bmf/linalg.hpp"
#include "bmf/objective.hpp"
#include "bmf/solver.hpp"
#include "bmf/stationarity.hpp"
#include "bmf/trace_bounds.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bmf;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kGradRel = 1e-9;
constexpr double kHessAbs = 1e-8;
constexpr double kGapRel = 1e-9;
constexpr double kExcessRel = 1e-9;
constexpr double kRayleighSlack = 1e-9;
constexpr int kRayleighSamples = 10000;
constexpr int kRayleighEvery = 1;  // every k-th non-factorizable cell gets the sampled check
constexpr double kCanonRel = 1e-12;
constexpr double kBoundaryAbs = 1e-12;
constexpr int kTraceInstances = 1000;
constexpr int kTraceSamples = 10000;
constexpr int kTraceSampledInstances = kTraceInstances;
constexpr double kTraceSampleSlack = 1e-9;
constexpr double kTraceWitnessAbs = 1e-12;
constexpr int kCompletions = 1000;
constexpr double kCompletionSum = 1e-12;
constexpr double kCompletionDominance = 1e-14;
constexpr int kFdPoints = 50;
constexpr double kFdStep = 1e-6;
constexpr double kFdRel = 1e-6;
constexpr int kHessDirections = 100;
constexpr double kHessConsistencyAbs = 1e-10;
constexpr double kBruteSlack = 1e-9;
constexpr double kScalarUv = 1e-6;
constexpr double kScalarF = 1e-9;
constexpr double kScalarCert = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const std::vector<double> kKappas = {1.0, 1.5, 2.0, 2.99, 3.0, 3.01, 4.0, 6.0, 10.0};
const std::vector<double> kLambdas = {0.5, 1.0, 2.0};

std::vector<RegimeParams> threshold_grid() {
  std::vector<RegimeParams> out;
  for (int m = 2; m <= 6; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs)
        for (double k : kKappas)
          for (double lam : kLambdas) out.push_back({m, m, r, rs, k, 1.0, lam});
  return out;
}

bool rel_eq(double got, double want, double rel) { return std::abs(got - want) <= rel * std::max(1.0, std::abs(want)); }
bool vec_eq(const Vec& got, std::initializer_list<double> want, double rel) {
  if (static_cast<std::size_t>(got.size()) != want.size()) return false;
  std::size_t i = 0;
  for (double w : want)
    if (!rel_eq(got(static_cast<Eigen::Index>(i++)), w, rel)) return false;
  return true;
}

Outcome criterion1() {
  int cells = 0, mismatches = 0, enum_mismatches = 0;
  for (const RegimeParams& p : threshold_grid()) {
    ++cells;
    const bool a = oracle(p).factorizable;
    const Verdict v = solve_reduced_qp(p);
    if (a != v.factorizable || v.factorizable != (v.scenario == Scenario::S1)) ++mismatches;
    if (a != ref::factorizable_by_enumeration(p.m, p.r, p.r_star, p.L, p.mu)) ++enum_mismatches;
  }
  return {mismatches == 0 && enum_mismatches == 0,
          fmt("%d cells, %d oracle/QP mismatches, %d mismatches against direct enumeration of H", cells, mismatches,
              enum_mismatches)};
}

Outcome criterion2() {
  ref::Gen g(2024);
  int cells = 0, failed = 0, sampled = 0;
  std::string first;
  for (const RegimeParams& p : threshold_grid()) {
    if (oracle(p).factorizable) continue;
    ++cells;
    const CounterexampleInstance inst = forge(p);
    VerifyTolerances tol;
    tol.rayleigh_samples = 0;
    const VerificationReport rep = verify_counterexample(inst, tol);
    const double gh = inst.h.gradient(inst.Xbar).norm();
    std::vector<std::string> bad;
    if (!(rep.grad_Fr_residual <= kGradRel * (1 + gh))) bad.push_back("grad");
    if (!(rep.min_hessian_eig >= -kHessAbs)) bad.push_back("hessian");
    if (!(rep.f_gap >= kGapRel * p.lambda * p.lambda)) bad.push_back("f_gap");
    if (!rep.xstar_is_stationary) bad.push_back("xstar");
    if (!(rep.xbar_spectral_excess >= kExcessRel * p.lambda)) bad.push_back("excess");
    if (!rep.bounds_ok) bad.push_back("bounds");
    if (!rep.all_pass) bad.push_back("all_pass");
    if (cells % kRayleighEvery == 0) {
      ++sampled;
      double lo = 1e300, hi = -1e300;
      for (int s = 0; s < kRayleighSamples; ++s) {
        Mat Y = g.gaussian(p.m, p.n);
        Y /= Y.norm();
        const double q = inst.h.hess_quadform(Y);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      if (lo < p.mu - kRayleighSlack || hi > p.L + kRayleighSlack) bad.push_back("rayleigh");
    }
    if (!bad.empty()) {
      ++failed;
      if (first.empty()) {
        first = fmt(" first failure m=%d r=%d r*=%d kappa=%g lambda=%g:", p.m, p.r, p.r_star, p.L, p.lambda);
        for (const auto& b : bad) first += " " + b;
      }
    }
  }
  return {failed == 0, fmt("%d non-factorizable cells, %d failed, %d with %d Rayleigh samples", cells, failed,
                           sampled, kRayleighSamples) +
                           first};
}

Outcome criterion3() {
  const RegimeParams p{3, 3, 1, 1, 4.0, 1.0, 1.0};
  const CounterexampleInstance inst = forge(p);
  const QpWitness& w = inst.witness;
  std::vector<std::string> bad;
  if (!vec_eq(w.x, {1, 0, 0}, kCanonRel)) bad.push_back("x");
  if (!vec_eq(w.g, {1, 5, 0}, kCanonRel)) bad.push_back("g");
  if (!vec_eq(w.y, {2.5, 0, 0}, kCanonRel)) bad.push_back("y");
  if (!vec_eq(w.v, {1, 1, 0}, kCanonRel)) bad.push_back("v");
  if (!rel_eq(qp_objective(w, p), 5.0, kCanonRel)) bad.push_back("qp_objective");
  const Mat N = inst.Gbar + p.mu * inst.Xbar - inst.Gstar - p.mu * inst.Xstar;
  const double c = ((inst.Xstar - inst.Xbar).array() * N.array()).sum();
  if (!rel_eq(c, 2.75, kCanonRel)) bad.push_back("denominator");
  const double ratio = N.squaredNorm() / c;
  if (!rel_eq(ratio, 13.0 / 11.0, kCanonRel) || !(ratio <= p.L - p.mu)) bad.push_back("boundqn");
  const StationaryDecomposition cert = certify_first_order(inst.h, p.lambda, inst.pair);
  double d2 = 0.0;
  for (Eigen::Index i = cert.s; i < cert.d.size(); ++i) d2 = std::max(d2, cert.d(i));
  const double bound = p.lambda + p.L * full_svd(inst.Xbar).sigma(0);
  if (!rel_eq(d2, 5.0, kCanonRel) || !rel_eq(bound, 5.0, kCanonRel)) bad.push_back("d2");
  std::string d = fmt("qp=%.17g c=%.17g ratio=%.6f d2=%.17g", qp_objective(w, p), c, ratio, d2);
  for (const auto& b : bad) d += " bad:" + b;
  return {bad.empty(), d};
}

Outcome criterion4() {
  const RegimeParams p{3, 3, 1, 1, 3.0, 1.0, 1.0};
  const CounterexampleInstance inst = forge(p);
  const VerificationReport rep = verify_counterexample(inst);
  bool refused = false;
  try {
    forge(RegimeParams{3, 3, 2, 1, 3.0, 1.0, 1.0});
  } catch (const Error& e) {
    refused = e.kind() == ErrorKind::FactorizableRegime;
  }
  const bool ok = std::abs(inst.qp_objective) <= kBoundaryAbs && rep.all_pass && refused;
  return {ok, fmt("qp_objective=%.3g all_pass=%d min_eig=%.3g, r=2 refused=%d", inst.qp_objective, rep.all_pass,
                  rep.min_hessian_eig, refused)};
}

Outcome criterion5() {
  ref::Gen g(55);
  int mismatches = 0, exceed = 0;
  double worst_witness = 0.0, worst_excess = -1e300;
  for (int t = 0; t < kTraceInstances; ++t) {
    const int m = 1 + t % 7, n = m + g.integer(0, 2);
    const Vec a = g.nonneg(m), b = g.nonneg(m), c = g.nonneg(m), d = g.nonneg(m);
    const Assignment as = max_permutation_pairing(a, b, c, d);
    if (as.value != ref::brute_pairing(a, b, c, d)) ++mismatches;
    const Mat A = a.asDiagonal(), B = b.asDiagonal(), C = c.asDiagonal(), D = d.asDiagonal();
    const OrthogonalPair w = witness_orthogonal_pair(as.perm, m, n);
    worst_witness = std::max(worst_witness, std::abs(lhs_trace_form(w.R, w.P, A, B, C, D) - as.value));
    if (t < kTraceSampledInstances) {
      for (int s = 0; s < kTraceSamples; ++s) {
        const double v = lhs_trace_form(random_orthogonal(m, g.engine()()), random_orthogonal(n, g.engine()()), A, B,
                                        C, D);
        worst_excess = std::max(worst_excess, v - as.value);
        if (v > as.value + kTraceSampleSlack) ++exceed;
      }
    }
  }
  return {mismatches == 0 && exceed == 0 && worst_witness <= kTraceWitnessAbs,
          fmt("%d quadruples (m<=7): %d inexact; %d instances x %d samples: %d above bound (max excess %.3g); "
              "witness error %.3g",
              kTraceInstances, mismatches, kTraceSampledInstances, kTraceSamples, exceed, worst_excess,
              worst_witness)};
}

Outcome criterion6() {
  ref::Gen g(66);
  int bad = 0;
  double worst_sum = 0.0, worst_dom = 0.0;
  for (int t = 0; t < kCompletions; ++t) {
    const int m = 1 + t % 10;
    Mat A(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = g.coin() ? g.uniform(0, 1) : 0.0;
    A /= std::max({A.rowwise().sum().maxCoeff(), A.colwise().sum().maxCoeff(), 1.0});
    A *= g.uniform(0, 1);
    const Mat B = complete_to_doubly_stochastic(A);
    double es = 0.0;
    for (int i = 0; i < m; ++i)
      es = std::max({es, std::abs(B.row(i).sum() - 1), std::abs(B.col(i).sum() - 1)});
    const double ed = std::max(0.0, -(B - A).minCoeff());
    worst_sum = std::max(worst_sum, es);
    worst_dom = std::max(worst_dom, ed);
    if (es > kCompletionSum || ed > kCompletionDominance) ++bad;
  }
  return {bad == 0, fmt("%d inputs, %d bad, max sum error %.3g, max dominance violation %.3g", kCompletions, bad,
                        worst_sum, worst_dom)};
}

Outcome criterion7() {
  ref::Gen g(77);
  struct Cls {
    const char* name;
    QuadraticObjective h;
  };
  std::vector<Cls> classes;
  classes.push_back({"entrywise", QuadraticObjective::entrywise(3.0, 1.5, g.gaussian(3, 4), g.gaussian(3, 4))});
  classes.push_back({"entrywise+rank-one", QuadraticObjective::entrywise(2.0, 0.5, g.gaussian(3, 4), g.gaussian(3, 4),
                                                                       g.gaussian(3, 4), 1.7)});
  {
    Vec ev(12);
    for (int i = 0; i < 12; ++i) ev(i) = g.uniform(1, 5);
    classes.push_back({"general", QuadraticObjective::general_psd(g.orthogonal(12), ev, g.gaussian(3, 4), 0.3)});
  }
  classes.push_back({"forged", forge(RegimeParams{4, 5, 2, 1, 6.0, 1.0, 0.5}).h});
  double worst_h = 0.0, worst_fr = 0.0, worst_hess = 0.0;
  for (const Cls& c : classes) {
    const QuadraticObjective& h = c.h;
    const Eigen::Index m = h.rows(), n = h.cols();
    for (int t = 0; t < kFdPoints; ++t) {
      const Mat X = g.gaussian(m, n);
      const Mat fd = ref::fd_gradient([&](const Mat& Y) { return h.value(Y); }, X, kFdStep);
      worst_h = std::max(worst_h, ref::rel_err(h.gradient(X), fd));
      const Eigen::Index r = 1 + t % m;
      const double lam = 0.5 + 0.1 * (t % 7);
      const FactorPair p{g.gaussian(m, r), g.gaussian(n, r)};
      const FactorPair gr = grad_Fr(h, lam, p);
      const Mat gu = ref::fd_gradient([&](const Mat& U) { return eval_Fr(h, lam, {U, p.V}); }, p.U, kFdStep);
      const Mat gv = ref::fd_gradient([&](const Mat& V) { return eval_Fr(h, lam, {p.U, V}); }, p.V, kFdStep);
      worst_fr = std::max({worst_fr, ref::rel_err(gr.U, gu), ref::rel_err(gr.V, gv)});
    }
    const Eigen::Index r = 2;
    const FactorPair p{g.gaussian(m, r), g.gaussian(n, r)};
    const Mat H = hess_matrix_Fr(h, 0.7, p);
    for (int t = 0; t < kHessDirections; ++t) {
      FactorPair dir{g.gaussian(m, r), g.gaussian(n, r)};
      const double nrm = std::sqrt(dir.U.squaredNorm() + dir.V.squaredNorm());
      dir.U /= nrm;
      dir.V /= nrm;
      const Vec z = flatten(dir);
      worst_hess = std::max(worst_hess, std::abs(z.dot(H * z) - hess_quadform_Fr(h, 0.7, p, dir)));
    }
  }
  const bool ok = worst_h <= kFdRel && worst_fr <= kFdRel && worst_hess <= kHessConsistencyAbs;
  return {ok, fmt("4 classes x %d points: grad h rel %.3g, grad F_r rel %.3g; %d unit directions: Hessian dev %.3g",
                  kFdPoints, worst_h, worst_fr, kHessDirections, worst_hess)};
}

Outcome criterion8() {
  int cells = 0, over = 0, not_monotone = 0;
  double worst_over = -1e300, worst_gap9 = 0.0;
  GridSpec coarse, fine;
  fine.points = 2 * coarse.points - 1;
  for (int m = 1; m <= 4; ++m)
    for (int r = 1; r <= m; ++r)
      for (int rs = 0; rs <= m; ++rs)
        for (double k : kKappas)
          for (double lam : {0.5, 1.0}) {
            const RegimeParams p{m, m, r, rs, k, 1.0, lam};
            ++cells;
            double closed = -1e300;
            for (int d = d_min(p); d <= d_max(p); ++d)
              for (double w : coarse.w_values) closed = std::max(closed, lam * lam * reduced_qp_value(d, w, p));
            const double b9 = brute_force_qp(p, coarse).approx_sup;
            const double b17 = brute_force_qp(p, fine).approx_sup;
            const double slack = kBruteSlack * (1 + std::abs(closed));
            worst_over = std::max({worst_over, b9 - closed, b17 - closed});
            if (b9 > closed + slack || b17 > closed + slack) ++over;
            const double gap9 = closed - b9, gap17 = closed - b17;
            worst_gap9 = std::max(worst_gap9, gap9);
            if (gap17 > gap9 + slack) ++not_monotone;
          }
  return {over == 0 && not_monotone == 0,
          fmt("%d cells (m<=4): %d above closed form (max excess %.3g), %d where refinement widened the gap; "
              "max coarse gap %.3g",
              cells, over, worst_over, not_monotone, worst_gap9)};
}

Outcome criterion9() {
  const QuadraticObjective h = QuadraticObjective::entrywise(1.0, 1.0, Mat::Constant(1, 1, 3.0), Mat::Zero(1, 1));
  int off = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SolveTrace tr = solve(h, 1.0, random_pair(1, 1, 1, 1.0, 1000 + seed));
    const double uv = tr.final.U(0, 0) * tr.final.V(0, 0);
    worst = std::max(worst, std::abs(uv - 2.0));
    if (std::abs(uv - 2.0) > kScalarUv) ++off;
  }
  const double f2 = eval_f(h, 1.0, Mat::Constant(1, 1, 2.0));
  const double s = std::sqrt(2.0);
  const StationaryDecomposition c = certify_first_order(h, 1.0, {Mat::Constant(1, 1, s), Mat::Constant(1, 1, s)});
  const bool cert_ok = c.sigma.size() == 1 && std::abs(c.sigma(0) - 2.0) <= kScalarCert &&
                       std::abs(c.d(0) - 1.0) <= kScalarCert;
  return {off == 0 && std::abs(f2 - 2.5) <= kScalarF && cert_ok,
          fmt("20 starts: %d off, max |uv-2| %.3g; f(2)=%.17g; sigma=(%.12g) d=(%.12g)", off, worst, f2, c.sigma(0),
              c.d(0))};
}

Outcome criterion10() {
  ref::Gen g(1010);
  int tested = 0, violations = 0, attempts = 0;
  while (tested < 300 && attempts < 5000) {
    ++attempts;
    const int m = g.integer(2, 5), n = m + g.integer(0, 2), r = g.integer(2, m), s = g.integer(0, r - 1);
    const double lam = g.uniform(0.3, 2.0);
    const double kappa = attempts % 2 ? 1.0 : g.uniform(1.0, 8.0);
    const double trailing = attempts % 3 == 0 ? 3.0 : 1.0;
    const fixtures::Planted pl = fixtures::plant(g, m, n, r, s, lam, attempts % 5 == 0, trailing, kappa);
    const SecondOrderReport rep = certify_second_order(pl.h, lam, pl.pair);
    if (rep.verdict != SecondOrderVerdict::SecondOrder || !rep.decomposition || rep.decomposition->s >= r) continue;
    ++tested;
    if (!is_stationary_f(pl.h, lam, pl.pair.U * pl.pair.V.transpose())) ++violations;
  }
  return {tested > 0 && violations == 0,
          fmt("%d rank-deficient second-order points (from %d candidates), %d not stationary for f", tested, attempts,
              violations)};
}

}  // namespace

int main() {
  report(1, "tight-threshold reproduction", criterion1);
  report(2, "counterexample soundness", criterion2);
  report(3, "canonical instance numbers", criterion3);
  report(4, "kappa=3 tightness boundary", criterion4);
  report(5, "trace inequality", criterion5);
  report(6, "doubly stochastic completion", criterion6);
  report(7, "calculus", criterion7);
  report(8, "brute-force QP dominance", criterion8);
  report(9, "scalar end-to-end", criterion9);
  report(10, "rank-deficient corollary", criterion10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
