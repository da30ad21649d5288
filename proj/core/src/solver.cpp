#include "bmf/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <tuple>

#include "bmf/error.hpp"
#include "bmf/factorizability.hpp"
#include "bmf/forge.hpp"
#include "bmf/stationarity.hpp"

namespace bmf {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kFlatContraction = 1e-3;

FactorPair axpy(const FactorPair& p, double t, const FactorPair& d) { return {p.U + t * d.U, p.V + t * d.V}; }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

SolveTrace solve(const QuadraticObjective& h, double lambda, const FactorPair& init, const SolverOptions& opts) {
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidInput, "lambda must be positive");
  if (opts.max_iters < 0 || !(opts.grad_tol > 0.0)) fail(ErrorKind::InvalidInput, "bad solver options");
  const double Lh = h.certified_bounds().L;
  const Eigen::Index m = init.U.rows(), n = init.V.rows(), r = init.U.cols();

  SolveTrace tr;
  FactorPair p = init;
  double F = eval_Fr(h, lambda, p);
  double t = 1.0;
  for (int k = 0; k < opts.max_iters; ++k) {
    const FactorPair g = grad_Fr(h, lambda, p);
    const double gn = grad_norm(g);
    if (opts.record_trace) {
      tr.objective.push_back(F);
      tr.grad_norm.push_back(gn);
    }
    tr.iterations = k;
    if (gn <= opts.grad_tol) {
      Eigen::SelfAdjointEigenSolver<Mat> es(hess_matrix_Fr(h, lambda, p));
      const double emin = es.eigenvalues()(0);
      tr.final_min_eig = emin;
      if (emin >= -opts.eig_tol) {
        tr.converged = true;
        break;
      }
      if (tr.escapes >= opts.max_escapes) break;
      const FactorPair e = unflatten(es.eigenvectors().col(0), m, n, r);
      bool moved = false;
      for (double rad = opts.perturb_radius; rad > 1e-8 && !moved; rad *= 0.5) {
        for (double sgn : {1.0, -1.0}) {
          const FactorPair cand = axpy(p, sgn * rad, e);
          const double Fc = eval_Fr(h, lambda, cand);
          if (Fc < F) {
            p = cand;
            F = Fc;
            moved = true;
            break;
          }
        }
      }
      if (!moved) break;
      ++tr.escapes;
      continue;
    }

    if (opts.step_rule == StepRule::Armijo) {
      // Near a minimiser the decrease c t |g|^2 drops below the rounding of F;
      // there a step that keeps F within rounding is accepted if it contracts |g|.
      const double flat = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(F));
      t = std::min(1.0, 4.0 * t);
      bool accepted = false;
      FactorPair cand;
      double Fc = F;
      for (; t > 1e-300; t *= 0.5) {
        cand = axpy(p, -t, g);
        Fc = eval_Fr(h, lambda, cand);
        const double want = kArmijoC * t * gn * gn;
        if (Fc < F && Fc <= F - want) {
          accepted = true;
          break;
        }
        if (want <= flat && Fc <= F + flat && grad_norm(grad_Fr(h, lambda, cand)) <= (1.0 - kFlatContraction) * gn) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      p = std::move(cand);
      F = Fc;
    } else {
      const double B2 = p.U.squaredNorm() + p.V.squaredNorm();
      const double eta = std::min(opts.fixed_step, 1.0 / (2.0 * (Lh * B2 + lambda)));
      p = axpy(p, -eta, g);
      F = eval_Fr(h, lambda, p);
    }
    tr.iterations = k + 1;
  }

  tr.final = p;
  tr.final_grad_norm = grad_norm(grad_Fr(h, lambda, p));
  if (tr.converged)
    tr.classification = is_stationary_f(h, lambda, p.U * p.V.transpose(), opts.stationary_tol)
                            ? Classification::GlobalByCertificate
                            : Classification::SpuriousSecondOrder;
  return tr;
}

GeneratedInstance random_psd_instance(const RegimeParams& p, std::uint64_t seed) {
  validate(p);
  const int m = p.m, n = p.n, rs = p.r_star;
  const double lam = p.lambda;
  std::mt19937_64 rng(splitmix(seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Mat R = random_orthogonal(m, rng());
  const Mat P = random_orthogonal(n, rng());

  Vec sig = Vec::Zero(m), dvec = Vec::Zero(m);
  for (int i = 0; i < rs; ++i) sig(i) = lam * (0.5 + 1.5 * unif(rng));
  for (int i = rs; i < m; ++i) dvec(i) = lam * 0.8 * unif(rng);
  std::sort(sig.data(), sig.data() + rs, std::greater<>());
  std::sort(dvec.data() + rs, dvec.data() + m, std::greater<>());
  dvec.head(rs).setConstant(lam);

  GeneratedInstance g{QuadraticObjective::entrywise(1.0, 1.0, Mat::Zero(m, n), Mat::Zero(m, n)),
                      R * tilde_diag_embed(sig, m, n) * P.transpose(),
                      R * tilde_diag_embed(dvec, m, n) * P.transpose()};

  const Eigen::Index k = static_cast<Eigen::Index>(m) * n;
  const Mat Q = random_orthogonal(k, rng());
  Vec ev(k);
  for (Eigen::Index i = 0; i < k; ++i) ev(i) = p.mu + (p.L - p.mu) * unif(rng);
  ev(0) = p.mu;
  if (k > 1) ev(1) = p.L;
  const Mat H = Q * ev.asDiagonal() * Q.transpose();
  // grad h(X*) = H vec(X*) + C = -G*
  const Mat C = -g.Gstar - unvec_rowmajor(H * vec_rowmajor(g.Xstar), m, n);
  g.h = QuadraticObjective::general_psd(Q, ev, C);
  return g;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BMF_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

auto cell_key(const RegimeParams& p) { return std::make_tuple(p.m, p.n, p.r, p.r_star, p.L, p.mu, p.lambda); }

PhaseRow run_cell(const RegimeParams& cell, std::size_t index, int trials, const SweepOptions& opts) {
  PhaseRow row;
  row.params = cell;
  row.oracle_factorizable = oracle(cell).factorizable;
  const std::uint64_t base = splitmix(opts.seed ^ splitmix(index + 1));
  SolverOptions so = opts.solver;
  so.record_trace = false;

  QuadraticObjective h = QuadraticObjective::entrywise(1.0, 1.0, Mat::Zero(1, 1), Mat::Zero(1, 1));
  std::optional<FactorPair> spurious_start;
  if (row.oracle_factorizable) {
    h = random_psd_instance(cell, base).h;
  } else {
    CounterexampleInstance inst = forge(cell);
    spurious_start = inst.pair;
    h = std::move(inst.h);
  }
  for (int t = 0; t < trials; ++t) {
    const FactorPair init = (t == 0 && spurious_start)
                                ? *spurious_start
                                : random_pair(cell.m, cell.n, cell.r, opts.init_scale, splitmix(base + 17 * (t + 1)));
    const SolveTrace tr = solve(h, cell.lambda, init, so);
    switch (tr.classification) {
      case Classification::GlobalByCertificate: ++row.n_global; break;
      case Classification::SpuriousSecondOrder: ++row.n_spurious; break;
      case Classification::Undetermined: ++row.n_undetermined; break;
    }
  }
  return row;
}

}  // namespace

PhaseTable sweep(const std::vector<RegimeParams>& grid, int trials, const SweepOptions& opts) {
  if (trials < 1) fail(ErrorKind::InvalidInput, "trials must be positive");
  for (const RegimeParams& c : grid) validate(c);
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cell_key(grid[a]) < cell_key(grid[b]); });

  PhaseTable table(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      try {
        // seeds follow the sorted position so the table is independent of input order
        table[k] = run_cell(grid[order[k]], k, trials, opts);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int nthreads = std::min<int>(resolve_threads(opts.threads), static_cast<int>(std::max<std::size_t>(1, grid.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return table;
}

std::vector<RegimeParams> product_grid(const std::vector<int>& ms, const std::vector<int>& rs,
                                       const std::vector<int>& r_stars, const std::vector<double>& kappas,
                                       const std::vector<double>& lambdas, int extra_cols) {
  std::vector<RegimeParams> out;
  for (int m : ms)
    for (int r : rs)
      for (int rs_ : r_stars)
        for (double k : kappas)
          for (double lam : lambdas) {
            if (r < 1 || r > m || rs_ < 0 || rs_ > m) continue;
            out.push_back({m, m + extra_cols, r, rs_, k, 1.0, lam});
          }
  return out;
}

std::vector<RegimeParams> default_grid() { return product_grid({2, 3}, {1, 2}, {1, 2}, {1.0, 2.0, 3.0, 4.0}, {1.0}); }

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::GlobalByCertificate: return "GlobalByCertificate";
    case Classification::SpuriousSecondOrder: return "SpuriousSecondOrder";
    case Classification::Undetermined: return "Undetermined";
  }
  return "Unknown";
}

std::string_view to_string(StepRule s) { return s == StepRule::Armijo ? "Armijo" : "FixedStep"; }

}  // namespace bmf
