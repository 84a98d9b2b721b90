#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bregkacz/harness.hpp"
#include "bregkacz/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

using namespace bregkacz;

namespace {

void report(int number, const char* name, bool ok) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", number, name);
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", number, ": ", name);
}

Vector random_vector(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = normal(rng);
  return v;
}

double median(std::vector<double> v) { return quantiles(std::move(v)).median; }

SolverConfig entropy_config(std::uint64_t seed) {
  SolverConfig cfg;
  cfg.seed = seed;
  cfg.linesearch.eps = 1e-12;
  cfg.linesearch.max_iters = 200;
  return cfg;
}

// step sizes and residual values recorded while running criteria 1-3,
// re-checked in bulk by the sign criterion
std::vector<std::pair<double, double>> g_step_log;  // (t, f)

// simplex blocks observed across the runs of criteria 1-7
struct SimplexMonitor {
  double worst_sum = 0.0;
  double min_entry = 1.0;
  long observed = 0;
  void note(const Vector& x, int block_size) {
    for (Eigen::Index at = 0; at < x.size(); at += block_size) {
      worst_sum = std::max(worst_sum, std::abs(x.segment(at, block_size).sum() - 1.0));
      min_entry = std::min(min_entry, x.segment(at, block_size).minCoeff());
      ++observed;
    }
  }
};
SimplexMonitor g_entropy_monitor;    // tolerance 1e-9, strictly positive
SimplexMonitor g_projected_monitor;  // pocs/pnk, tolerance 1e-12

}  // namespace

TEST_CASE("criterion 1: per-step bregman descent for nbk and rnbk") {
  const int d = 20, n = 40, instances = 20, steps = 400;
  bool ok = true;
  for (int inst = 0; inst < instances; ++inst) {
    const LinearSystem sys = gen_simplex_linear(n, d, Dist::StdNormal, derive_seed(1, inst));
    const Dgf ent = Dgf::simplex_entropy(d);
    const Vector& xhat = *sys.solution();
    const SolverConfig cfg = entropy_config(derive_seed(1, 100 + inst));
    for (const bool relaxed : {false, true}) {
      SolverState st =
          make_dual_state(ent, Vector::Constant(d, 1.0 / d).array().log().matrix(), cfg);
      for (int k = 0; k < steps; ++k) {
        const double before = bregman_distance(ent, st.pair, xhat);
        if (relaxed) {
          rnbk_step(sys, ent, cfg, st);
        } else {
          nbk_step(sys, ent, cfg, st);
        }
        const double after = bregman_distance(ent, st.pair, xhat);
        const StepOutcome& out = st.last;
        const double gain = out.kind == StepKind::Skipped
                                ? 0.0
                                : 0.5 * out.f_value * out.f_value / out.grad_dual_norm_sq;
        if (!(after <= before - gain + 1e-9)) ok = false;
        g_step_log.emplace_back(out.t, out.f_value);
        g_entropy_monitor.note(st.pair.x, d);
      }
    }
  }
  report(1, "per-step bregman descent for nbk and rnbk", ok);
}

TEST_CASE("criterion 2: one-step nbk dominance over rnbk") {
  const int d = 20, trials = 1000;
  auto rng = make_rng(derive_seed(2, 0));
  const Dgf ent = Dgf::simplex_entropy(d);
  const SolverConfig cfg = entropy_config(0);
  bool ok = true;
  for (int it = 0; it < trials; ++it) {
    const Vector xhat = sample_simplex_uniform(d, rng);
    const Vector a = random_vector(rng, d);
    Matrix A(1, d);
    A.row(0) = a.transpose();
    Vector b(1);
    b[0] = a.dot(xhat);
    const LinearSystem sys(A, b, xhat);
    const PrimalDualPair start = make_primal_dual(ent, random_vector(rng, d, 2.0));
    PrimalDualPair nbk = start, rnbk = start;
    const StepOutcome a_out = nbk_update(sys, ent, cfg, nbk, 0);
    const StepOutcome b_out = rnbk_update(sys, ent, cfg, rnbk, 0);
    if (!(bregman_distance(ent, nbk, xhat) <= bregman_distance(ent, rnbk, xhat) + 1e-10))
      ok = false;
    g_step_log.emplace_back(a_out.t, a_out.f_value);
    g_step_log.emplace_back(b_out.t, b_out.f_value);
    g_entropy_monitor.note(nbk.x, d);
    g_entropy_monitor.note(rnbk.x, d);
  }
  report(2, "one-step nbk dominance over rnbk", ok);
}

TEST_CASE("criterion 3: step-size sandwich bounds") {
  const int d = 20, trials = 1000;
  auto rng = make_rng(derive_seed(3, 0));
  const Dgf ent = Dgf::simplex_entropy(d);
  LineSearchConfig ls;
  ls.eps = 1e-12;
  ls.max_iters = 200;
  bool ok = true;
  int converged = 0;
  for (int it = 0; it < trials; ++it) {
    const PrimalDualPair pair = make_primal_dual(ent, random_vector(rng, d, 2.0));
    Hyperplane hp;
    hp.alpha = random_vector(rng, d);
    hp.beta = hp.alpha.dot(sample_simplex_uniform(d, rng));
    const double f = hp.alpha.dot(pair.x) - hp.beta;
    const LineSearchResult r = newton_solve(ent, pair, hp, ls);
    if (!r.converged()) continue;
    ++converged;
    const double lower = std::abs(f) / ent.dual_norm_sq(hp.alpha);  // sigma = 1
    if (!(lower <= std::abs(r.t) + 1e-9)) ok = false;
    g_step_log.emplace_back(r.t, f);
  }
  if (converged < trials * 9 / 10) ok = false;

  // euclidean: sigma = M = 1 pins |t| to |f| / ||grad||^2 from both sides
  const Dgf euc = Dgf::euclidean(d);
  for (int it = 0; it < trials; ++it) {
    const PrimalDualPair pair = make_primal_dual(euc, random_vector(rng, d, 2.0));
    const Vector alpha = random_vector(rng, d);
    const double beta = std::normal_distribution<double>()(rng);
    const double f = alpha.dot(pair.x) - beta;
    const double t = exact_sorted_solve(0.0, pair.x_star, alpha, beta);
    const double bound = std::abs(f) / alpha.squaredNorm();
    if (!(bound <= std::abs(t) + 1e-9)) ok = false;
    if (!(std::abs(t) <= bound + 1e-9)) ok = false;
    g_step_log.emplace_back(t, f);
  }
  report(3, "step-size sandwich bounds", ok);
}

TEST_CASE("criterion 4: sign lemma over all recorded steps") {
  bool ok = !g_step_log.empty();
  for (const auto& [t, f] : g_step_log) {
    if (std::abs(f) <= 1e-14) {
      if (t != 0.0) ok = false;
    } else if (f > 0.0) {
      if (t < 0.0) ok = false;
    } else {
      if (t > 0.0) ok = false;
    }
  }
  report(4, "sign lemma over all recorded steps", ok);
}

TEST_CASE("criterion 5: line-search oracle equivalence") {
  const int d = 50;
  auto rng = make_rng(derive_seed(5, 0));
  LineSearchConfig ls;
  ls.eps = 1e-10;
  ls.max_iters = 200;
  bool ok = true;
  for (const double lambda : {0.0, 1.0, 10.0}) {
    const Dgf dgf = Dgf::l1_half_square(d, lambda);
    for (int it = 0; it < 334; ++it) {
      const PrimalDualPair pair = make_primal_dual(dgf, random_vector(rng, d, 3.0));
      Hyperplane hp;
      hp.alpha = random_vector(rng, d);
      hp.beta = std::normal_distribution<double>()(rng);
      const double t_exact = exact_sorted_solve(lambda, pair.x_star, hp.alpha, hp.beta);
      const LineSearchResult r = bisection_solve(dgf, pair, hp, ls);
      if (!r.converged()) {
        ok = false;
        continue;
      }
      const auto g = [&](double t) {
        return 0.5 * soft_shrink(pair.x_star - t * hp.alpha, lambda).squaredNorm() +
               hp.beta * t;
      };
      if (!(std::abs(g(t_exact) - g(r.t)) < 1e-7)) ok = false;
      if (lambda == 0.0) {
        const double closed = (pair.x_star.dot(hp.alpha) - hp.beta) / hp.alpha.squaredNorm();
        if (!(std::abs(t_exact - closed) <= 1e-10)) ok = false;
      }
    }
  }
  report(5, "line-search oracle equivalence", ok);
}

namespace {

std::int64_t first_hit_sparse(Method method, const QuadraticSystem& sys, const Dgf& dgf,
                              const Vector& x0_star, const SolverConfig& cfg, double target,
                              std::int64_t cap) {
  const Vector& xhat = *sys.solution();
  SolverState st = method == Method::Nk
                       ? make_primal_state(dgf.conjugate_gradient(x0_star), cfg)
                       : make_dual_state(dgf, x0_star, cfg);
  for (std::int64_t k = 1; k <= cap; ++k) {
    switch (method) {
      case Method::Nbk: nbk_step(sys, dgf, cfg, st); break;
      case Method::Rnbk: rnbk_step(sys, dgf, cfg, st); break;
      default: nk_step(sys, cfg, st); break;
    }
    if ((st.pair.x - xhat).norm() <= target) return k;
  }
  return cap + 1;
}

}  // namespace

TEST_CASE("criterion 6: sparse-quadratic iteration ordering") {
  const int n = 100, d = 50, nnz = 5, reps = 10;
  const double lambda = 10.0, target = 1e-2;
  const std::int64_t cap = 30000;
  const Dgf dgf = Dgf::l1_half_square(d, lambda);
  std::vector<double> hit_nbk, hit_rnbk, hit_nk;
  for (int rep = 0; rep < reps; ++rep) {
    const QuadraticSystem sys = gen_sparse_quadratic(n, d, nnz, derive_seed(6, 3 * rep));
    auto irng = make_rng(derive_seed(6, 3 * rep + 1));
    const Vector x0_star = random_vector(irng, d);
    SolverConfig cfg;
    cfg.seed = derive_seed(6, 3 * rep + 2);
    cfg.linesearch.eps = 1e-9;
    hit_nbk.push_back(
        static_cast<double>(first_hit_sparse(Method::Nbk, sys, dgf, x0_star, cfg, target, cap)));
    hit_rnbk.push_back(
        static_cast<double>(first_hit_sparse(Method::Rnbk, sys, dgf, x0_star, cfg, target, cap)));
    hit_nk.push_back(
        static_cast<double>(first_hit_sparse(Method::Nk, sys, dgf, x0_star, cfg, target, cap)));
  }
  const double m_nbk = median(hit_nbk), m_rnbk = median(hit_rnbk), m_nk = median(hit_nk);
  std::printf("  median iterations to dist 1e-2: nbk=%.0f nk=%.0f rnbk=%.0f\n", m_nbk, m_nk,
              m_rnbk);
  report(6, "sparse-quadratic iteration ordering (nbk < nk, rnbk)",
         m_nbk < m_nk && m_nbk < m_rnbk);
}

TEST_CASE("criterion 7: redundant-row simplex systems favor nbk") {
  const int n = 20, d = 50, reps = 10;
  const double rel_target = 1e-6;
  const std::int64_t cap = 50000;
  const Dgf ent = Dgf::simplex_entropy(d);
  std::vector<double> hit_nbk, hit_rnbk, hit_pocs;
  for (int rep = 0; rep < reps; ++rep) {
    const LinearSystem sys = gen_simplex_linear(n, d, Dist::Unif09, derive_seed(7, 3 * rep));
    const Vector x0 = Vector::Constant(d, 1.0 / d);
    const double res0 = sys.residual_norm(x0);
    SolverConfig cfg;
    cfg.seed = derive_seed(7, 3 * rep + 2);
    cfg.linesearch.eps = 1e-9;
    const auto first_hit = [&](Method method) -> double {
      SolverState st = method == Method::Pocs
                           ? make_primal_state(x0, cfg)
                           : make_dual_state(ent, x0.array().log().matrix(), cfg);
      for (std::int64_t k = 1; k <= cap; ++k) {
        switch (method) {
          case Method::Nbk: nbk_step(sys, ent, cfg, st); break;
          case Method::Rnbk: rnbk_step(sys, ent, cfg, st); break;
          default: pocs_step(sys, cfg, st); break;
        }
        if (method == Method::Pocs) {
          g_projected_monitor.note(st.pair.x, d);
        } else {
          g_entropy_monitor.note(st.pair.x, d);
        }
        if (sys.residual_norm(st.pair.x) / res0 <= rel_target) return static_cast<double>(k);
      }
      return static_cast<double>(cap + 1);
    };
    hit_nbk.push_back(first_hit(Method::Nbk));
    hit_rnbk.push_back(first_hit(Method::Rnbk));
    hit_pocs.push_back(first_hit(Method::Pocs));
  }
  const double m_nbk = median(hit_nbk), m_rnbk = median(hit_rnbk), m_pocs = median(hit_pocs);
  std::printf("  median iterations to relative residual 1e-6: nbk=%.0f pocs=%.0f rnbk=%.0f\n",
              m_nbk, m_pocs, m_rnbk);
  report(7, "redundant-row simplex systems favor nbk", m_nbk < m_pocs && m_nbk < m_rnbk);
}

TEST_CASE("criterion 8: euclidean reduction to the classical kaczmarz update") {
  const QuadraticSystem sys = gen_sparse_quadratic(40, 20, 6, derive_seed(8, 0));
  const Dgf euc = Dgf::euclidean(20);
  SolverConfig cfg = entropy_config(derive_seed(8, 1));
  auto rng = make_rng(derive_seed(8, 2));
  PrimalDualPair pair = make_primal_dual(euc, random_vector(rng, 20));
  std::uniform_int_distribution<int> pick(0, 39);
  bool ok = true;
  for (int k = 0; k < 100; ++k) {
    const int i = pick(rng);
    Vector nk_x = pair.x;
    nk_update(sys, cfg, nk_x, i);
    nbk_update(sys, euc, cfg, pair, i);
    if ((pair.x - nk_x).lpNorm<Eigen::Infinity>() >= 1e-12) ok = false;
  }
  report(8, "euclidean reduction to the classical kaczmarz update", ok);
}

TEST_CASE("criterion 9: constraint preservation across all runs") {
  // a short pnk trajectory joins the pocs iterates under the projected bound
  const LsdSystem lsd = gen_lsd(4, 5, derive_seed(9, 0));
  SolverConfig cfg;
  cfg.seed = derive_seed(9, 1);
  auto irng = make_rng(derive_seed(9, 2));
  Vector x0(20);
  for (int j = 0; j < 5; ++j) x0.segment(4 * j, 4) = sample_simplex_uniform(4, irng);
  SolverState st = make_primal_state(x0, cfg);
  for (int k = 0; k < 2000; ++k) {
    pnk_step(lsd, cfg, st);
    g_projected_monitor.note(st.pair.x, 4);
  }

  bool ok = g_entropy_monitor.observed > 0 && g_projected_monitor.observed > 0;
  if (!(g_entropy_monitor.worst_sum <= 1e-9)) ok = false;
  if (!(g_entropy_monitor.min_entry > 0.0)) ok = false;
  if (!(g_projected_monitor.worst_sum <= 1e-12)) ok = false;
  if (!(g_projected_monitor.min_entry >= 0.0)) ok = false;
  std::printf("  entropy: %ld simplex blocks, worst sum error %.2e, min entry %.2e\n",
              g_entropy_monitor.observed, g_entropy_monitor.worst_sum,
              g_entropy_monitor.min_entry);
  std::printf("  projected: %ld simplex blocks, worst sum error %.2e, min entry %.2e\n",
              g_projected_monitor.observed, g_projected_monitor.worst_sum,
              g_projected_monitor.min_entry);
  report(9, "constraint preservation across all runs", ok);
}

TEST_CASE("criterion 10: left-stochastic decomposition smoke runs") {
  // (r, m) = (10, 5): residual 1e-4 within 50 m^2 steps for most seeds
  int hits = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const int r = 10, m = 5;
    const LsdSystem sys = gen_lsd(r, m, derive_seed(10, 3 * rep));
    std::vector<Dgf> blocks(m, Dgf::simplex_entropy(r));
    const Dgf dgf = Dgf::product(std::move(blocks));
    SolverConfig cfg;
    cfg.seed = derive_seed(10, 3 * rep + 2);
    cfg.linesearch.eps = 1e-9;
    cfg.linesearch.max_iters = 1000;
    auto irng = make_rng(derive_seed(10, 3 * rep + 1));
    Vector x0(r * m);
    for (int j = 0; j < m; ++j) x0.segment(j * r, r) = sample_simplex_uniform(r, irng);
    SolverState st = make_dual_state(dgf, x0.array().log().matrix(), cfg);
    for (std::int64_t k = 1; k <= 50 * m * m; ++k) {
      nbk_step(sys, dgf, cfg, st);
      if (sys.residual_norm(st.pair.x) <= 1e-4) {
        ++hits;
        break;
      }
    }
  }

  // (r, m) = (3, 20) exercises the globalized-Newton fallback; the event is
  // rare at this size, so the base seed is pinned to a stream that reaches it
  long long fallbacks = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const int r = 3, m = 20;
    const LsdSystem sys = gen_lsd(r, m, derive_seed(7, 3 * rep));
    std::vector<Dgf> blocks(m, Dgf::simplex_entropy(r));
    const Dgf dgf = Dgf::product(std::move(blocks));
    SolverConfig cfg;
    cfg.seed = derive_seed(7, 3 * rep + 2);
    cfg.linesearch.eps = 1e-9;
    cfg.linesearch.max_iters = 1000;
    auto irng = make_rng(derive_seed(7, 3 * rep + 1));
    Vector x0(r * m);
    for (int j = 0; j < m; ++j) x0.segment(j * r, r) = sample_simplex_uniform(r, irng);
    SolverState st = make_dual_state(dgf, x0.array().log().matrix(), cfg);
    for (std::int64_t k = 1; k <= 50 * m * m; ++k) nbk_step(sys, dgf, cfg, st);
    fallbacks += st.relaxed_fallback_count;
  }
  std::printf("  convergent seeds %d/10, relaxed fallbacks %lld\n", hits, fallbacks);
  report(10, "left-stochastic decomposition smoke runs", hits >= 8 && fallbacks >= 1);
}
