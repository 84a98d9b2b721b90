#include "bregkacz/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bregkacz {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Method parse_method(const std::string& name) {
  if (name == "nbk") return Method::Nbk;
  if (name == "rnbk") return Method::Rnbk;
  if (name == "nk") return Method::Nk;
  if (name == "pocs") return Method::Pocs;
  if (name == "pnk") return Method::Pnk;
  throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method method) {
  switch (method) {
    case Method::Nbk: return "nbk";
    case Method::Rnbk: return "rnbk";
    case Method::Nk: return "nk";
    case Method::Pocs: return "pocs";
    case Method::Pnk: return "pnk";
  }
  return "";
}

SolverState make_dual_state(const Dgf& dgf, Vector x0_star, const SolverConfig& cfg) {
  SolverState state;
  state.pair = make_primal_dual(dgf, std::move(x0_star));
  state.rng = make_rng(cfg.seed);
  return state;
}

SolverState make_primal_state(Vector x0, const SolverConfig& cfg) {
  SolverState state;
  state.pair.x = std::move(x0);
  state.rng = make_rng(cfg.seed);
  return state;
}

namespace {

double config_sigma(const SolverConfig& cfg, const Dgf& dgf) {
  return cfg.sigma > 0.0 ? cfg.sigma : dgf.sigma();
}

bool sign_consistent(double t, double f) {
  if (t == 0.0) return true;
  return (t > 0.0) == (f > 0.0);
}

struct ActiveBlocks {
  Dgf sub;
  PrimalDualPair pair;
  Vector alpha;

  // Restricts the problem to the blocks the gradient touches; on those the
  // line-search objective differs from the full one only by a constant.
  ActiveBlocks(const Dgf& dgf, const PrimalDualPair& full, const Vector& grad)
      : sub(Dgf::euclidean(1)) {
    if (dgf.kind() != Dgf::Kind::Product) {
      sub = dgf;
      pair = full;
      alpha = grad;
      return;
    }
    std::vector<int> blocks;
    for (int b = 0; b < dgf.block_count(); ++b) {
      const int off = dgf.block_offset(b);
      const int n = dgf.block(b).dimension();
      if (grad.segment(off, n).cwiseAbs().maxCoeff() > 0.0) blocks.push_back(b);
    }
    int total = 0;
    for (int b : blocks) total += dgf.block(b).dimension();
    pair.x.resize(total);
    pair.x_star.resize(total);
    alpha.resize(total);
    int at = 0;
    std::vector<Dgf> parts;
    parts.reserve(blocks.size());
    for (int b : blocks) {
      const int off = dgf.block_offset(b);
      const int n = dgf.block(b).dimension();
      pair.x.segment(at, n) = full.x.segment(off, n);
      pair.x_star.segment(at, n) = full.x_star.segment(off, n);
      alpha.segment(at, n) = grad.segment(off, n);
      parts.push_back(dgf.scale() == 1.0 ? dgf.block(b) : dgf.block(b).scaled(dgf.scale()));
      at += n;
    }
    sub = parts.size() == 1 ? parts.front() : Dgf::product(std::move(parts));
  }
};

/// Hyperplane-meets-domain test on the active blocks. Entropy blocks carry the
/// closed-form conditions; anything else makes the hyperplane reachable.
bool hyperplane_feasible(const Dgf& sub, const PrimalDualPair& pair, const Vector& alpha,
                         double beta, const LineSearchConfig& ls) {
  const int nb = sub.block_count();
  for (int b = 0; b < nb; ++b) {
    if (sub.block(b).kind() != Dgf::Kind::SimplexEntropy)
      return true;  // a full-domain block absorbs any right-hand side
  }
  if (nb == 1) {
    return simplex_feasible(alpha, beta, pair.x, ls.feasibility_delta);
  }
  if (nb == 2 && sub.block(0).dimension() == sub.block(1).dimension()) {
    const int n = sub.block(0).dimension();
    return double_simplex_feasible(alpha.segment(0, n), alpha.segment(n, n), beta,
                                   pair.x.segment(0, n), pair.x.segment(n, n),
                                   ls.feasibility_delta);
  }
  // no closed-form condition; attempt the projection and let the line-search
  // escalation fall back if it diverges
  return true;
}

struct DualStepResult {
  double t = 0.0;
  StepKind kind = StepKind::Exact;
  bool feasible = true;
  bool used_globalized = false;
  bool relaxed_fallback = false;
};

/// Step-size selection for one NBK update: exact sorted solve where the
/// conjugate is piecewise quadratic, otherwise Newton escalating through the
/// globalized variant down to the relaxed step.
DualStepResult solve_dual_step(const Dgf& dgf, const PrimalDualPair& pair, const Vector& grad,
                               double f, double beta, const SolverConfig& cfg) {
  DualStepResult out;
  const Dgf::Kind kind = dgf.kind();
  if (kind == Dgf::Kind::Euclidean || kind == Dgf::Kind::L1HalfSquare) {
    const double lambda = kind == Dgf::Kind::L1HalfSquare ? dgf.soft_threshold() : 0.0;
    const double s = dgf.scale();
    if (s == 1.0) {
      out.t = exact_sorted_solve(lambda, pair.x_star, grad, beta);
    } else {
      out.t = exact_sorted_solve(lambda, Vector(pair.x_star / s), Vector(grad / s), beta / s);
    }
    if (!sign_consistent(out.t, f)) {  // only reachable at rounding scale
      out.kind = StepKind::Relaxed;
      out.t = relaxed_step(dgf, f, grad, config_sigma(cfg, dgf));
    }
    return out;
  }

  ActiveBlocks active(dgf, pair, grad);
  const Hyperplane hp{active.alpha, beta};
  if (!hyperplane_feasible(active.sub, active.pair, active.alpha, beta, cfg.linesearch)) {
    out.feasible = false;
    out.kind = StepKind::Relaxed;
    out.t = relaxed_step(dgf, f, grad, config_sigma(cfg, dgf));
    return out;
  }

  // Newton-stage steps beyond the threshold are treated as divergence and
  // handed to the relaxed projection, matching the |t| > 100 practice on the
  // left-stochastic problem.
  const double t_cap = cfg.linesearch.fallback_t_threshold;
  const bool twice_diff =
      g_eval(active.sub, active.pair, hp, 0.0).second_derivative.has_value();
  if (twice_diff) {
    LineSearchResult r = newton_solve(active.sub, active.pair, hp, cfg.linesearch);
    if (r.converged() && sign_consistent(r.t, f) && std::abs(r.t) <= t_cap) {
      out.t = r.t;
      return out;
    }
    out.used_globalized = true;
    r = globalized_newton_solve(active.sub, active.pair, hp, cfg.linesearch);
    if (r.status == LineSearchStatus::RelaxedFallback) {
      out.relaxed_fallback = true;
    } else if (r.converged() && sign_consistent(r.t, f)) {
      if (std::abs(r.t) <= t_cap) {
        out.t = r.t;
        return out;
      }
      out.relaxed_fallback = true;
    }
  } else {
    const LineSearchResult r = bisection_solve(active.sub, active.pair, hp, cfg.linesearch);
    if (r.converged() && sign_consistent(r.t, f)) {
      out.t = r.t;
      return out;
    }
  }
  out.kind = StepKind::Relaxed;
  out.t = relaxed_step(dgf, f, grad, config_sigma(cfg, dgf));
  return out;
}

bool guard_skip(const NonlinearSystem& sys, const SolverConfig& cfg, const Vector& x, int i,
                double& f, Vector& grad, StepOutcome& out) {
  f = sys.eval_component(i, x);
  out.index = i;
  out.f_value = f;
  if (std::abs(f) <= cfg.zero_tolerance) return true;
  grad = sys.grad_component(i, x);
  if (grad.norm() <= cfg.zero_tolerance) return true;
  return false;
}

}  // namespace

StepOutcome nbk_update(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
                       PrimalDualPair& pair, int i) {
  StepOutcome out;
  double f = 0.0;
  Vector grad;
  if (guard_skip(sys, cfg, pair.x, i, f, grad, out)) return out;
  const double beta = grad.dot(pair.x) - f;
  out.grad_dual_norm_sq = dgf.dual_norm_sq(grad);

  const DualStepResult step = solve_dual_step(dgf, pair, grad, f, beta, cfg);
  out.t = step.t;
  out.kind = step.kind;
  out.feasible = step.feasible;
  out.used_globalized = step.used_globalized;
  out.relaxed_fallback = step.relaxed_fallback;

  pair.x_star -= step.t * grad;
  pair.x = dgf.conjugate_gradient(pair.x_star);
  return out;
}

StepOutcome rnbk_update(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
                        PrimalDualPair& pair, int i) {
  StepOutcome out;
  double f = 0.0;
  Vector grad;
  if (guard_skip(sys, cfg, pair.x, i, f, grad, out)) return out;
  out.grad_dual_norm_sq = dgf.dual_norm_sq(grad);
  out.t = relaxed_step(dgf, f, grad, config_sigma(cfg, dgf));
  out.kind = StepKind::Relaxed;
  pair.x_star -= out.t * grad;
  pair.x = dgf.conjugate_gradient(pair.x_star);
  return out;
}

StepOutcome nk_update(const NonlinearSystem& sys, const SolverConfig& cfg, Vector& x, int i) {
  StepOutcome out;
  double f = 0.0;
  Vector grad;
  if (guard_skip(sys, cfg, x, i, f, grad, out)) return out;
  const double gn2 = grad.squaredNorm();
  out.grad_dual_norm_sq = gn2;
  out.t = f / gn2;
  out.kind = StepKind::Exact;
  x -= out.t * grad;
  return out;
}

StepOutcome pocs_update(const LinearSystem& sys, const SolverConfig& cfg, Vector& x, int i) {
  StepOutcome out;
  out.index = i;
  const Vector a = sys.grad_component(i, x);
  const double an2 = a.squaredNorm();
  out.f_value = sys.eval_component(i, x);
  if (an2 <= cfg.zero_tolerance * cfg.zero_tolerance) return out;  // zero row: skip
  out.grad_dual_norm_sq = an2;
  out.t = out.f_value / an2;
  out.kind = StepKind::Exact;
  const Vector y = x - out.t * a;
  x = simplex_projection(y);
  return out;
}

StepOutcome pnk_update(const LsdSystem& sys, const SolverConfig& cfg, Vector& x, int idx) {
  StepOutcome out;
  out.index = idx;
  const auto [i, j] = sys.component_pair(idx);
  const int r = sys.rows();
  auto X = Eigen::Map<Matrix>(x.data(), r, sys.cols());
  const double f = sys.eval_component(idx, x);
  out.f_value = f;
  if (std::abs(f) <= cfg.zero_tolerance) return out;
  if (i == j) {
    const Vector alpha = 2.0 * X.col(i);
    const double an2 = alpha.squaredNorm();
    if (an2 <= cfg.zero_tolerance * cfg.zero_tolerance) return out;  // cannot happen on the simplex
    const double beta = X.col(i).dot(X.col(i)) + sys.gram()(i, i);
    out.grad_dual_norm_sq = an2;
    out.t = (alpha.dot(X.col(i)) - beta) / an2;
    out.kind = StepKind::Exact;
    const Vector y = X.col(i) - out.t * alpha;
    X.col(i) = simplex_projection(y);
  } else {
    const double denom = X.col(i).squaredNorm() + X.col(j).squaredNorm();
    if (denom <= cfg.zero_tolerance) return out;  // both columns zero: guarded
    out.grad_dual_norm_sq = denom;
    out.t = f / denom;
    out.kind = StepKind::Exact;
    const Vector yi = X.col(i) - out.t * X.col(j);
    const Vector yj = X.col(j) - out.t * X.col(i);
    X.col(i) = simplex_projection(yi);
    X.col(j) = simplex_projection(yj);
  }
  return out;
}

namespace {

int sample_index(const NonlinearSystem& sys, const SolverConfig& cfg, std::mt19937_64& rng) {
  const int n = sys.component_count();
  if (cfg.probabilities.size() == 0) {
    std::uniform_int_distribution<int> unif(0, n - 1);
    return unif(rng);
  }
  if (cfg.probabilities.size() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("SolverConfig: probabilities length must match component count");
  if (cfg.probabilities.minCoeff() < 0.0 || std::abs(cfg.probabilities.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("SolverConfig: probabilities must be nonnegative and sum to 1");
  std::discrete_distribution<int> dist(cfg.probabilities.data(),
                                       cfg.probabilities.data() + cfg.probabilities.size());
  return dist(rng);
}

void commit(SolverState& state, const StepOutcome& out) {
  ++state.k;
  state.last = out;
  state.last_step_kind = out.kind;
  if (out.kind == StepKind::Skipped) ++state.skipped_count;
  if (out.kind == StepKind::Relaxed) ++state.relaxed_count;
  if (!out.feasible) ++state.infeasible_count;
  if (out.used_globalized) ++state.globalized_count;
  if (out.relaxed_fallback) ++state.relaxed_fallback_count;
}

}  // namespace

void nbk_step(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
              SolverState& state) {
  const int i = sample_index(sys, cfg, state.rng);
  commit(state, nbk_update(sys, dgf, cfg, state.pair, i));
}

void rnbk_step(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
               SolverState& state) {
  const int i = sample_index(sys, cfg, state.rng);
  commit(state, rnbk_update(sys, dgf, cfg, state.pair, i));
}

void nk_step(const NonlinearSystem& sys, const SolverConfig& cfg, SolverState& state) {
  const int i = sample_index(sys, cfg, state.rng);
  commit(state, nk_update(sys, cfg, state.pair.x, i));
}

void pocs_step(const LinearSystem& sys, const SolverConfig& cfg, SolverState& state) {
  const int i = sample_index(sys, cfg, state.rng);
  commit(state, pocs_update(sys, cfg, state.pair.x, i));
}

void pnk_step(const LsdSystem& sys, const SolverConfig& cfg, SolverState& state) {
  const int i = sample_index(sys, cfg, state.rng);
  commit(state, pnk_update(sys, cfg, state.pair.x, i));
}

bool fixed_point_check(const NonlinearSystem& sys, const Vector& x, double tol) {
  for (int i = 0; i < sys.component_count(); ++i) {
    if (std::abs(sys.eval_component(i, x)) <= tol) continue;
    if (sys.grad_component(i, x).norm() <= tol) continue;
    return false;
  }
  return true;
}

RunResult run(const NonlinearSystem& sys, const Dgf* dgf, Method method, const SolverConfig& cfg,
              const RecordOptions& rec, SolverState state) {
  const LinearSystem* linear = dynamic_cast<const LinearSystem*>(&sys);
  const LsdSystem* lsd = dynamic_cast<const LsdSystem*>(&sys);
  const bool dual = method == Method::Nbk || method == Method::Rnbk;
  if (dual && dgf == nullptr)
    throw std::invalid_argument("run: nbk/rnbk require a DGF");
  if (dual && state.pair.x_star.size() != sys.dimension())
    throw std::invalid_argument("run: nbk/rnbk require a dual initial state");
  if (method == Method::Pocs && linear == nullptr)
    throw std::invalid_argument("run: pocs requires a linear system");
  if (method == Method::Pnk && lsd == nullptr)
    throw std::invalid_argument("run: pnk requires an LSD system");
  if (state.pair.x.size() != sys.dimension())
    throw std::invalid_argument("run: initial state dimension mismatch");
  if (dgf != nullptr && dgf->dimension() != sys.dimension())
    throw std::invalid_argument("run: DGF dimension mismatch");

  RunResult out;
  double elapsed = 0.0;
  const bool breg_ok = dual && dgf != nullptr && sys.solution().has_value();

  const auto snapshot = [&](std::int64_t k) -> double {
    RunRecord row;
    row.experiment = rec.experiment;
    row.method = method_name(method);
    row.repeat = rec.repeat;
    row.iter = k;
    row.elapsed_s = elapsed;
    double res = kNaN;
    if (rec.with_residual || cfg.stop_residual > 0.0) res = sys.residual_norm(state.pair.x);
    if (rec.with_residual) row.residual = res;
    if (rec.with_dist && sys.solution())
      row.dist_to_sol = (state.pair.x - *sys.solution()).norm();
    if (rec.with_bregman && breg_ok) {
      const double bd = bregman_distance(*dgf, state.pair, *sys.solution());
      if (std::isfinite(bd)) row.bregman_dist = bd;
    }
    out.records.push_back(std::move(row));
    if (rec.observer) rec.observer(state);
    return res;
  };

  double res = snapshot(0);
  bool stopped = cfg.stop_residual > 0.0 && res <= cfg.stop_residual;
  std::int64_t k = 0;
  while (!stopped && k < cfg.max_iterations) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    switch (method) {
      case Method::Nbk: nbk_step(sys, *dgf, cfg, state); break;
      case Method::Rnbk: rnbk_step(sys, *dgf, cfg, state); break;
      case Method::Nk: nk_step(sys, cfg, state); break;
      case Method::Pocs: pocs_step(*linear, cfg, state); break;
      case Method::Pnk: pnk_step(*lsd, cfg, state); break;
    }
    if (rec.timing) {
      elapsed +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    if (k % rec.every == 0 || k == cfg.max_iterations) {
      res = snapshot(k);
      stopped = cfg.stop_residual > 0.0 && res <= cfg.stop_residual;
    }
  }
  if (out.records.back().iter != k) res = snapshot(k);

  out.state = std::move(state);
  out.iterations = k;
  out.elapsed_s = elapsed;
  out.final_residual = std::isnan(res) ? sys.residual_norm(out.state.pair.x) : res;
  out.reached_stop = stopped;
  return out;
}

}  // namespace bregkacz
