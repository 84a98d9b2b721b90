#include "bregkacz/linesearch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bregkacz {

namespace {
constexpr double kCurvatureFloor = 1e-15;

double component_value(const PrimalDualPair& pair, const Hyperplane& hp) {
  // f_i(x_k) recovered from beta = <alpha, x_k> - f_i(x_k)
  return hp.alpha.dot(pair.x) - hp.beta;
}
}  // namespace

GEval g_eval(const Dgf& dgf, const PrimalDualPair& pair, const Hyperplane& hp, double t) {
  const Vector p = pair.x_star - t * hp.alpha;
  GEval out;
  out.value = dgf.conjugate(p) + t * hp.beta;
  const Vector gp = dgf.conjugate_gradient(p);
  const double f = component_value(pair, hp);
  // evaluates to exactly -f at t = 0 since gp reproduces pair.x bit for bit
  out.derivative = (pair.x - gp).dot(hp.alpha) - f;
  out.second_derivative = dgf.conjugate_curvature(p, hp.alpha);
  return out;
}

double exact_sorted_solve(double lambda, const Vector& x_star, const Vector& alpha, double beta) {
  if (x_star.size() != alpha.size())
    throw std::invalid_argument("exact_sorted_solve: dimension mismatch");
  if (lambda < 0.0) throw std::invalid_argument("exact_sorted_solve: lambda must be nonnegative");

  // g'(t) = beta - sum_i alpha_i S_lambda(x*_i - t alpha_i) is piecewise
  // linear and nondecreasing: slope A, intercept B per segment, with
  // breakpoints where a coordinate enters or leaves the shrinkage band.
  // The active-coordinate count makes the zero-slope middle region exact:
  // there g' is identically beta.
  struct Event {
    double t;
    double dA;
    double dB;
    int dn;
  };
  std::vector<Event> events;
  events.reserve(2 * static_cast<std::size_t>(alpha.size()));

  double A = 0.0;
  double B = beta;
  int n_active = 0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    if (a == 0.0) continue;
    const double xs = x_star[i];
    A += a * a;
    B += -a * xs + lambda * std::abs(a);  // active on the sign(a) side as t -> -inf
    ++n_active;
    if (lambda > 0.0) {
      const double t1 = (xs - lambda) / a;
      const double t2 = (xs + lambda) / a;
      events.push_back({std::min(t1, t2), -a * a, a * xs - lambda * std::abs(a), -1});
      events.push_back({std::max(t1, t2), a * a, -a * xs - lambda * std::abs(a), +1});
    }
  }
  if (n_active == 0) throw std::runtime_error("exact_sorted_solve: alpha is zero");
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });

  struct Segment {
    double lo, hi, A, B;
    int n;
  };
  std::vector<Segment> segs;
  segs.reserve(events.size() + 1);
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t e2 = 0; e2 <= events.size(); ++e2) {
    const double hi =
        e2 < events.size() ? events[e2].t : std::numeric_limits<double>::infinity();
    segs.push_back({lo, hi, n_active == 0 ? 0.0 : A, n_active == 0 ? beta : B, n_active});
    if (e2 < events.size()) {
      A += events[e2].dA;
      B += events[e2].dB;
      n_active += events[e2].dn;
      lo = events[e2].t;
    }
  }

  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Segment& seg = segs[s];
    double left;
    if (seg.n > 0) {
      const double root = -seg.B / seg.A;
      if (!(root >= seg.lo && root <= seg.hi)) continue;
      left = root;
    } else if (seg.B == 0.0) {
      left = seg.lo;  // flat-zero stretch; its left end is a minimizer
    } else {
      continue;
    }
    // the minimizer set may extend over flat-zero segments to the right;
    // return the midpoint of the optimal interval
    double right = left;
    for (std::size_t j = s + 1; j < segs.size(); ++j) {
      if (segs[j].n == 0 && segs[j].B == 0.0 && std::isfinite(segs[j].hi)) {
        right = segs[j].hi;
      } else {
        break;
      }
    }
    if (seg.n == 0) right = std::max(right, seg.hi);
    return 0.5 * (left + right);
  }
  throw std::runtime_error("exact_sorted_solve: derivative never changes sign");
}

LineSearchResult newton_solve(const Dgf& dgf, const PrimalDualPair& pair, const Hyperplane& hp,
                              const LineSearchConfig& cfg) {
  const double f = component_value(pair, hp);
  double t = f / hp.alpha.squaredNorm();
  for (int l = 0; l <= cfg.max_iters; ++l) {
    const GEval e = g_eval(dgf, pair, hp, t);
    if (std::abs(e.derivative) < cfg.eps) return {t, LineSearchStatus::Converged, l};
    if (l == cfg.max_iters) break;
    if (!e.second_derivative)
      throw std::invalid_argument("newton_solve: conjugate is not twice differentiable");
    if (*e.second_derivative < kCurvatureFloor)
      return {t, LineSearchStatus::ZeroCurvature, l};
    t -= e.derivative / *e.second_derivative;
    if (!std::isfinite(t)) return {t, LineSearchStatus::ZeroCurvature, l};
  }
  return {t, LineSearchStatus::MaxIterations, cfg.max_iters};
}

LineSearchResult globalized_newton_solve(const Dgf& dgf, const PrimalDualPair& pair,
                                         const Hyperplane& hp, const LineSearchConfig& cfg) {
  const double f = component_value(pair, hp);
  double t = f / hp.alpha.squaredNorm();
  for (int l = 0; l <= cfg.max_iters; ++l) {
    if (std::abs(t) > cfg.fallback_t_threshold)
      return {t, LineSearchStatus::RelaxedFallback, l};
    const GEval e = g_eval(dgf, pair, hp, t);
    if (std::abs(e.derivative) < cfg.eps) return {t, LineSearchStatus::Converged, l};
    if (l == cfg.max_iters) break;
    if (!e.second_derivative)
      throw std::invalid_argument("globalized_newton_solve: conjugate is not twice differentiable");
    const double denom =
        cfg.globalization_h * std::sqrt(std::abs(e.derivative)) + *e.second_derivative;
    if (denom < kCurvatureFloor) return {t, LineSearchStatus::ZeroCurvature, l};
    t -= e.derivative / denom;
    if (!std::isfinite(t)) return {t, LineSearchStatus::ZeroCurvature, l};
  }
  return {t, LineSearchStatus::MaxIterations, cfg.max_iters};
}

LineSearchResult bisection_solve(const Dgf& dgf, const PrimalDualPair& pair, const Hyperplane& hp,
                                 const LineSearchConfig& cfg) {
  const auto dg = [&](double t) { return g_eval(dgf, pair, hp, t).derivative; };
  int iters = 0;
  const double g0 = dg(0.0);
  if (std::abs(g0) < cfg.eps) return {0.0, LineSearchStatus::Converged, iters};

  // expand geometrically to the side where the nondecreasing g' crosses zero
  const double dir = g0 < 0.0 ? 1.0 : -1.0;
  double a = 0.0, ga = g0;
  double b = 0.0, gb = g0;
  bool bracketed = false;
  double width = 1.0;
  while (true) {
    const double t = dir * width;
    const double gt = dg(t);
    ++iters;
    if (std::abs(gt) < cfg.eps) return {t, LineSearchStatus::Converged, iters};
    if ((g0 < 0.0) != (gt < 0.0)) {
      a = std::min(0.0, t);
      b = std::max(0.0, t);
      ga = dir > 0 ? g0 : gt;
      gb = dir > 0 ? gt : g0;
      bracketed = true;
      break;
    }
    a = std::min(a, t);
    b = std::max(b, t);
    if (width >= cfg.fallback_t_threshold) break;
    width = std::min(2.0 * width, cfg.fallback_t_threshold);
  }
  if (!bracketed) return {dir * width, LineSearchStatus::NoBracket, iters};

  (void)ga;
  double mid = 0.5 * (a + b);
  while (b - a >= 1e-14) {
    mid = 0.5 * (a + b);
    const double gm = dg(mid);
    ++iters;
    if (std::abs(gm) < cfg.eps) return {mid, LineSearchStatus::Converged, iters};
    if ((gm < 0.0) == (gb < 0.0)) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return {mid, LineSearchStatus::Converged, iters};
}

namespace {

bool masked_indices(const Vector& mask_point, double delta, std::vector<int>& idx) {
  idx.clear();
  for (Eigen::Index i = 0; i < mask_point.size(); ++i)
    if (std::abs(mask_point[i]) > delta) idx.push_back(static_cast<int>(i));
  return !idx.empty();
}

struct Range {
  double lo, hi;
  bool constant(double tol = 1e-12) const { return hi - lo <= tol; }
  double mid() const { return 0.5 * (lo + hi); }
};

Range masked_range(const Vector& v, const std::vector<int>& idx) {
  Range r{v[idx[0]], v[idx[0]]};
  for (int i : idx) {
    r.lo = std::min(r.lo, v[i]);
    r.hi = std::max(r.hi, v[i]);
  }
  return r;
}

}  // namespace

bool simplex_feasible(const Vector& alpha, double beta, const Vector& mask_point, double delta) {
  if (alpha.size() != mask_point.size())
    throw std::invalid_argument("simplex_feasible: dimension mismatch");
  std::vector<int> idx;
  if (!masked_indices(mask_point, delta, idx)) return false;  // empty mask: infeasible
  const Range r = masked_range(alpha, idx);
  if (std::max(std::abs(r.lo - beta), std::abs(r.hi - beta)) <= 1e-12) return true;  // alpha = beta 1
  return r.lo < beta && beta < r.hi;
}

bool double_simplex_feasible(const Vector& alpha1, const Vector& alpha2, double beta,
                             const Vector& mask_x, const Vector& mask_y, double delta) {
  if (alpha1.size() != alpha2.size() || mask_x.size() != alpha1.size() ||
      mask_y.size() != alpha2.size())
    throw std::invalid_argument("double_simplex_feasible: dimension mismatch");
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < mask_x.size(); ++i)
    if (std::abs(mask_x[i]) > delta && std::abs(mask_y[i]) > delta)
      idx.push_back(static_cast<int>(i));
  if (idx.empty()) return false;

  const Range r1 = masked_range(alpha1, idx);
  const Range r2 = masked_range(alpha2, idx);
  if (r1.constant() && r2.constant())
    return std::abs(r1.mid() + r2.mid() - beta) <= 1e-12;
  if (r1.constant())
    return r2.lo < beta - r1.mid() && beta - r1.mid() < r2.hi;
  if (r2.constant())
    return r1.lo < beta - r2.mid() && beta - r2.mid() < r1.hi;
  // open intervals ]min a1, max a1[ and ]beta - max a2, beta - min a2[
  return std::max(r1.lo, beta - r2.hi) < std::min(r1.hi, beta - r2.lo);
}

double relaxed_step(const Dgf& dgf, double f_value, const Vector& grad,
                    std::optional<double> sigma) {
  const double dn = dgf.dual_norm_sq(grad);
  if (dn <= 0.0) throw std::invalid_argument("relaxed_step: zero gradient");
  return sigma.value_or(dgf.sigma()) * f_value / dn;
}

}  // namespace bregkacz
