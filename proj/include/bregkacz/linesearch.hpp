#pragma once

#include "bregkacz/dgf.hpp"

#include <optional>

namespace bregkacz {

/// Linearization hyperplane {x : <alpha, x> = beta} of one component equation,
/// with alpha = grad f_i(x_k) and beta = <grad f_i(x_k), x_k> - f_i(x_k).
struct Hyperplane {
  Vector alpha;
  double beta = 0.0;
};

struct LineSearchConfig {
  double eps = 1e-9;                  // stop when |g'(t)| < eps
  int max_iters = 100;
  double globalization_h = 0.1;       // H in the damped Newton denominator
  double fallback_t_threshold = 100.0;  // |t| beyond this aborts to the relaxed step
  double feasibility_delta = 1e-12;   // mask |x_i| <= delta in feasibility checks
};

/// Dual line-search objective g(t) = phi*(x* - t alpha) + beta t with its
/// first derivative and, when phi* is twice differentiable, its second.
struct GEval {
  double value = 0.0;
  double derivative = 0.0;
  std::optional<double> second_derivative;
};

GEval g_eval(const Dgf& dgf, const PrimalDualPair& pair, const Hyperplane& hp, double t);

enum class LineSearchStatus {
  Converged,
  MaxIterations,
  ZeroCurvature,     // g'' below 1e-15 at an iterate; switch to the globalized variant
  RelaxedFallback,   // |t| exceeded the threshold; use the relaxed step instead
  NoBracket,         // bisection found no sign change; infeasibility indicator
};

struct LineSearchResult {
  double t = 0.0;
  LineSearchStatus status = LineSearchStatus::MaxIterations;
  int iterations = 0;
  bool converged() const { return status == LineSearchStatus::Converged; }
};

/// Exact minimizer of g(t) = 1/2 ||S_lambda(x* - t alpha)||^2 + beta t by
/// breakpoint sorting, O(d log d). Within a flat-zero stretch of g' the
/// midpoint of the optimal interval is returned. Throws on the (guarded,
/// unreachable for alpha != 0) case that g' never changes sign.
double exact_sorted_solve(double lambda, const Vector& x_star, const Vector& alpha, double beta);

/// Newton iteration t <- t - g'(t)/g''(t) started from f/||alpha||_2^2.
/// Requires a twice differentiable conjugate.
LineSearchResult newton_solve(const Dgf& dgf, const PrimalDualPair& pair, const Hyperplane& hp,
                              const LineSearchConfig& cfg);

/// Damped variant t <- t - g'(t)/(H sqrt(|g'(t)|) + g''(t)); signals
/// RelaxedFallback once |t| exceeds cfg.fallback_t_threshold.
LineSearchResult globalized_newton_solve(const Dgf& dgf, const PrimalDualPair& pair,
                                         const Hyperplane& hp, const LineSearchConfig& cfg);

/// Bracketing bisection on g'; reference oracle for the other solvers.
LineSearchResult bisection_solve(const Dgf& dgf, const PrimalDualPair& pair, const Hyperplane& hp,
                                 const LineSearchConfig& cfg);

/// Whether H(alpha, beta) meets the relative interior of the probability
/// simplex: alpha = beta 1 or some pair of entries straddles beta strictly.
/// Indices with |mask_point_i| <= delta are ignored; an empty mask counts as
/// infeasible.
bool simplex_feasible(const Vector& alpha, double beta, const Vector& mask_point, double delta);

/// Two-fold simplex product version. The mask keeps indices i with
/// |mask_x_i| > delta and |mask_y_i| > delta.
bool double_simplex_feasible(const Vector& alpha1, const Vector& alpha2, double beta,
                             const Vector& mask_x, const Vector& mask_y, double delta);

/// Polyak-like step t = sigma f / ||grad||_*^2; sigma defaults to the DGF's
/// strong-convexity modulus. Throws on a vanishing gradient.
double relaxed_step(const Dgf& dgf, double f_value, const Vector& grad,
                    std::optional<double> sigma = std::nullopt);

}  // namespace bregkacz
