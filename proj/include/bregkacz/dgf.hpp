#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace bregkacz {

using Vector = Eigen::VectorXd;

double soft_shrink(double v, double lambda);
Vector soft_shrink(const Vector& v, double lambda);

/// Numerically stable softmax (max-subtraction shift); output is strictly
/// positive and sums to one.
Vector softmax(const Vector& p);
double log_sum_exp(const Vector& p);

/// Distance generating function. One of four shapes:
///   - euclidean:        phi(x) = 1/2 ||x||_2^2
///   - l1_half_square:   phi(x) = lambda ||x||_1 + 1/2 ||x||_2^2
///   - simplex_entropy:  phi(x) = sum x_i log x_i on the probability simplex,
///                       +inf elsewhere
///   - product:          phi(x) = sum_b phi_b(x_b) over contiguous blocks
/// plus an optional positive scale factor (phi -> alpha * phi).
///
/// Descriptors are immutable after construction and safe to share across
/// concurrent solver runs.
class Dgf {
 public:
  enum class Kind { Euclidean, L1HalfSquare, SimplexEntropy, Product };

  static Dgf euclidean(int dim);
  static Dgf l1_half_square(int dim, double lambda);
  static Dgf simplex_entropy(int dim);
  static Dgf product(std::vector<Dgf> blocks);

  /// alpha * phi with alpha > 0. Conjugate, gradients and moduli transform
  /// accordingly; the induced norms do not change.
  Dgf scaled(double alpha) const;

  Kind kind() const { return kind_; }
  int dimension() const { return dim_; }
  double soft_threshold() const { return lambda_; }
  double scale() const { return scale_; }

  /// Strong-convexity modulus w.r.t. the primal norm.
  double sigma() const;
  /// Smoothness constant w.r.t. the primal norm, when phi is smooth.
  std::optional<double> smoothness() const;

  std::string primal_norm() const;
  std::string dual_norm() const;

  int block_count() const;
  const Dgf& block(int b) const;
  int block_offset(int b) const;

  /// phi(x); +inf outside dom phi.
  double value(const Vector& x) const;
  /// phi*(p); finite everywhere.
  double conjugate(const Vector& p) const;
  /// grad phi*(p).
  Vector conjugate_gradient(const Vector& p) const;
  /// <Hess phi*(p) a, a>, or nullopt when phi* is not twice differentiable.
  std::optional<double> conjugate_curvature(const Vector& p, const Vector& a) const;

  /// Squared dual norm ||g||_*^2.
  double dual_norm_sq(const Vector& g) const;
  /// Squared primal norm ||u||^2.
  double primal_norm_sq(const Vector& u) const;

 private:
  Dgf(Kind kind, int dim) : kind_(kind), dim_(dim) {}

  void check_dim(const Vector& v) const;

  Kind kind_;
  int dim_ = 0;
  double lambda_ = 0.0;
  double scale_ = 1.0;
  std::vector<Dgf> blocks_;
  std::vector<int> offsets_;
};

/// Iterate pair (x, x*) with x* in the subdifferential of phi at x and
/// x = grad phi*(x*) maintained as an invariant.
struct PrimalDualPair {
  Vector x;
  Vector x_star;
};

/// Builds the pair from a dual point: x = grad phi*(x_star).
PrimalDualPair make_primal_dual(const Dgf& dgf, Vector x_star);

/// Checks the reconstruction invariant x == grad phi*(x*) entrywise.
bool pair_valid(const Dgf& dgf, const PrimalDualPair& pair, double tol = 1e-12);

/// Bregman distance D_phi^{x*}(x, y) = phi*(x*) - <x*, y> + phi(y).
/// +inf when y lies outside dom phi.
double bregman_distance(const Dgf& dgf, const PrimalDualPair& pair, const Vector& y);

}  // namespace bregkacz
