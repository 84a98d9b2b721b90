#pragma once

#include "bregkacz/dgf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace bregkacz {

using Matrix = Eigen::MatrixXd;

/// splitmix64-derived stream seed; the canonical way the harness and
/// generators fan one base seed out into independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
std::mt19937_64 make_rng(std::uint64_t seed);

/// Component-oracle view of a nonlinear system f(x) = 0 with n components in
/// d variables. Systems are immutable after construction.
class NonlinearSystem {
 public:
  virtual ~NonlinearSystem() = default;
  virtual int component_count() const = 0;
  virtual int dimension() const = 0;
  virtual double eval_component(int i, const Vector& x) const = 0;
  virtual Vector grad_component(int i, const Vector& x) const = 0;

  const std::optional<Vector>& solution() const { return solution_; }

  Vector residual(const Vector& x) const;
  double residual_norm(const Vector& x) const;

 protected:
  void check_component(int i) const;
  void check_dimension(const Vector& x) const;
  std::optional<Vector> solution_;
};

/// f_i(x) = 1/2 <x, A_i x> + <b_i, x> + c_i with possibly non-symmetric A_i;
/// grad f_i(x) = 1/2 (A_i + A_i^T) x + b_i.
class QuadraticSystem : public NonlinearSystem {
 public:
  QuadraticSystem(std::vector<Matrix> A, std::vector<Vector> b, Vector c,
                  std::optional<Vector> solution = std::nullopt);

  int component_count() const override { return static_cast<int>(A_.size()); }
  int dimension() const override { return dim_; }
  double eval_component(int i, const Vector& x) const override;
  Vector grad_component(int i, const Vector& x) const override;

 private:
  std::vector<Matrix> A_;
  std::vector<Vector> b_;
  Vector c_;
  int dim_ = 0;
};

/// f_i(x) = <a_i, x> - b_i.
class LinearSystem : public NonlinearSystem {
 public:
  LinearSystem(Matrix A, Vector b, std::optional<Vector> solution = std::nullopt);

  int component_count() const override { return static_cast<int>(A_.rows()); }
  int dimension() const override { return static_cast<int>(A_.cols()); }
  double eval_component(int i, const Vector& x) const override;
  Vector grad_component(int i, const Vector& x) const override;

  const Matrix& matrix() const { return A_; }
  const Vector& rhs() const { return b_; }

 private:
  Matrix A_;
  Vector b_;
};

/// Left stochastic decomposition: find X in (Delta^{r-1})^m with X^T X = A.
/// Components are pairs (i, j) in {1..m}^2 flattened as i*m + j, with
/// f_{ij}(X) = <X_:,i, X_:,j> - A_{ij}. Variables are vec(X) column-major.
class LsdSystem : public NonlinearSystem {
 public:
  LsdSystem(int r, Matrix gram, std::optional<Vector> solution = std::nullopt);

  int component_count() const override { return m_ * m_; }
  int dimension() const override { return r_ * m_; }
  double eval_component(int i, const Vector& x) const override;
  Vector grad_component(int i, const Vector& x) const override;

  int rows() const { return r_; }
  int cols() const { return m_; }
  const Matrix& gram() const { return A_; }
  std::pair<int, int> component_pair(int idx) const { return {idx / m_, idx % m_}; }

 private:
  int r_ = 0, m_ = 0;
  Matrix A_;
};

/// f_i^+ = max(f_i, 0) with the gradient of f_i wherever f_i > 0 and zero
/// otherwise. Keeps the base system alive by reference.
class PositivePartSystem : public NonlinearSystem {
 public:
  explicit PositivePartSystem(const NonlinearSystem& base);
  int component_count() const override { return base_.component_count(); }
  int dimension() const override { return base_.dimension(); }
  double eval_component(int i, const Vector& x) const override;
  Vector grad_component(int i, const Vector& x) const override;

 private:
  const NonlinearSystem& base_;
};

enum class Dist { StdNormal, Unif01, Unif09 };
Dist parse_dist(const std::string& name);
std::string dist_name(Dist dist);

/// Random quadratic system with a planted sparse solution: data entries are
/// standard normal and c_i makes f_i vanish at the planted point.
QuadraticSystem gen_sparse_quadratic(int n, int d, int nnz, std::uint64_t seed);

/// Random linear system with b = A xhat for xhat uniform on the simplex.
LinearSystem gen_simplex_linear(int n, int d, Dist dist, std::uint64_t seed);

/// Random LSD instance A = Xhat^T Xhat with uniformly sampled simplex columns.
LsdSystem gen_lsd(int r, int m, std::uint64_t seed);

/// Euclidean projection onto the probability simplex, sort-based.
Vector simplex_projection(const Vector& y);

/// Exact uniform sampling on Delta^{d-1} via normalized exponential spacings.
Vector sample_simplex_uniform(int d, std::mt19937_64& rng);
Vector sample_simplex_uniform(int d, std::uint64_t seed);

/// Plain-text round trip: first line "n d", then n rows of the matrix, then
/// one line with the n right-hand side values.
void save_linear_system(const LinearSystem& sys, const std::string& path);
LinearSystem load_linear_system(const std::string& path);

}  // namespace bregkacz
