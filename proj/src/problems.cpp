#include "bregkacz/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bregkacz {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 on base xor golden-ratio-spread stream index
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

Vector NonlinearSystem::residual(const Vector& x) const {
  Vector r(component_count());
  for (int i = 0; i < component_count(); ++i) r[i] = eval_component(i, x);
  return r;
}

double NonlinearSystem::residual_norm(const Vector& x) const { return residual(x).norm(); }

void NonlinearSystem::check_component(int i) const {
  if (i < 0 || i >= component_count())
    throw std::out_of_range("NonlinearSystem: component index out of range");
}

void NonlinearSystem::check_dimension(const Vector& x) const {
  if (x.size() != dimension())
    throw std::invalid_argument("NonlinearSystem: dimension mismatch");
}

QuadraticSystem::QuadraticSystem(std::vector<Matrix> A, std::vector<Vector> b, Vector c,
                                 std::optional<Vector> solution)
    : A_(std::move(A)), b_(std::move(b)), c_(std::move(c)) {
  if (A_.empty() || A_.size() != b_.size() || static_cast<Eigen::Index>(A_.size()) != c_.size())
    throw std::invalid_argument("QuadraticSystem: inconsistent component counts");
  dim_ = static_cast<int>(A_.front().rows());
  for (std::size_t i = 0; i < A_.size(); ++i)
    if (A_[i].rows() != dim_ || A_[i].cols() != dim_ || b_[i].size() != dim_)
      throw std::invalid_argument("QuadraticSystem: inconsistent dimensions");
  solution_ = std::move(solution);
}

double QuadraticSystem::eval_component(int i, const Vector& x) const {
  check_component(i);
  check_dimension(x);
  return 0.5 * x.dot(A_[i] * x) + b_[i].dot(x) + c_[i];
}

Vector QuadraticSystem::grad_component(int i, const Vector& x) const {
  check_component(i);
  check_dimension(x);
  return 0.5 * (A_[i] * x + A_[i].transpose() * x) + b_[i];
}

LinearSystem::LinearSystem(Matrix A, Vector b, std::optional<Vector> solution)
    : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) throw std::invalid_argument("LinearSystem: inconsistent sizes");
  solution_ = std::move(solution);
}

double LinearSystem::eval_component(int i, const Vector& x) const {
  check_component(i);
  check_dimension(x);
  return A_.row(i).dot(x) - b_[i];
}

Vector LinearSystem::grad_component(int i, const Vector& x) const {
  check_component(i);
  check_dimension(x);
  return A_.row(i).transpose();
}

LsdSystem::LsdSystem(int r, Matrix gram, std::optional<Vector> solution)
    : r_(r), m_(static_cast<int>(gram.rows())), A_(std::move(gram)) {
  if (r_ < 1 || m_ < 1 || A_.rows() != A_.cols())
    throw std::invalid_argument("LsdSystem: gram matrix must be square");
  solution_ = std::move(solution);
}

double LsdSystem::eval_component(int idx, const Vector& x) const {
  check_component(idx);
  check_dimension(x);
  const auto [i, j] = component_pair(idx);
  const auto X = Eigen::Map<const Matrix>(x.data(), r_, m_);
  return X.col(i).dot(X.col(j)) - A_(i, j);
}

Vector LsdSystem::grad_component(int idx, const Vector& x) const {
  check_component(idx);
  check_dimension(x);
  const auto [i, j] = component_pair(idx);
  const auto X = Eigen::Map<const Matrix>(x.data(), r_, m_);
  Vector g = Vector::Zero(dimension());
  if (i == j) {
    g.segment(static_cast<Eigen::Index>(i) * r_, r_) = 2.0 * X.col(i);
  } else {
    g.segment(static_cast<Eigen::Index>(i) * r_, r_) = X.col(j);
    g.segment(static_cast<Eigen::Index>(j) * r_, r_) = X.col(i);
  }
  return g;
}

PositivePartSystem::PositivePartSystem(const NonlinearSystem& base) : base_(base) {
  solution_ = base.solution();
}

double PositivePartSystem::eval_component(int i, const Vector& x) const {
  return std::max(base_.eval_component(i, x), 0.0);
}

Vector PositivePartSystem::grad_component(int i, const Vector& x) const {
  if (base_.eval_component(i, x) > 0.0) return base_.grad_component(i, x);
  return Vector::Zero(dimension());
}

Dist parse_dist(const std::string& name) {
  if (name == "stdn") return Dist::StdNormal;
  if (name == "u01") return Dist::Unif01;
  if (name == "u09") return Dist::Unif09;
  throw std::invalid_argument("unknown distribution tag: " + name);
}

std::string dist_name(Dist dist) {
  switch (dist) {
    case Dist::StdNormal: return "stdn";
    case Dist::Unif01: return "u01";
    case Dist::Unif09: return "u09";
  }
  return "";
}

QuadraticSystem gen_sparse_quadratic(int n, int d, int nnz, std::uint64_t seed) {
  if (n < 1 || d < 1 || nnz < 0 || nnz > d)
    throw std::invalid_argument("gen_sparse_quadratic: bad sizes");
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector xhat = Vector::Zero(d);
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int k = 0; k < nnz; ++k) {
    double v = normal(rng);
    while (v == 0.0) v = normal(rng);
    xhat[idx[k]] = v;
  }

  std::vector<Matrix> A(n, Matrix(d, d));
  std::vector<Vector> b(n, Vector(d));
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) A[i](r, c) = normal(rng);
    for (int r = 0; r < d; ++r) b[i][r] = normal(rng);
  }
  // c_i cancels the quadratic part at xhat exactly (same evaluation path)
  QuadraticSystem homogeneous(A, b, Vector::Zero(n));
  Vector c(n);
  for (int i = 0; i < n; ++i) c[i] = -homogeneous.eval_component(i, xhat);
  return QuadraticSystem(std::move(A), std::move(b), std::move(c), xhat);
}

LinearSystem gen_simplex_linear(int n, int d, Dist dist, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_simplex_linear: bad sizes");
  auto rng = make_rng(seed);
  Matrix A(n, d);
  switch (dist) {
    case Dist::StdNormal: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = g(rng);
      break;
    }
    case Dist::Unif01: {
      std::uniform_real_distribution<double> g(0.0, 1.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = g(rng);
      break;
    }
    case Dist::Unif09: {
      std::uniform_real_distribution<double> g(0.9, 1.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = g(rng);
      break;
    }
  }
  Vector xhat = sample_simplex_uniform(d, rng);
  Vector b = A * xhat;
  return LinearSystem(std::move(A), std::move(b), xhat);
}

LsdSystem gen_lsd(int r, int m, std::uint64_t seed) {
  if (r < 1 || m < 1) throw std::invalid_argument("gen_lsd: bad sizes");
  auto rng = make_rng(seed);
  Matrix Xhat(r, m);
  for (int j = 0; j < m; ++j) Xhat.col(j) = sample_simplex_uniform(r, rng);
  // fill symmetrically so gram(i,j) and gram(j,i) are the same double
  Matrix gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      const double g = Xhat.col(i).dot(Xhat.col(j));
      gram(i, j) = g;
      gram(j, i) = g;
    }
  Vector sol = Eigen::Map<const Vector>(Xhat.data(), static_cast<Eigen::Index>(r) * m);
  return LsdSystem(r, std::move(gram), sol);
}

Vector simplex_projection(const Vector& y) {
  const Eigen::Index d = y.size();
  std::vector<double> u(y.data(), y.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, mu = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    css += u[j];
    const double cand = (css - 1.0) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) mu = cand;
  }
  return ((y.array() - mu).max(0.0)).matrix();
}

Vector sample_simplex_uniform(int d, std::mt19937_64& rng) {
  if (d < 1) throw std::invalid_argument("sample_simplex_uniform: d must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector e(d);
  for (int i = 0; i < d; ++i) {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    e[i] = -std::log(u);
  }
  return e / e.sum();
}

Vector sample_simplex_uniform(int d, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return sample_simplex_uniform(d, rng);
}

void save_linear_system(const LinearSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_linear_system: cannot open " + path);
  const int n = sys.component_count(), d = sys.dimension();
  out.precision(17);
  out << n << " " << d << "\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) out << (j ? " " : "") << sys.matrix()(i, j);
    out << "\n";
  }
  for (int i = 0; i < n; ++i) out << (i ? " " : "") << sys.rhs()[i];
  out << "\n";
  if (!out) throw std::runtime_error("save_linear_system: write failed");
}

LinearSystem load_linear_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_linear_system: cannot open " + path);
  int n = 0, d = 0;
  if (!(in >> n >> d) || n < 1 || d < 1)
    throw std::runtime_error("load_linear_system: bad header");
  Matrix A(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      if (!(in >> A(i, j))) throw std::runtime_error("load_linear_system: truncated matrix");
  Vector b(n);
  for (int i = 0; i < n; ++i)
    if (!(in >> b[i])) throw std::runtime_error("load_linear_system: truncated rhs");
  return LinearSystem(std::move(A), std::move(b));
}

}  // namespace bregkacz
