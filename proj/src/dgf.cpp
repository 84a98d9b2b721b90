#include "bregkacz/dgf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bregkacz {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// tolerance on the simplex sum when testing domain membership
constexpr double kSimplexSumTol = 1e-9;
}  // namespace

double soft_shrink(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

Vector soft_shrink(const Vector& v, double lambda) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft_shrink(v[i], lambda);
  return out;
}

Vector softmax(const Vector& p) {
  const double shift = p.maxCoeff();
  Vector e = (p.array() - shift).exp();
  return e / e.sum();
}

double log_sum_exp(const Vector& p) {
  const double shift = p.maxCoeff();
  return shift + std::log((p.array() - shift).exp().sum());
}

Dgf Dgf::euclidean(int dim) {
  if (dim < 1) throw std::invalid_argument("Dgf: dimension must be positive");
  return Dgf(Kind::Euclidean, dim);
}

Dgf Dgf::l1_half_square(int dim, double lambda) {
  if (dim < 1) throw std::invalid_argument("Dgf: dimension must be positive");
  if (lambda < 0.0) throw std::invalid_argument("Dgf: lambda must be nonnegative");
  Dgf d(Kind::L1HalfSquare, dim);
  d.lambda_ = lambda;
  return d;
}

Dgf Dgf::simplex_entropy(int dim) {
  if (dim < 1) throw std::invalid_argument("Dgf: dimension must be positive");
  return Dgf(Kind::SimplexEntropy, dim);
}

Dgf Dgf::product(std::vector<Dgf> blocks) {
  if (blocks.empty()) throw std::invalid_argument("Dgf: product needs at least one block");
  int dim = 0;
  std::vector<int> offsets;
  offsets.reserve(blocks.size());
  for (const Dgf& b : blocks) {
    offsets.push_back(dim);
    dim += b.dimension();
  }
  Dgf d(Kind::Product, dim);
  d.blocks_ = std::move(blocks);
  d.offsets_ = std::move(offsets);
  return d;
}

Dgf Dgf::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("Dgf: scale must be positive");
  Dgf d = *this;
  d.scale_ *= alpha;
  return d;
}

double Dgf::sigma() const {
  double base = 1.0;
  if (kind_ == Kind::Product) {
    base = kInf;
    for (const Dgf& b : blocks_) base = std::min(base, b.sigma());
  }
  return scale_ * base;
}

std::optional<double> Dgf::smoothness() const {
  switch (kind_) {
    case Kind::Euclidean:
      return scale_;
    case Kind::L1HalfSquare:
      if (lambda_ == 0.0) return scale_;
      return std::nullopt;
    case Kind::SimplexEntropy:
      return std::nullopt;
    case Kind::Product: {
      double m = 0.0;
      for (const Dgf& b : blocks_) {
        auto mb = b.smoothness();
        if (!mb) return std::nullopt;
        m = std::max(m, *mb);
      }
      return scale_ * m;
    }
  }
  return std::nullopt;
}

std::string Dgf::primal_norm() const {
  switch (kind_) {
    case Kind::Euclidean:
    case Kind::L1HalfSquare:
      return "l2";
    case Kind::SimplexEntropy:
      return "l1";
    case Kind::Product:
      return "mixed";
  }
  return "";
}

std::string Dgf::dual_norm() const {
  switch (kind_) {
    case Kind::Euclidean:
    case Kind::L1HalfSquare:
      return "l2";
    case Kind::SimplexEntropy:
      return "linf";
    case Kind::Product:
      return "mixed";
  }
  return "";
}

int Dgf::block_count() const {
  return kind_ == Kind::Product ? static_cast<int>(blocks_.size()) : 1;
}

const Dgf& Dgf::block(int b) const {
  if (kind_ != Kind::Product) {
    if (b != 0) throw std::out_of_range("Dgf: block index");
    return *this;
  }
  return blocks_.at(static_cast<std::size_t>(b));
}

int Dgf::block_offset(int b) const {
  if (kind_ != Kind::Product) {
    if (b != 0) throw std::out_of_range("Dgf: block index");
    return 0;
  }
  return offsets_.at(static_cast<std::size_t>(b));
}

void Dgf::check_dim(const Vector& v) const {
  if (v.size() != dim_) throw std::invalid_argument("Dgf: dimension mismatch");
}

double Dgf::value(const Vector& x) const {
  check_dim(x);
  switch (kind_) {
    case Kind::Euclidean:
      return scale_ * 0.5 * x.squaredNorm();
    case Kind::L1HalfSquare:
      return scale_ * (lambda_ * x.lpNorm<1>() + 0.5 * x.squaredNorm());
    case Kind::SimplexEntropy: {
      double s = 0.0, ent = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        if (xi < 0.0) return kInf;
        if (xi > 0.0) ent += xi * std::log(xi);  // 0 log 0 := 0
        s += xi;
      }
      if (std::abs(s - 1.0) > kSimplexSumTol) return kInf;
      return scale_ * ent;
    }
    case Kind::Product: {
      double v = 0.0;
      for (int b = 0; b < block_count(); ++b) {
        const double vb = blocks_[b].value(x.segment(offsets_[b], blocks_[b].dimension()));
        if (vb == kInf) return kInf;
        v += vb;
      }
      return scale_ * v;
    }
  }
  return kInf;
}

double Dgf::conjugate(const Vector& p) const {
  check_dim(p);
  const Vector q = scale_ == 1.0 ? p : Vector(p / scale_);
  double base = 0.0;
  switch (kind_) {
    case Kind::Euclidean:
      base = 0.5 * q.squaredNorm();
      break;
    case Kind::L1HalfSquare:
      base = 0.5 * soft_shrink(q, lambda_).squaredNorm();
      break;
    case Kind::SimplexEntropy:
      base = log_sum_exp(q);
      break;
    case Kind::Product:
      for (int b = 0; b < block_count(); ++b)
        base += blocks_[b].conjugate(q.segment(offsets_[b], blocks_[b].dimension()));
      break;
  }
  return scale_ * base;
}

Vector Dgf::conjugate_gradient(const Vector& p) const {
  check_dim(p);
  const Vector q = scale_ == 1.0 ? p : Vector(p / scale_);
  switch (kind_) {
    case Kind::Euclidean:
      return q;
    case Kind::L1HalfSquare:
      return soft_shrink(q, lambda_);
    case Kind::SimplexEntropy:
      return softmax(q);
    case Kind::Product: {
      Vector out(dim_);
      for (int b = 0; b < block_count(); ++b)
        out.segment(offsets_[b], blocks_[b].dimension()) =
            blocks_[b].conjugate_gradient(q.segment(offsets_[b], blocks_[b].dimension()));
      return out;
    }
  }
  return q;
}

std::optional<double> Dgf::conjugate_curvature(const Vector& p, const Vector& a) const {
  check_dim(p);
  check_dim(a);
  const Vector q = scale_ == 1.0 ? p : Vector(p / scale_);
  std::optional<double> base;
  switch (kind_) {
    case Kind::Euclidean:
      base = a.squaredNorm();
      break;
    case Kind::L1HalfSquare:
      if (lambda_ == 0.0) base = a.squaredNorm();
      break;
    case Kind::SimplexEntropy: {
      // Hess phi*(q) = diag(s) - s s^T with s = softmax(q)
      const Vector s = softmax(q);
      const double mean = s.dot(a);
      double c = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) c += s[i] * (a[i] - mean) * (a[i] - mean);
      base = c;
      break;
    }
    case Kind::Product: {
      double c = 0.0;
      for (int b = 0; b < block_count(); ++b) {
        auto cb = blocks_[b].conjugate_curvature(
            q.segment(offsets_[b], blocks_[b].dimension()),
            a.segment(offsets_[b], blocks_[b].dimension()));
        if (!cb) return std::nullopt;
        c += *cb;
      }
      base = c;
      break;
    }
  }
  if (!base) return std::nullopt;
  return *base / scale_;
}

double Dgf::dual_norm_sq(const Vector& g) const {
  check_dim(g);
  switch (kind_) {
    case Kind::Euclidean:
    case Kind::L1HalfSquare:
      return g.squaredNorm();
    case Kind::SimplexEntropy: {
      const double m = g.lpNorm<Eigen::Infinity>();
      return m * m;
    }
    case Kind::Product: {
      double s = 0.0;
      for (int b = 0; b < block_count(); ++b)
        s += blocks_[b].dual_norm_sq(g.segment(offsets_[b], blocks_[b].dimension()));
      return s;
    }
  }
  return 0.0;
}

double Dgf::primal_norm_sq(const Vector& u) const {
  check_dim(u);
  switch (kind_) {
    case Kind::Euclidean:
    case Kind::L1HalfSquare:
      return u.squaredNorm();
    case Kind::SimplexEntropy: {
      const double m = u.lpNorm<1>();
      return m * m;
    }
    case Kind::Product: {
      double s = 0.0;
      for (int b = 0; b < block_count(); ++b)
        s += blocks_[b].primal_norm_sq(u.segment(offsets_[b], blocks_[b].dimension()));
      return s;
    }
  }
  return 0.0;
}

PrimalDualPair make_primal_dual(const Dgf& dgf, Vector x_star) {
  PrimalDualPair pair;
  pair.x = dgf.conjugate_gradient(x_star);
  pair.x_star = std::move(x_star);
  return pair;
}

bool pair_valid(const Dgf& dgf, const PrimalDualPair& pair, double tol) {
  if (pair.x.size() != dgf.dimension() || pair.x_star.size() != dgf.dimension()) return false;
  const Vector rec = dgf.conjugate_gradient(pair.x_star);
  return (rec - pair.x).lpNorm<Eigen::Infinity>() <= tol;
}

namespace {

// Entropy blocks are evaluated in KL form, which agrees with the conjugate
// rewriting for valid pairs but avoids cancellation when x* has large entries.
double bregman_impl(const Dgf& dgf, const Vector& x, const Vector& x_star, const Vector& y) {
  if (dgf.scale() != 1.0) {
    Dgf base = dgf.scaled(1.0 / dgf.scale());
    return dgf.scale() * bregman_impl(base, x, Vector(x_star / dgf.scale()), y);
  }
  switch (dgf.kind()) {
    case Dgf::Kind::SimplexEntropy: {
      double s = 0.0, kl = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] < 0.0) return std::numeric_limits<double>::infinity();
        if (y[i] > 0.0) kl += y[i] * std::log(y[i] / x[i]);
        s += y[i];
      }
      if (std::abs(s - 1.0) > kSimplexSumTol) return std::numeric_limits<double>::infinity();
      return kl;
    }
    case Dgf::Kind::Product: {
      double d = 0.0;
      for (int b = 0; b < dgf.block_count(); ++b) {
        const int off = dgf.block_offset(b);
        const int n = dgf.block(b).dimension();
        const double db = bregman_impl(dgf.block(b), x.segment(off, n), x_star.segment(off, n),
                                       y.segment(off, n));
        if (db == std::numeric_limits<double>::infinity()) return db;
        d += db;
      }
      return d;
    }
    default: {
      const double vy = dgf.value(y);
      if (vy == std::numeric_limits<double>::infinity()) return vy;
      return dgf.conjugate(x_star) - x_star.dot(y) + vy;
    }
  }
}

}  // namespace

double bregman_distance(const Dgf& dgf, const PrimalDualPair& pair, const Vector& y) {
  if (y.size() != dgf.dimension()) throw std::invalid_argument("bregman_distance: dimension mismatch");
  return bregman_impl(dgf, pair.x, pair.x_star, y);
}

}  // namespace bregkacz
