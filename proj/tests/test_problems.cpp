#include <doctest.h>

#include "bregkacz/problems.hpp"

#include <cmath>
#include <cstdio>
#include <random>

using namespace bregkacz;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector random_vector(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = normal(rng);
  return v;
}

void check_gradients_fd(const NonlinearSystem& sys, std::mt19937_64& rng, int points) {
  const double h = 1e-6;
  for (int p = 0; p < points; ++p) {
    const Vector x = random_vector(rng, sys.dimension());
    std::uniform_int_distribution<int> pick(0, sys.component_count() - 1);
    const int i = pick(rng);
    const Vector g = sys.grad_component(i, x);
    for (int j = 0; j < sys.dimension(); ++j) {
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (sys.eval_component(i, xp) - sys.eval_component(i, xm)) / (2 * h);
      CHECK(std::abs(fd - g[j]) <= 1e-4 * std::max(1.0, std::abs(g[j])));
    }
  }
}

// brute-force simplex projection for d <= 4: try every active set
Vector simplex_projection_bruteforce(const Vector& y) {
  const int d = static_cast<int>(y.size());
  Vector best = Vector::Zero(d);
  double best_dist = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << d); ++mask) {
    int k = 0;
    double sum = 0.0;
    for (int i = 0; i < d; ++i)
      if (mask & (1 << i)) {
        ++k;
        sum += y[i];
      }
    const double mu = (sum - 1.0) / k;
    Vector cand = Vector::Zero(d);
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      if (mask & (1 << i)) {
        cand[i] = y[i] - mu;
        if (cand[i] < -1e-12) ok = false;
      }
    }
    if (!ok) continue;
    const double dist = (cand - y).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = cand;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("component oracles on hand-checked instances") {
  const Matrix A = (Matrix(2, 2) << 2, 0, 0, 2).finished();
  const QuadraticSystem quad({A}, {Vector::Zero(2)}, vec({-1}));
  CHECK(quad.eval_component(0, vec({1, 0})) == doctest::Approx(0.0));
  CHECK(quad.grad_component(0, vec({1, 0})).isApprox(vec({2, 0}), 1e-15));

  const LinearSystem lin((Matrix(1, 2) << 1, 0).finished(), vec({1}));
  CHECK(lin.eval_component(0, vec({0, 0})) == doctest::Approx(-1.0));
  CHECK(lin.grad_component(0, vec({0, 0})).isApprox(vec({1, 0}), 1e-15));

  Matrix gram(2, 2);
  gram << 0.5, 0.5, 0.5, 0.5;
  const LsdSystem lsd(2, gram);
  const Vector x = vec({0.5, 0.5, 0.5, 0.5});
  CHECK(lsd.eval_component(lsd.cols() * 0 + 1, x) == doctest::Approx(0.0));
  CHECK_THROWS_AS((void)lsd.eval_component(99, x), std::out_of_range);
}

TEST_CASE("lsd gradient touches only the sampled columns") {
  auto rng = make_rng(201);
  const LsdSystem sys = gen_lsd(3, 4, 42);
  const Vector x = random_vector(rng, sys.dimension());
  SUBCASE("diagonal component") {
    const Vector g = sys.grad_component(1 * sys.cols() + 1, x);
    CHECK(g.segment(3, 3).isApprox(2.0 * x.segment(3, 3), 1e-15));
    CHECK(g.head(3).isZero());
    CHECK(g.tail(6).isZero());
  }
  SUBCASE("off-diagonal component") {
    const Vector g = sys.grad_component(0 * sys.cols() + 2, x);
    CHECK(g.head(3).isApprox(x.segment(6, 3), 1e-15));
    CHECK(g.segment(6, 3).isApprox(x.head(3), 1e-15));
    CHECK(g.segment(3, 3).isZero());
  }
}

TEST_CASE("gradients match central finite differences") {
  auto rng = make_rng(211);
  const QuadraticSystem quad = gen_sparse_quadratic(6, 5, 2, 1);
  check_gradients_fd(quad, rng, 100);
  const LinearSystem lin = gen_simplex_linear(6, 5, Dist::StdNormal, 2);
  check_gradients_fd(lin, rng, 100);
  const LsdSystem lsd = gen_lsd(4, 3, 3);
  check_gradients_fd(lsd, rng, 100);
}

TEST_CASE("sparse quadratic generator plants an exact solution") {
  const QuadraticSystem sys = gen_sparse_quadratic(20, 10, 3, 7);
  REQUIRE(sys.solution().has_value());
  const Vector& xhat = *sys.solution();
  CHECK((xhat.array() != 0.0).count() == 3);
  CHECK(sys.residual(xhat).lpNorm<Eigen::Infinity>() < 1e-9);

  const QuadraticSystem dense = gen_sparse_quadratic(4, 6, 6, 7);
  CHECK((dense.solution()->array() != 0.0).count() == 6);

  // determinism: identical draws for identical seeds
  const QuadraticSystem again = gen_sparse_quadratic(20, 10, 3, 7);
  CHECK(*again.solution() == xhat);
  auto rng = make_rng(221);
  const Vector x = random_vector(rng, 10);
  for (int i = 0; i < sys.component_count(); ++i)
    CHECK(sys.eval_component(i, x) == again.eval_component(i, x));
}

TEST_CASE("simplex linear generator respects the distribution and plants a solution") {
  const LinearSystem sys = gen_simplex_linear(8, 5, Dist::Unif09, 9);
  CHECK(sys.matrix().minCoeff() >= 0.9);
  CHECK(sys.matrix().maxCoeff() <= 1.0);
  REQUIRE(sys.solution().has_value());
  const Vector& xhat = *sys.solution();
  CHECK(xhat.minCoeff() > 0.0);
  CHECK(std::abs(xhat.sum() - 1.0) < 1e-12);
  CHECK(sys.residual(xhat).lpNorm<Eigen::Infinity>() < 1e-10);

  const LinearSystem u01 = gen_simplex_linear(8, 5, Dist::Unif01, 9);
  CHECK(u01.matrix().minCoeff() >= 0.0);
  CHECK(u01.matrix().maxCoeff() <= 1.0);
}

TEST_CASE("lsd generator produces a symmetric gram matrix in the unit box") {
  const LsdSystem sys = gen_lsd(6, 8, 11);
  CHECK(sys.gram() == sys.gram().transpose());
  CHECK(sys.gram().minCoeff() >= 0.0);
  CHECK(sys.gram().maxCoeff() <= 1.0);
  REQUIRE(sys.solution().has_value());
  CHECK(sys.residual(*sys.solution()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("simplex projection on hand-checked points") {
  CHECK(simplex_projection(vec({0.5, 0.5})).isApprox(vec({0.5, 0.5}), 1e-15));
  CHECK(simplex_projection(vec({2, 0})).isApprox(vec({1, 0}), 1e-15));
  CHECK(simplex_projection(vec({1, 0.5})).isApprox(vec({0.75, 0.25}), 1e-12));
}

TEST_CASE("simplex projection invariants and brute-force agreement") {
  auto rng = make_rng(231);
  for (int it = 0; it < 500; ++it) {
    const int d = 2 + static_cast<int>(it % 3);
    const Vector y = random_vector(rng, d, 2.0);
    const Vector x = simplex_projection(y);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(std::abs(x.sum() - 1.0) < 1e-12);
    CHECK((simplex_projection(x) - x).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((x - simplex_projection_bruteforce(y)).lpNorm<Eigen::Infinity>() < 1e-10);
  }
  for (int it = 0; it < 100; ++it) {
    const Vector y = random_vector(rng, 50, 3.0);
    const Vector x = simplex_projection(y);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(std::abs(x.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("uniform simplex sampling") {
  CHECK(sample_simplex_uniform(1, std::uint64_t{5}) == vec({1}));
  auto rng = make_rng(241);
  Vector mean = Vector::Zero(3);
  const int samples = 100000;
  for (int it = 0; it < samples; ++it) {
    const Vector x = sample_simplex_uniform(3, rng);
    CHECK(std::abs(x.sum() - 1.0) < 1e-12);
    CHECK(x.minCoeff() > 0.0);
    mean += x;
  }
  mean /= samples;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - 1.0 / 3.0) < 0.01);
}

TEST_CASE("linear system text round trip") {
  const LinearSystem sys = gen_simplex_linear(4, 3, Dist::StdNormal, 13);
  const std::string path = "test_linear_system.txt";
  save_linear_system(sys, path);
  const LinearSystem back = load_linear_system(path);
  CHECK(back.matrix() == sys.matrix());
  CHECK(back.rhs() == sys.rhs());
  std::remove(path.c_str());
}

TEST_CASE("positive part wrapper clips values and gradients") {
  const LinearSystem lin((Matrix(1, 2) << 1, 0).finished(), vec({1}));
  const PositivePartSystem pos(lin);
  CHECK(pos.eval_component(0, vec({3, 0})) == doctest::Approx(2.0));
  CHECK(pos.eval_component(0, vec({0, 0})) == 0.0);
  CHECK(pos.grad_component(0, vec({3, 0})).isApprox(vec({1, 0}), 1e-15));
  CHECK(pos.grad_component(0, vec({0, 0})).isZero());
}

TEST_CASE("derived seeds separate streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
}
