#include <complex>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "kinkbeam/tridiagonal.hpp"

using namespace kinkbeam;

namespace {

TridiagonalOperator random_hermitian(std::size_t n, bool periodic, std::mt19937& rng) {
  std::normal_distribution<double> g;
  TridiagonalOperator h(n, periodic);
  for (std::size_t i = 0; i < n; ++i) {
    h.diag[i] = g(rng);
    const cplx u{g(rng), g(rng)};
    h.upper[i] = u;
    h.lower[i] = std::conj(u);
  }
  return h;
}

Eigen::MatrixXcd to_dense(const TridiagonalOperator& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = h.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return m;
}

Eigen::VectorXcd to_eigen(const std::vector<cplx>& v) {
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<cplx> random_vector(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

double norm2(const std::vector<cplx>& v) {
  double s = 0;
  for (auto x : v) s += std::norm(x);
  return s;
}

}  // namespace

TEST(Operator, ApplyMatchesDense) {
  std::mt19937 rng(1);
  for (bool periodic : {false, true})
    for (std::size_t n : {1u, 2u, 3u, 7u, 40u}) {
      const auto h = random_hermitian(n, periodic, rng);
      const auto x = random_vector(n, rng);
      const Eigen::VectorXcd ref = to_dense(h) * to_eigen(x);
      EXPECT_LT((to_eigen(h.apply(x)) - ref).norm(), 1e-12) << n << " " << periodic;
    }
}

TEST(CrankNicolson, MatchesDenseCayley) {
  std::mt19937 rng(2);
  const double dt = 0.37;
  for (bool periodic : {false, true})
    for (std::size_t n : {1u, 2u, 3u, 5u, 64u}) {
      const auto h = random_hermitian(n, periodic, rng);
      auto x = random_vector(n, rng);
      const auto dense = to_dense(h);
      const auto id = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      const cplx half{0.0, 0.5 * dt};
      const Eigen::VectorXcd ref = (id + half * dense).partialPivLu().solve((id - half * dense) * to_eigen(x));
      CrankNicolson cn(h, dt);
      cn.step(x);
      EXPECT_LT((to_eigen(x) - ref).norm(), 1e-11 * ref.norm()) << n << " " << periodic;
    }
}

TEST(CrankNicolson, ZeroHamiltonianIsIdentity) {
  std::mt19937 rng(3);
  TridiagonalOperator h(50, true);
  auto x = random_vector(50, rng);
  const auto x0 = x;
  CrankNicolson cn(h, 1.0);
  cn.step(x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], x0[i]);
}

TEST(CrankNicolson, EigenvectorPicksUpCayleyPhase) {
  std::mt19937 rng(4);
  const auto h = random_hermitian(30, false, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(h));
  const double e = es.eigenvalues()(7);
  const Eigen::VectorXcd v = es.eigenvectors().col(7);
  std::vector<cplx> x(v.data(), v.data() + v.size());
  const double dt = 0.2;
  CrankNicolson cn(h, dt);
  cn.step(x);
  const cplx factor = (1.0 - cplx(0, dt * e / 2)) / (1.0 + cplx(0, dt * e / 2));
  EXPECT_LT((to_eigen(x) - factor * v).norm(), 1e-12);
}

TEST(CrankNicolson, NormPreservedForRandomHermitian) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const bool periodic = trial % 2;
    const auto h = random_hermitian(100 + trial, periodic, rng);
    auto x = random_vector(h.size(), rng);
    const double before = norm2(x);
    CrankNicolson cn(h, 0.05 + 0.1 * trial);
    for (int s = 0; s < 10; ++s) cn.step(x);
    EXPECT_LT(std::abs(norm2(x) - before) / before, 1e-12);
  }
}

TEST(CrankNicolson, RejectsBadStep) {
  TridiagonalOperator h(4);
  EXPECT_THROW(CrankNicolson(h, 0.0), ValidationError);
  EXPECT_THROW(CrankNicolson(h, std::nan("")), ValidationError);
}

TEST(Hermiticity, DefectDetectsAsymmetry) {
  std::mt19937 rng(6);
  auto h = random_hermitian(10, true, rng);
  EXPECT_EQ(h.hermiticity_defect(), 0.0);
  h.upper[9] += 1e-3;
  EXPECT_NEAR(h.hermiticity_defect(), 1e-3, 1e-12);
}

TEST(PivotedSolver, MatchesDenseSolveNearSingular) {
  std::mt19937 rng(7);
  const auto h = random_hermitian(60, false, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(h));
  for (double shift : {0.3, es.eigenvalues()(20) + 1e-6}) {
    const auto b = random_vector(60, rng);
    const auto x = solve_tridiagonal_pivoted(h.diag, h.upper, h.lower, shift, b);
    const auto id = Eigen::MatrixXcd::Identity(60, 60);
    const Eigen::VectorXcd r = (to_dense(h) - shift * id) * to_eigen(x) - to_eigen(b);
    EXPECT_LT(r.norm(), 1e-8 * to_eigen(b).norm() * (1 + to_eigen(x).norm()));
  }
  std::vector<cplx> d{2.0}, u{0.0}, l{0.0};
  EXPECT_NEAR(std::abs(solve_tridiagonal_pivoted(d, u, l, 0.0, {4.0})[0] - 2.0), 0.0, 1e-15);
}
