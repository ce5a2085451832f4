#include <catch2/catch_amalgamated.hpp>

#include "bridgekit/numerics.hpp"
#include "bridgekit/rng.hpp"

using namespace bridgekit;

TEST_CASE("solve_spd solves hand-checked systems") {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  Vector b(2);
  b << 3, 3;
  Vector x = solve_spd(a, b);
  CHECK(x[0] == Catch::Approx(1.0).margin(1e-14));
  CHECK(x[1] == Catch::Approx(1.0).margin(1e-14));

  Matrix id = Matrix::Identity(4, 4);
  Vector rhs(4);
  rhs << 1, -2, 3, 0.5;
  CHECK((solve_spd(id, rhs) - rhs).norm() < 1e-15);
}

TEST_CASE("solve_spd residual is tiny on random SPD systems") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.below(8));
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    Matrix a = m * m.transpose() + 0.1 * Matrix::Identity(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = rng.normal();
    Vector x = solve_spd(a, b);
    CHECK((a * x - b).norm() <= 1e-9 * (1.0 + b.norm()));
  }
}

TEST_CASE("solve_spd rejects bad inputs") {
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;  // eigenvalues 3 and -1
  Vector b(2);
  b << 1, 1;
  CHECK_THROWS_AS(solve_spd(indefinite, b), NotPositiveDefinite);

  Matrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(solve_spd(rect, b), DimensionMismatch);

  Matrix ok = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(solve_spd(ok, b), DimensionMismatch);
}

TEST_CASE("log_det_signed hand checks") {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;  // det 8
  auto r = log_det_signed(a);
  CHECK(r.sign == 1);
  CHECK(r.log_abs_det == Catch::Approx(std::log(8.0)).epsilon(1e-14));

  Matrix swapped(2, 2);
  swapped << 0, 1, 1, 0;  // det -1
  auto s = log_det_signed(swapped);
  CHECK(s.sign == -1);
  CHECK(s.log_abs_det == Catch::Approx(0.0).margin(1e-14));

  Matrix one(1, 1);
  one << -2.5;
  auto t = log_det_signed(one);
  CHECK(t.sign == -1);
  CHECK(t.log_abs_det == Catch::Approx(std::log(2.5)).epsilon(1e-14));
}

TEST_CASE("log_det_signed flags singular matrices") {
  Matrix sing(2, 2);
  sing << 1, 2, 2, 4;
  CHECK(log_det_signed(sing).sign == 0);
  CHECK(log_det_signed(Matrix::Zero(3, 3)).sign == 0);
}

TEST_CASE("log_det_signed matches scaling law") {
  // det(cI_n) = c^n
  Matrix a = 3.0 * Matrix::Identity(5, 5);
  auto r = log_det_signed(a);
  CHECK(r.sign == 1);
  CHECK(r.log_abs_det == Catch::Approx(5.0 * std::log(3.0)).epsilon(1e-13));
}
