#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "bridgekit/baselines.hpp"
#include "test_support.hpp"

using namespace bridgekit;
using testsupport::coefs;
using testsupport::toy_dataset;

namespace {

Dataset standardized_toy(std::uint64_t seed, int n, const Vector& beta,
                         double sigma, double rho) {
  return standardize(toy_dataset(seed, n, beta, sigma, rho)).first;
}

}  // namespace

TEST_CASE("OLS matches a QR solve and rejects singular designs") {
  Dataset data = standardized_toy(3, 25, coefs({2, -1, 0.5}), 1.0, 0.4);
  BaselineFit fit = fit_ols(data);
  Vector qr = data.x.colPivHouseholderQr().solve(data.y);
  CHECK((fit.beta_hat - qr).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.selected.empty());

  Dataset dup = data;
  dup.x.conservativeResize(Eigen::NoChange, 4);
  dup.x.col(3) = dup.x.col(0);
  CHECK_THROWS_AS(fit_ols(dup), SingularSystem);
}

TEST_CASE("ridge LOOCV shortcut equals literal leave-one-out refits") {
  Dataset data = standardized_toy(5, 12, coefs({2, -1, 1}), 1.0, 0.3);
  const int n = data.n();
  std::vector<double> lambdas{1.0, 0.3, 0.05};
  DesignGram g = compute_gram(data);

  std::vector<double> literal;
  for (double lambda : lambdas) {
    Matrix base = g.xtx;
    base.diagonal().array() += n * lambda;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      Matrix m = base - data.x.row(i).transpose() * data.x.row(i);
      Vector b = g.xty - data.x.row(i).transpose() * data.y[i];
      Vector beta_i = solve_spd(m, b);
      double e = data.y[i] - data.x.row(i).dot(beta_i);
      sum += e * e;
    }
    literal.push_back(sum / n);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < literal.size(); ++i)
    if (literal[i] < literal[best]) best = i;

  BaselineFit fit = fit_ridge_loocv(data, lambdas);
  CHECK(fit.selected.at("lambda") == lambdas[best]);
  Matrix m = g.xtx;
  m.diagonal().array() += n * lambdas[best];
  Vector closed = solve_spd(m, g.xty);
  CHECK((fit.beta_hat - closed).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ridge LOOCV prefers heavy shrinkage on pure noise") {
  std::vector<double> lambdas{10.0, 0.1, 1e-4};
  for (std::uint64_t seed : {21, 22, 23}) {
    Dataset data = standardized_toy(seed, 40, Vector::Zero(10), 1.0, 0.0);
    BaselineFit fit = fit_ridge_loocv(data, lambdas);
    INFO("seed=" << seed);
    CHECK(fit.selected.at("lambda") == 10.0);
  }
}

TEST_CASE("ridge LOOCV with no usable lambda raises NoValidCandidate") {
  Dataset data = standardized_toy(7, 15, coefs({1, 1}), 1.0, 0.0);
  CHECK_THROWS_AS(fit_ridge_loocv(data, std::vector<double>{-5.0}),
                  NoValidCandidate);
  CHECK_THROWS_AS(fit_ridge_loocv(data, std::vector<double>{}), Error);
}

TEST_CASE("elastic net at alpha = 1 reproduces the ridge closed form") {
  Dataset data = standardized_toy(9, 30, coefs({2, 0, -1, 1}), 1.0, 0.5);
  for (double lambda : {0.05, 0.4, 2.0}) {
    Vector cd = detail::enet_cd(data.x, data.y, lambda, 1.0);
    Matrix m = data.x.transpose() * data.x;
    m.diagonal().array() += data.n() * lambda;
    Vector closed = solve_spd(m, data.x.transpose() * data.y);
    INFO("lambda=" << lambda);
    CHECK((cd - closed).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("lasso coordinate descent satisfies the KKT conditions") {
  Dataset data = standardized_toy(11, 30, coefs({3, 0, 1.5, 0, -2}), 1.0, 0.5);
  const int n = data.n();
  for (double lambda : {0.1, 0.5, 1.5}) {
    Vector beta = detail::enet_cd(data.x, data.y, lambda, 0.0);
    Vector grad = data.x.transpose() * (data.y - data.x * beta) / n;
    int zeros = 0, nonzeros = 0;
    for (int j = 0; j < data.p(); ++j) {
      if (beta[j] != 0.0) {
        ++nonzeros;
        CHECK(grad[j] == Catch::Approx(lambda * (beta[j] > 0 ? 1.0 : -1.0))
                             .margin(1e-6 * lambda));
      } else {
        ++zeros;
        CHECK(std::abs(grad[j]) <= lambda * (1.0 + 1e-6));
      }
    }
    if (lambda == 1.5) CHECK(zeros >= 1);
    if (lambda == 0.1) CHECK(nonzeros >= 3);
  }
}

TEST_CASE("a strict sweep budget raises NonConvergence") {
  Dataset data = standardized_toy(13, 30, coefs({2, -1, 1}), 1.0, 0.9);
  CHECK_THROWS_AS(
      detail::enet_cd(data.x, data.y, 0.01, 0.0, nullptr, 1e-10, 1),
      NonConvergence);
}

TEST_CASE("seeded folds partition the rows into near-equal sorted blocks") {
  auto folds = detail::make_folds(23, 5, 77);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen;
  for (const auto& f : folds) {
    CHECK(std::is_sorted(f.begin(), f.end()));
    CHECK(f.size() >= 4);
    CHECK(f.size() <= 5);
    seen.insert(seen.end(), f.begin(), f.end());
  }
  std::sort(seen.begin(), seen.end());
  std::vector<int> expect(23);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(seen == expect);

  CHECK(detail::make_folds(23, 5, 77) == folds);     // same seed, same folds
  CHECK(detail::make_folds(23, 5, 78) != folds);     // new seed, new folds
  CHECK_THROWS_AS(detail::make_folds(10, 1, 0), Error);
  CHECK_THROWS_AS(detail::make_folds(10, 11, 0), Error);
}

TEST_CASE("elastic net CV selects from the grid and refits on all rows") {
  Dataset data = standardized_toy(15, 40, coefs({3, 0, 2, 0, -1}), 1.0, 0.3);
  std::vector<double> lambdas{1.0, 0.3, 0.1, 0.03, 0.01};
  std::vector<double> alphas{0.0, 0.5, 1.0};
  BaselineFit fit = fit_enet_cv(data, lambdas, alphas, 5, 31);
  REQUIRE(fit.beta_hat.size() == data.p());
  double l = fit.selected.at("lambda");
  double a = fit.selected.at("alpha");
  CHECK(std::count(lambdas.begin(), lambdas.end(), l) == 1);
  CHECK(std::count(alphas.begin(), alphas.end(), a) == 1);
  Vector refit = detail::enet_cd(data.x, data.y, l, a);
  CHECK((fit.beta_hat - refit).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the lasso is the elastic net pinned at alpha = 0") {
  Dataset data = standardized_toy(17, 35, coefs({3, 0, 1.5, 0}), 1.0, 0.4);
  std::vector<double> lambdas{0.5, 0.2, 0.08, 0.03};
  BaselineFit lasso = fit_lasso_cv(data, lambdas, 5, 99);
  BaselineFit enet = fit_enet_cv(data, lambdas, {0.0}, 5, 99);
  CHECK(lasso.beta_hat == enet.beta_hat);
  CHECK(lasso.selected.at("lambda") == enet.selected.at("lambda"));
  CHECK(lasso.selected.count("alpha") == 0);
  CHECK(enet.selected.at("alpha") == 0.0);
}
