#include "doctest.h"

#include <vector>

#include "fedcl/core/loss.hpp"
#include "fedcl/errors.hpp"
#include "support.hpp"

using namespace fedcl;
using testsupport::max_rel_error;
using testsupport::random_params;
using testsupport::random_tensor;

TEST_CASE("mse divides by the row count only") {
  Tensor a({1, 2}, {1, 1});
  Tensor z({1, 2}, {0, 0});
  CHECK(mse_loss(a, a) == 0.0);
  CHECK(mse_loss(a, z) == doctest::Approx(2.0).epsilon(1e-15));
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor zz({2, 2});
  CHECK(mse_loss(eye, zz) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(mse_loss(a, zz), ShapeError);
}

TEST_CASE("analytic gradient agrees with central differences") {
  LstmSpec spec{2, 4, 1, 2, 3};
  ParamVector theta = random_params(spec, 31);
  Tensor x = random_tensor({3, 3, 2}, 32);
  Tensor y = random_tensor({3, 2}, 33);
  const std::vector<PenaltyTerm> none;
  GradResult g = loss_and_grad(spec, theta, x, y, none);
  ParamVector fd = finite_diff_grad(spec, theta, x, y, none, 1e-5);
  CHECK(max_rel_error(g.grad.values(), fd.values()) < 1e-4);
  CHECK(g.loss == doctest::Approx(total_loss(spec, theta, x, y, none)).epsilon(1e-13));
}

TEST_CASE("serial and parallel gradients agree to rounding") {
  LstmSpec spec{3, 6, 2, 2, 4};
  ParamVector theta = random_params(spec, 41);
  Tensor x = random_tensor({19, 4, 3}, 42);
  Tensor y = random_tensor({19, 2}, 43);
  const std::vector<PenaltyTerm> none;
  GradResult par = loss_and_grad(spec, theta, x, y, none, Exec::parallel);
  GradResult ser = loss_and_grad(spec, theta, x, y, none, Exec::serial);
  CHECK(par.loss == ser.loss);
  for (std::size_t i = 0; i < par.grad.size(); ++i) {
    CHECK(std::abs(par.grad[i] - ser.grad[i]) <= 1e-12 * (1.0 + std::abs(ser.grad[i])));
  }
}

TEST_CASE("quadratic penalty vanishes at its anchor") {
  LstmSpec spec{2, 3, 1, 1, 2};
  ParamVector theta = random_params(spec, 1);
  ParamVector importance(theta.layout_ptr());
  importance.fill(3.0);
  Tensor x = random_tensor({2, 2, 2}, 2);
  Tensor y = random_tensor({2, 1}, 3);
  const std::vector<PenaltyTerm> none;
  const std::vector<PenaltyTerm> anchored{QuadraticPenalty{5.0, importance, theta}};
  GradResult base = loss_and_grad(spec, theta, x, y, none);
  GradResult with = loss_and_grad(spec, theta, x, y, anchored);
  CHECK(with.loss == base.loss);
  CHECK(with.grad == base.grad);
}

TEST_CASE("distillation against an identical teacher contributes nothing") {
  LstmSpec spec{2, 3, 1, 2, 2};
  ParamVector theta = random_params(spec, 4);
  ParamVector teacher = theta;
  Tensor x = random_tensor({4, 2, 2}, 5);
  Tensor y = random_tensor({4, 2}, 6);
  const std::vector<PenaltyTerm> none;
  const std::vector<PenaltyTerm> kd{DistillationPenalty{7.0, teacher}};
  GradResult base = loss_and_grad(spec, theta, x, y, none);
  GradResult with = loss_and_grad(spec, theta, x, y, kd);
  CHECK(with.loss == base.loss);
  CHECK(with.grad == base.grad);
}

TEST_CASE("replaying the current batch with weight one doubles the loss") {
  LstmSpec spec{2, 3, 1, 2, 2};
  ParamVector theta = random_params(spec, 7);
  Tensor x = random_tensor({4, 2, 2}, 8);
  Tensor y = random_tensor({4, 2}, 9);
  const std::vector<PenaltyTerm> none;
  const std::vector<PenaltyTerm> replay{ReplayPenalty{1.0, x, y}};
  GradResult base = loss_and_grad(spec, theta, x, y, none);
  GradResult with = loss_and_grad(spec, theta, x, y, replay);
  CHECK(with.loss == doctest::Approx(2.0 * base.loss).epsilon(1e-14));
  for (std::size_t i = 0; i < base.grad.size(); ++i) {
    CHECK(with.grad[i] == doctest::Approx(2.0 * base.grad[i]).epsilon(1e-12));
  }
}

TEST_CASE("finite differences of a lone quadratic penalty") {
  LstmSpec spec{1, 2, 1, 1, 1};
  ParamVector theta = random_params(spec, 10);
  ParamVector importance(theta.layout_ptr());
  importance[0] = 1.0;
  ParamVector anchor = theta;
  anchor[0] -= 1.0;  // theta - anchor = [1, 0, ...]
  Tensor x({0, 1, 1});
  Tensor y({0, 1});
  const std::vector<PenaltyTerm> terms{QuadraticPenalty{1.0, importance, anchor}};
  const double eps = 1e-5;
  ParamVector fd = finite_diff_grad(spec, theta, x, y, terms, eps);
  CHECK(std::abs(fd[0] - 2.0) < 1e-8);
  for (std::size_t i = 1; i < fd.size(); ++i) CHECK(fd[i] == 0.0);
  CHECK_THROWS_AS(finite_diff_grad(spec, theta, x, y, terms, 0.0), ConfigError);
}

TEST_CASE("finite differences vanish at a zero-loss point") {
  LstmSpec spec{2, 3, 1, 2, 2};
  ParamVector theta(make_layout(spec));
  Tensor x = random_tensor({3, 2, 2}, 11);
  Tensor y({3, 2});
  const std::vector<PenaltyTerm> none;
  ParamVector fd = finite_diff_grad(spec, theta, x, y, none, 1e-5);
  for (double v : fd.values()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("non-finite loss raises") {
  LstmSpec spec{1, 2, 1, 1, 1};
  ParamVector theta(make_layout(spec));
  theta.segment("head.b")[0] = 1e300;
  Tensor x({1, 1, 1}, {0.0});
  Tensor y({1, 1}, {-1e300});
  const std::vector<PenaltyTerm> none;
  CHECK_THROWS_AS(loss_and_grad(spec, theta, x, y, none), NonFiniteError);
}
