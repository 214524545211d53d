#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "fedcl/cl/kmeans.hpp"
#include "fedcl/cl/regularizers.hpp"
#include "fedcl/cl/replay.hpp"
#include "fedcl/cl/strategy.hpp"
#include "fedcl/core/optimizer.hpp"
#include "fedcl/errors.hpp"
#include "support.hpp"

using namespace fedcl;
using testsupport::random_params;
using testsupport::random_tensor;

namespace {

LayoutPtr flat_layout(std::size_t n) {
  return std::make_shared<const Layout>(
      "flat", std::vector<std::pair<std::string, std::vector<std::size_t>>>{{"w", {n}}});
}

ParamVector flat(const LayoutPtr& l, std::vector<double> v) { return ParamVector(l, std::move(v)); }

Tensor column(std::vector<double> v) {
  const std::size_t m = v.size();
  return Tensor({m, 1}, std::move(v));
}

WindowedDataset dataset(std::size_t m, const LstmSpec& spec, std::uint64_t seed, int task = 1) {
  WindowedDataset d;
  d.x = random_tensor({m, spec.lag, spec.input_dim}, seed);
  d.y = random_tensor({m, spec.horizon}, seed + 1000);
  d.task_index = task;
  d.starts.resize(m);
  return d;
}

LstmSpec small_spec() {
  LstmSpec s;
  s.input_dim = 2;
  s.hidden_dim = 3;
  s.lag = 4;
  s.horizon = 2;
  return s;
}

// Minimum within-cluster SSE over every assignment of the points to k labels.
double brute_force_sse(const std::vector<double>& pts, std::size_t k) {
  const std::size_t m = pts.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < m; ++i) combos *= k;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < combos; ++code) {
    std::vector<double> sum(k), cnt(k);
    std::vector<std::size_t> label(m);
    std::size_t c = code;
    for (std::size_t i = 0; i < m; ++i, c /= k) {
      label[i] = c % k;
      sum[label[i]] += pts[i];
      cnt[label[i]] += 1;
    }
    double sse = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double mu = sum[label[i]] / cnt[label[i]];
      sse += (pts[i] - mu) * (pts[i] - mu);
    }
    best = std::min(best, sse);
  }
  return best;
}

double clustering_sse(const Tensor& pts, const KMeansResult& r) {
  double sse = 0;
  for (std::size_t i = 0; i < pts.dim(0); ++i) {
    const double d = pts.data()[i] - r.centroids.data()[r.assignment[i]];
    sse += d * d;
  }
  return sse;
}

}  // namespace

TEST_CASE("k-means on four 1-d points") {
  const Tensor pts = column({0, 1, 10, 11});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    KMeansResult r = kmeans(pts, 2, seed);
    std::vector<double> c{r.centroids.data()[0], r.centroids.data()[1]};
    std::sort(c.begin(), c.end());
    CHECK(c[0] == 0.5);
    CHECK(c[1] == 10.5);
    CHECK(clustering_sse(pts, r) == doctest::Approx(brute_force_sse({0, 1, 10, 11}, 2)));
    CHECK(nearest_members(pts, r) == std::vector<std::size_t>{0, 2});
  }
}

TEST_CASE("k-means reaches the brute-force optimum on separated blobs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 3; ++i) v.push_back(nd(rng));
    for (int i = 0; i < 3; ++i) v.push_back(5 + nd(rng));
    for (int i = 0; i < 2; ++i) v.push_back(-6 + nd(rng));
    std::shuffle(v.begin(), v.end(), rng);
    const Tensor pts = column(v);
    KMeansResult r = kmeans(pts, 3, 100 + trial);
    CHECK(clustering_sse(pts, r) == doctest::Approx(brute_force_sse(v, 3)).epsilon(1e-12));
  }
}

TEST_CASE("k-means degenerate and boundary cases") {
  const Tensor same = column({3, 3, 3, 3});
  KMeansResult r = kmeans(same, 2, 1);
  CHECK(nearest_members(same, r).size() == 1);
  CHECK_THROWS_AS(kmeans(same, 5, 1), ConfigError);
  CHECK_THROWS_AS(kmeans(Tensor({0, 1}), 1, 1), ShapeError);
}

TEST_CASE("serial and parallel k-means agree exactly") {
  const Tensor pts = random_tensor({57, 4, 3}, 9);
  KMeansResult a = kmeans(pts, 7, 5, {}, Exec::serial);
  KMeansResult b = kmeans(pts, 7, 5, {}, Exec::parallel);
  CHECK(a.centroids == b.centroids);
  CHECK(a.assignment == b.assignment);
  CHECK(a.iterations == b.iterations);
  CHECK(a.iterations <= 100);
}

TEST_CASE("exemplars are the training members nearest their centroid") {
  const Tensor pts = random_tensor({40, 3, 2}, 21);
  KMeansResult r = kmeans(pts, 6, 3);
  const auto picks = nearest_members(pts, r);
  const std::size_t d = 6;
  for (std::size_t idx : picks) {
    REQUIRE(idx < 40);
    const std::size_t c = r.assignment[idx];
    auto dist = [&](std::size_t i) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) {
        const double t = pts.data()[i * d + j] - r.centroids.data()[c * d + j];
        s += t * t;
      }
      return s;
    };
    for (std::size_t i = 0; i < 40; ++i)
      if (r.assignment[i] == c) CHECK(dist(idx) <= dist(i));
  }
  CHECK(std::is_sorted(picks.begin(), picks.end()));
}

TEST_CASE("replay selection sizes") {
  CHECK(exemplar_count(0.15, 13) == 2);
  CHECK(exemplar_count(0.001, 13) == 1);
  CHECK(exemplar_count(1.0, 13) == 13);
  const LstmSpec spec = small_spec();
  WindowedDataset d = dataset(20, spec, 4);
  CHECK(replay_select(d, 1.0, 1).size() == 20);
  CHECK(replay_select(d, 0.25, 1).size() <= 5);
  CHECK(replay_select(dataset(0, spec, 4), 0.5, 1).empty());
  CHECK_THROWS_AS(replay_select(d, 0.0, 1), ConfigError);
}

TEST_CASE("replay buffer sampling") {
  const LstmSpec spec = small_spec();
  WindowedDataset d = dataset(10, spec, 8);
  ReplayBuffer buf;
  std::mt19937_64 rng(1);
  CHECK(buf.sample(4, rng).first.empty());
  const std::vector<std::size_t> a{0, 3, 5}, b{1, 2, 9, 7};
  buf.add(1, d, a);
  buf.add(2, d, b);
  CHECK(buf.size() == 7);
  CHECK(buf.holds_task(2));
  CHECK_FALSE(buf.holds_task(3));
  CHECK_THROWS_AS(buf.add(1, d, a), ConfigError);

  auto [x, y] = buf.sample(5, rng);
  CHECK(x.dim(0) == 5);
  std::set<double> firsts;
  for (std::size_t r = 0; r < 5; ++r) firsts.insert(x.row(r)[0]);
  CHECK(firsts.size() == 5);
  auto [all_x, all_y] = buf.sample(100, rng);
  CHECK(all_x.dim(0) == 7);
  // Each sampled target belongs to the same window as its input.
  for (std::size_t r = 0; r < 7; ++r) {
    bool found = false;
    for (std::size_t i = 0; i < 10; ++i)
      if (d.x.row(i)[0] == all_x.row(r)[0]) found = d.y.row(i)[0] == all_y.row(r)[0];
    CHECK(found);
  }
}

TEST_CASE("quadratic penalty examples") {
  auto l2 = flat_layout(2);
  ParamVector f = flat(l2, {1, 2}), anchor = flat(l2, {0, 0}), theta = flat(l2, {1, 1});
  FisherInfo fi{f, anchor};
  CHECK(quadratic_penalty_value(theta, ewc_term(fi, 1.0)) == 3.0);
  CHECK(quadratic_penalty_value(anchor, ewc_term(fi, 1.0)) == 0.0);

  auto l1 = flat_layout(1);
  FisherInfo one{flat(l1, {1}), flat(l1, {0})};
  ParamVector t1 = flat(l1, {2});
  CHECK(quadratic_penalty_value(t1, ewc_term(one, 0.5)) == 2.0);
  ParamVector g(l1);
  add_quadratic_penalty_grad(t1, ewc_term(one, 0.5), g);
  CHECK(g[0] == 2.0);

  SIAccumulator si = si_start(flat(l1, {0}), 1e-3);
  si.omega[0] = 2.0;
  CHECK(quadratic_penalty_value(flat(l1, {0.5}), si_term(si, 4.0)) == 2.0);
}

TEST_CASE("quadratic penalties are linear in the weight and vanish at the anchor") {
  const LstmSpec spec = small_spec();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParamVector imp = random_params(spec, seed, 1.0);
    for (double& v : imp.values()) v = std::abs(v);
    FisherInfo fi{imp, random_params(spec, seed + 50)};
    ParamVector theta = random_params(spec, seed + 100);
    const double v1 = quadratic_penalty_value(theta, ewc_term(fi, 1.0));
    CHECK(v1 > 0.0);
    CHECK(quadratic_penalty_value(theta, ewc_term(fi, 0.0)) == 0.0);
    CHECK(quadratic_penalty_value(theta, ewc_term(fi, 2.0)) == doctest::Approx(2 * v1).epsilon(1e-14));
    ParamVector g1(theta.layout_ptr()), g2(theta.layout_ptr()), g0(theta.layout_ptr());
    add_quadratic_penalty_grad(theta, ewc_term(fi, 1.0), g1);
    add_quadratic_penalty_grad(theta, ewc_term(fi, 2.0), g2);
    add_quadratic_penalty_grad(theta, ewc_term(fi, 0.0), g0);
    for (std::size_t i = 0; i < g1.size(); ++i) {
      CHECK(g2[i] == doctest::Approx(2 * g1[i]).epsilon(1e-14));
      CHECK(g0[i] == 0.0);
    }
    ParamVector ga(theta.layout_ptr());
    add_quadratic_penalty_grad(fi.anchor, ewc_term(fi, 1.0), ga);
    for (double v : ga.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("distillation examples") {
  CHECK(kd_value(column({2, 4}), column({1, 2})) == 2.5);
  const LstmSpec spec = small_spec();
  ParamVector theta = random_params(spec, 3);
  Tensor x = random_tensor({4, spec.lag, spec.input_dim}, 5);
  Tensor y = random_tensor({4, spec.horizon}, 6);
  const std::vector<PenaltyTerm> kd{kd_term(theta, 7.0)};
  GradResult with = loss_and_grad(spec, theta, x, y, kd);
  GradResult plain = loss_and_grad(spec, theta, x, y, {});
  CHECK(with.loss == plain.loss);
  CHECK(with.grad == plain.grad);
}

TEST_CASE("fisher estimate") {
  const LstmSpec spec = small_spec();
  WindowedDataset d = dataset(5, spec, 12);
  ParamVector theta = random_params(spec, 2);
  FisherInfo f = fisher_estimate(spec, theta, d, 8);
  GradResult g = loss_and_grad(spec, theta, d.x, d.y, {});
  for (std::size_t i = 0; i < g.grad.size(); ++i) CHECK(f.importance[i] == g.grad[i] * g.grad[i]);
  CHECK(f.anchor == theta);

  // Mean over batches, capped at max_batches.
  FisherInfo two = fisher_estimate(spec, theta, d, 2, 2);
  const std::vector<std::size_t> b0{0, 1}, b1{2, 3};
  GradResult g0 = loss_and_grad(spec, theta, d.x.gather_rows(b0), d.y.gather_rows(b0), {});
  GradResult g1 = loss_and_grad(spec, theta, d.x.gather_rows(b1), d.y.gather_rows(b1), {});
  for (std::size_t i = 0; i < g0.grad.size(); ++i)
    CHECK(two.importance[i] == doctest::Approx((g0.grad[i] * g0.grad[i] + g1.grad[i] * g1.grad[i]) / 2).epsilon(1e-14));

  WindowedDataset flatline = d;
  for (double& v : flatline.y.data()) v = 0.0;
  FisherInfo z = fisher_estimate(spec, ParamVector(make_layout(spec)), flatline, 4);
  for (double v : z.importance.values()) CHECK(v == 0.0);

  CHECK_THROWS_AS(fisher_estimate(spec, theta, dataset(0, spec, 1), 4), ConfigError);
}

TEST_CASE("online EWC blending") {
  auto l1 = flat_layout(1);
  FisherInfo old{flat(l1, {1}), flat(l1, {0})}, fresh{flat(l1, {2}), flat(l1, {9})};
  ParamVector after = flat(l1, {5});
  CHECK(oewc_update(old, fresh, 0.9, after).importance[0] == doctest::Approx(1.1).epsilon(1e-15));
  FisherInfo keep = oewc_update(old, fresh, 1.0, after);
  CHECK(keep.importance[0] == 1.0);
  CHECK(keep.anchor == after);
  CHECK(oewc_update(old, fresh, 0.0, after).importance[0] == 2.0);
  CHECK_THROWS_AS(oewc_update(old, FisherInfo{flat(flat_layout(2), {1, 1}), flat(flat_layout(2), {0, 0})}, 0.5, after),
                  LayoutError);

  FisherInfo f = old;
  double gap = std::abs(f.importance[0] - 2.0);
  for (int t = 0; t < 30; ++t) {
    f = oewc_update(f, fresh, 0.7, after);
    const double next = std::abs(f.importance[0] - 2.0);
    CHECK(next == doctest::Approx(0.7 * gap).epsilon(1e-9));
    gap = next;
  }
}

TEST_CASE("SI path integral and consolidation") {
  auto l1 = flat_layout(1);
  SIAccumulator acc = si_start(flat(l1, {0}), 1e-3);
  si_step(acc, flat(l1, {0.5}), flat(l1, {0}), flat(l1, {-0.1}));
  CHECK(acc.w[0] == doctest::Approx(0.05).epsilon(1e-15));
  si_step(acc, flat(l1, {0}), flat(l1, {-0.1}), flat(l1, {-0.3}));
  CHECK(acc.w[0] == doctest::Approx(0.05).epsilon(1e-15));

  SIAccumulator c = si_start(flat(l1, {0}), 1e-3);
  c.w[0] = 0.05;
  si_consolidate(c, flat(l1, {-0.1}));
  CHECK(c.omega[0] == doctest::Approx(0.05 / 0.011).epsilon(1e-14));
  CHECK(c.omega[0] == doctest::Approx(4.5455).epsilon(1e-4));
  CHECK(c.w[0] == 0.0);
  CHECK(c.task_start[0] == -0.1);
  // Omega accumulates; negative path integrals are clamped away.
  c.w[0] = -0.2;
  si_consolidate(c, flat(l1, {0.4}));
  CHECK(c.omega[0] == doctest::Approx(0.05 / 0.011).epsilon(1e-14));
  SIAccumulator z = si_start(flat(l1, {1}), 1e-3);
  si_consolidate(z, flat(l1, {2}));
  CHECK(z.omega[0] == 0.0);
  CHECK_THROWS_AS(si_start(flat(l1, {0}), 0.0), ConfigError);
}

TEST_CASE("SI increments are nonnegative under plain SGD") {
  const LstmSpec spec = small_spec();
  ParamVector theta = random_params(spec, 1);
  Tensor x = random_tensor({4, spec.lag, spec.input_dim}, 2);
  Tensor y = random_tensor({4, spec.horizon}, 3);
  SIAccumulator acc = si_start(theta, 1e-3);
  Optimizer sgd(OptimizerConfig{OptimizerConfig::Kind::sgd, 0.05});
  for (int step = 0; step < 10; ++step) {
    GradResult g = loss_and_grad(spec, theta, x, y, {});
    const ParamVector before = theta, w_before = acc.w;
    sgd.step(theta, g.grad);
    si_step(acc, g.grad, before, theta);
    for (std::size_t i = 0; i < acc.w.size(); ++i) CHECK(acc.w[i] >= w_before[i]);
  }
}

TEST_CASE("method names and aliases") {
  CHECK(parse_method("KD") == Method::lwf);
  CHECK(parse_method("o-ewc") == Method::oewc);
  CHECK(parse_method("Online-EWC") == Method::oewc);
  CHECK(parse_method("static") == Method::static_model);
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("dropout"), ConfigError);
}

TEST_CASE("strategy lifecycles") {
  const LstmSpec spec = small_spec();
  std::mt19937_64 rng(0);
  ParamVector base = random_params(spec, 1);
  WindowedDataset train = dataset(12, spec, 40, 0);

  SUBCASE("static and naive") {
    ClState st(spec, {Method::static_model});
    CHECK(st.trains(0));
    CHECK_FALSE(st.trains(3));
    ClState nv(spec, {Method::naive});
    for (int t = 0; t < 4; ++t) {
      nv.before_task(t, base);
      CHECK(nv.loss_terms(8, rng).empty());
      nv.after_task(t, base, train, 4, 1);
    }
  }
  SUBCASE("EWC fits its Fisher once on the base task") {
    ClState s(spec, {Method::ewc, 5.0});
    s.before_task(0, base);
    CHECK(s.loss_terms(8, rng).empty());
    s.after_task(0, base, train, 4, 1);
    for (int t = 1; t <= 11; ++t) {
      ParamVector later = random_params(spec, 100 + t);
      s.before_task(t, later);
      auto terms = s.loss_terms(8, rng);
      REQUIRE(terms.size() == 1);
      CHECK(std::get<QuadraticPenalty>(terms[0]).anchor.get() == base);
      s.after_task(t, later, train, 4, 1);
    }
    CHECK(s.fisher_estimates() == 1);
  }
  SUBCASE("online EWC refreshes its anchor every task") {
    ClState s(spec, {Method::oewc, 5.0});
    s.before_task(0, base);
    s.after_task(0, base, train, 4, 1);
    ParamVector next = random_params(spec, 9);
    s.before_task(1, base);
    s.after_task(1, next, train, 4, 1);
    CHECK(s.fisher()->anchor == next);
    CHECK(s.fisher_estimates() == 2);
  }
  SUBCASE("LwF snapshots the incoming model") {
    ClState s(spec, {Method::lwf, 2.0});
    s.before_task(0, base);
    CHECK(s.loss_terms(8, rng).empty());
    ParamVector incoming = random_params(spec, 7);
    s.before_task(1, incoming);
    CHECK(*s.teacher() == incoming);
    auto terms = s.loss_terms(8, rng);
    REQUIRE(terms.size() == 1);
    CHECK(std::get<DistillationPenalty>(terms[0]).weight == 2.0);
  }
  SUBCASE("replay only holds finished continual tasks") {
    MethodParams p{Method::replay, 1.0};
    p.replay_ratio = 0.25;
    ClState s(spec, p);
    s.before_task(0, base);
    s.after_task(0, base, train, 4, 1);
    CHECK(s.buffer().empty());
    for (int t = 1; t <= 3; ++t) {
      s.before_task(t, base);
      CHECK_FALSE(s.buffer().holds_task(t));
      auto terms = s.loss_terms(8, rng);
      CHECK(terms.size() == (t == 1 ? 0u : 1u));
      s.after_task(t, base, dataset(12, spec, 40 + t, t), 4, 1);
      CHECK(s.buffer().holds_task(t));
    }
    CHECK(s.buffer().size() == 9);
  }
  SUBCASE("SI consolidates after each task") {
    ClState s(spec, {Method::si, 3.0});
    s.before_task(0, base);
    ParamVector moved = base;
    moved[0] += 0.1;
    ParamVector grad(base.layout_ptr());
    grad[0] = -1.0;
    s.after_step(grad, base, moved);
    CHECK(s.si()->w[0] == doctest::Approx(0.1));
    CHECK(s.loss_terms(8, rng).empty());
    s.after_task(0, moved, train, 4, 1);
    CHECK(s.si()->omega[0] == doctest::Approx(0.1 / (0.01 + 1e-3)));
    s.before_task(1, moved);
    CHECK(s.loss_terms(8, rng).size() == 1);
  }
}

TEST_CASE("CL state snapshots round-trip") {
  const LstmSpec spec = small_spec();
  ParamVector base = random_params(spec, 1);
  for (Method m : all_methods()) {
    MethodParams p{m, 1.5};
    p.replay_ratio = 0.3;
    ClState s(spec, p);
    for (int t = 0; t < 3; ++t) {
      ParamVector theta = random_params(spec, 10 + t);
      s.before_task(t, theta);
      s.after_step(theta, theta, random_params(spec, 20 + t));
      s.after_task(t, theta, dataset(10, spec, 30 + t, t), 4, 2);
    }
    const auto snap = s.snapshot();
    ClState back = ClState::restore(spec, nlohmann::json::parse(snap.dump()));
    CHECK(back.snapshot() == snap);
  }
  LstmSpec other = spec;
  other.hidden_dim = 5;
  CHECK_THROWS_AS(ClState::restore(other, ClState(spec, {}).snapshot()), LayoutError);
  CHECK_THROWS_AS(ClState::restore(spec, nlohmann::json::object()), ConfigError);
}
