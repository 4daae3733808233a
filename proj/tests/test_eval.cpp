#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "ishap/errors.hpp"
#include "ishap/eval.hpp"
#include "ishap/rng.hpp"
#include "ishap/shapley.hpp"
#include "ishap/synth.hpp"
#include "oracles.hpp"

using namespace ishap;

namespace {

Dataset gaussian_background(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.rows = Eigen::MatrixXd(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) data.rows(i, j) = rng.normal();
  return data;
}

Model linear_model(std::vector<double> weights, double intercept) {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::Linear;
  spec.d = static_cast<int>(weights.size());
  spec.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  spec.intercept = intercept;
  return Model(spec);
}

// f(x) = x0*x1 + x2 as a two-term gam.
Model product_model() {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::Gam;
  spec.d = 3;
  GamTerm pair;
  pair.features = {0, 1};
  pair.coeffs = Eigen::VectorXd::Ones(2);
  GamTerm single;
  single.features = {2};
  single.coeffs = Eigen::VectorXd::Ones(1);
  spec.terms = {pair, single};
  return Model(spec);
}

// Surrogate whose singleton values are the closed-form marginal contributions
// of a linear model: w_j (x_j - mean_j).
SurrogateFn closed_form_linear(const Eigen::VectorXd& w, const Dataset& data) {
  Eigen::VectorXd means = data.rows.colwise().mean();
  return [w, means](const Eigen::VectorXd& x, std::uint64_t) {
    Surrogate s;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      s.parts.push_back({static_cast<int>(j)});
      s.values.push_back(w[j] * (x[j] - means[j]));
    }
    return s;
  };
}

SurrogateFn explain_surrogate(const Model& model, const Dataset& data, ExplainParams base) {
  return [&model, &data, base](const Eigen::VectorXd& x, std::uint64_t seed) {
    ExplainParams p = base;
    p.seed = seed;
    Explanation e = explain(x, model, data, p);
    Surrogate s;
    s.parts = e.partition.parts;
    for (const auto& part : e.parts) s.values.push_back(part.value);
    return s;
  };
}

SurrogateFn singleton_shap_surrogate(const CenteredModel& model, const Dataset& data,
                                     std::int64_t n_permutations) {
  return [&model, &data, n_permutations](const Eigen::VectorXd& x, std::uint64_t seed) {
    Eigen::VectorXd phi = sampling_shapley_singletons(x, model, data, n_permutations, seed);
    Surrogate s;
    for (Eigen::Index j = 0; j < phi.size(); ++j) {
      s.parts.push_back({static_cast<int>(j)});
      s.values.push_back(phi[j]);
    }
    return s;
  };
}

Partition apply_permutation(const Partition& p, const std::vector<int>& perm) {
  std::vector<std::vector<int>> parts;
  for (const auto& part : p.parts) {
    std::vector<int> mapped;
    for (int v : part) mapped.push_back(perm[static_cast<std::size_t>(v)]);
    parts.push_back(mapped);
  }
  return make_partition(parts, static_cast<int>(perm.size()));
}

// Product-only gam with a fixed two-part structure, for the correlation tests.
GroundTruthGAM manual_product_gam() {
  GroundTruthGAM gam;
  gam.d = 4;
  gam.partition = make_partition({{0, 1}, {2, 3}}, 4);
  GamTerm a;
  a.features = {0, 1};
  a.coeffs = Eigen::VectorXd(2);
  a.coeffs << 1.2, -0.8;
  GamTerm b;
  b.features = {2, 3};
  b.coeffs = Eigen::VectorXd(2);
  b.coeffs << 0.6, 1.4;
  gam.terms = {a, b};
  gam.columns.assign(4, ColumnDist{});
  return gam;
}

}  // namespace

TEST_CASE("set_f1 on documented examples") {
  Partition truth = make_partition({{0, 1}, {2}}, 3);

  F1Report same = set_f1(truth, truth);
  CHECK(same.f1 == 1.0);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.tp == 2);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);

  F1Report split = set_f1(singleton_partition(3), truth);
  CHECK(split.tp == 1);
  CHECK(split.fp == 2);
  CHECK(split.fn == 1);
  CHECK(split.precision == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(split.recall == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(split.f1 == doctest::Approx(0.4).epsilon(1e-15));

  F1Report disjoint =
      set_f1(make_partition({{0, 2}, {1, 3}}, 4), make_partition({{0, 1}, {2, 3}}, 4));
  CHECK(disjoint.tp == 0);
  CHECK(disjoint.f1 == 0.0);

  CHECK_THROWS_AS(set_f1(singleton_partition(3), singleton_partition(4)), ParseError);
}

TEST_CASE("pairwise_f1 on documented examples") {
  Partition truth = make_partition({{0, 1, 2}, {3}}, 4);
  Partition predicted = make_partition({{0, 1}, {2}, {3}}, 4);

  F1Report r = pairwise_f1(predicted, truth);
  CHECK(r.tp == 1);
  CHECK(r.fp == 0);
  CHECK(r.fn == 2);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.f1 == doctest::Approx(0.5).epsilon(1e-15));

  // No co-grouped pairs on either side counts as agreement.
  F1Report empty = pairwise_f1(singleton_partition(3), singleton_partition(3));
  CHECK(empty.f1 == 1.0);
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);

  // Pairs on one side only.
  F1Report spurious = pairwise_f1(make_partition({{0, 1}, {2}}, 3), singleton_partition(3));
  CHECK(spurious.precision == 0.0);
  CHECK(spurious.f1 == 0.0);
  F1Report missed = pairwise_f1(singleton_partition(3), make_partition({{0, 1}, {2}}, 3));
  CHECK(missed.recall == 0.0);
  CHECK(missed.f1 == 0.0);

  CHECK_THROWS_AS(pairwise_f1(singleton_partition(3), singleton_partition(4)), ParseError);
}

TEST_CASE("f1 scores are invariant under feature relabeling") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Partition pred = sample_ground_truth(8, InnerKind::Product, FeatureDist::Normal, seed).partition;
    Partition truth =
        sample_ground_truth(8, InnerKind::Product, FeatureDist::Normal, 50 + seed).partition;
    CHECK(set_f1(pred, pred).f1 == 1.0);
    CHECK(pairwise_f1(pred, pred).f1 == 1.0);

    std::vector<int> perm(8);
    for (int i = 0; i < 8; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng(900 + seed);
    rng.shuffle(perm);
    F1Report before = set_f1(pred, truth);
    F1Report after = set_f1(apply_permutation(pred, perm), apply_permutation(truth, perm));
    CHECK(before.f1 == after.f1);
    CHECK(before.tp == after.tp);
    CHECK(before.fp == after.fp);
    CHECK(before.fn == after.fn);

    F1Report pw_before = pairwise_f1(pred, truth);
    F1Report pw_after =
        pairwise_f1(apply_permutation(pred, perm), apply_permutation(truth, perm));
    CHECK(pw_before.f1 == pw_after.f1);
    CHECK(pw_before.tp == pw_after.tp);
  }
}

TEST_CASE("fidelity is exact for a closed-form linear surrogate") {
  Model m = linear_model({1.5, -2.0, 0.75, 0.5}, 3.0);
  Dataset data = gaussian_background(300, 4, 21);
  Eigen::VectorXd w(4);
  w << 1.5, -2.0, 0.75, 0.5;

  FidelityReport report = surrogate_fidelity(closed_form_linear(w, data), m, data, 50, 17);
  CHECK(report.trials == 50);
  CHECK(report.skipped == 0);
  REQUIRE(report.pairs.size() == 50);
  for (const auto& pair : report.pairs)
    CHECK(std::fabs(pair.implied - pair.actual) <= 1e-9 * (1.0 + std::fabs(pair.actual)));
  CHECK(report.r_squared >= 1.0 - 1e-10);

  FidelityReport again = surrogate_fidelity(closed_form_linear(w, data), m, data, 50, 17);
  CHECK(report.r_squared == again.r_squared);

  // Shifting the model by a constant moves the baseline, not the fit.
  Model shifted = linear_model({1.5, -2.0, 0.75, 0.5}, 103.0);
  FidelityReport moved = surrogate_fidelity(closed_form_linear(w, data), shifted, data, 50, 17);
  CHECK(std::fabs(moved.r_squared - report.r_squared) <= 1e-9);

  CHECK_THROWS_AS(surrogate_fidelity(closed_form_linear(w, data), m, data, 1, 17), ParseError);
}

TEST_CASE("fidelity of the full pipeline on a linear model") {
  Model m = linear_model({2.0, -1.0, 0.5, 1.5}, -0.5);
  Dataset data = gaussian_background(300, 4, 33);
  ExplainParams params;
  params.n = 600;
  params.n_s = 400;
  FidelityReport report = surrogate_fidelity(explain_surrogate(m, data, params), m, data, 25, 5);
  CHECK(report.trials == 25);
  CHECK(report.r_squared >= 0.98);
}

TEST_CASE("grouped explanations beat singleton attributions on an interacting model") {
  Model m = product_model();
  // Features centered at 2 keep |x0*x1| away from 0, so the interaction is
  // visible at essentially every sampled point.
  Dataset data = gaussian_background(400, 3, 8);
  data.rows.array() += 2.0;
  CenteredModel cm = center(m, data);

  ExplainParams params;
  params.n = 500;
  params.n_s = 2000;
  FidelityReport grouped =
      surrogate_fidelity(explain_surrogate(m, data, params), m, data, 40, 11);
  FidelityReport flat =
      surrogate_fidelity(singleton_shap_surrogate(cm, data, 500), m, data, 40, 11);
  CHECK(grouped.r_squared > flat.r_squared + 0.05);
  CHECK(grouped.r_squared >= 0.9);
}

TEST_CASE("importance correlation on exact oracle values") {
  GroundTruthGAM gam = manual_product_gam();
  Rng rng(4);
  std::vector<Eigen::VectorXd> points;
  std::vector<Surrogate> exact, negated;
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x[j] = rng.uniform(0.5, 2.0);
    points.push_back(x);
    std::vector<double> imp = ground_truth_importance(gam, x);
    Surrogate s;
    s.parts = gam.partition.parts;
    s.values = imp;
    exact.push_back(s);
    Surrogate n = s;
    for (double& v : n.values) v = -v;
    negated.push_back(n);
  }

  CorrelationReport up = importance_correlation(exact, gam, points);
  CHECK(up.r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(up.matched == 10);
  CHECK(up.excluded == 0);

  CorrelationReport down = importance_correlation(negated, gam, points);
  CHECK(down.r == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("importance correlation skips unmatched parts") {
  GroundTruthGAM gam = manual_product_gam();
  Rng rng(6);
  std::vector<Eigen::VectorXd> points;
  std::vector<Surrogate> explanations;
  for (int t = 0; t < 4; ++t) {
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x[j] = rng.uniform(0.5, 2.0);
    points.push_back(x);
    std::vector<double> imp = ground_truth_importance(gam, x);
    Surrogate s;
    s.parts = {{0, 1}, {1, 2}};  // second part is not a ground-truth part
    s.values = {imp[0], 0.123};
    explanations.push_back(s);
  }
  CorrelationReport report = importance_correlation(explanations, gam, points);
  CHECK(report.matched == 4);
  CHECK(report.excluded == 4);
  CHECK(report.r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("importance correlation input validation") {
  GroundTruthGAM gam = manual_product_gam();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  Surrogate s;
  s.parts = gam.partition.parts;
  s.values = ground_truth_importance(gam, x);

  // One point and two parts give only two matched observations.
  CHECK_THROWS_AS(importance_correlation({s}, gam, {x}), ParseError);
  CHECK_THROWS_AS(importance_correlation({s, s}, gam, {x}), ParseError);
}

TEST_CASE("ablation run counts candidates and value sets") {
  AblationConfig cfg;
  cfg.d = 8;
  cfg.n_points = 300;
  cfg.trials = 2;
  cfg.params.n = 60;
  cfg.params.n_s = 200;
  cfg.params.seed = 42;

  AblationReport ablated = ablation_run(cfg, false);
  REQUIRE(ablated.rows.size() == 2);
  CHECK(ablated.guard_failures == 0);
  for (const auto& row : ablated.rows) {
    CHECK(!row.guard_failed);
    // Complete graph on 8 features: every partition is admissible and every
    // nonempty feature subset gets estimated once.
    CHECK(row.candidate_partitions == static_cast<std::int64_t>(oracle::kBell[8]));
    CHECK(row.value_sets == 255);
    CHECK(row.set_f1 >= 0.0);
    CHECK(row.set_f1 <= 1.0);
  }
  CHECK(ablated.candidate_partitions == 2 * static_cast<std::int64_t>(oracle::kBell[8]));
  CHECK(ablated.value_fn_evaluations == 510);
  CHECK(ablated.mean_set_f1 >= 0.0);
  CHECK(ablated.mean_set_f1 <= 1.0);
  CHECK(ablated.runtime_seconds >= 0.0);

  AblationReport tested = ablation_run(cfg, true);
  REQUIRE(tested.rows.size() == 2);
  CHECK(tested.guard_failures == 0);
  CHECK(tested.candidate_partitions <= ablated.candidate_partitions);
  CHECK(tested.value_fn_evaluations <= ablated.value_fn_evaluations);

  AblationReport repeat = ablation_run(cfg, true);
  CHECK(repeat.candidate_partitions == tested.candidate_partitions);
  CHECK(repeat.value_fn_evaluations == tested.value_fn_evaluations);
  CHECK(repeat.mean_set_f1 == tested.mean_set_f1);
}

TEST_CASE("ablation guard failures are recorded, not fatal") {
  AblationConfig cfg;
  cfg.d = 8;
  cfg.n_points = 200;
  cfg.trials = 2;
  cfg.params.n = 40;
  cfg.params.n_s = 80;
  cfg.params.seed = 3;
  cfg.params.component_guard = 4;

  AblationReport report = ablation_run(cfg, false);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.guard_failures == 2);
  for (const auto& row : report.rows) CHECK(row.guard_failed);
  CHECK(report.mean_set_f1 == 0.0);
}

TEST_CASE("ablation rejects bad trial counts") {
  AblationConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(ablation_run(cfg, false), ParseError);
}
