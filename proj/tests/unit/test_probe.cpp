#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "emoprobe/errors.hpp"
#include "emoprobe/probe.hpp"
#include "oracles.hpp"
#include "random_data.hpp"

using namespace emoprobe;

namespace {

ProbeParameters identity_params(Eigen::Index d) {
  ProbeParameters p;
  p.label_projection = Eigen::MatrixXd::Identity(d, d);
  p.event_projection = Eigen::MatrixXd::Identity(d, d);
  p.temperature = 0.1;
  return p;
}

ContrastiveBatch to_batch(const testdata::RandomBatch& b) {
  return make_batch(b.anchors, b.anchor_category, b.candidates, b.candidate_category);
}

double oracle_loss(const ProbeParameters& p, const testdata::RandomBatch& b) {
  return oracle::supcon_loss(oracle::from_eigen(p.label_projection),
                             oracle::from_eigen(p.event_projection), p.temperature,
                             oracle::from_eigen(b.anchors), b.anchor_category,
                             oracle::from_eigen(b.candidates), b.candidate_category);
}

// Largest relative error between the analytic gradient and central
// differences of the oracle loss.
double max_gradient_error(const ProbeParameters& p, const testdata::RandomBatch& b,
                          double floor) {
  auto w1 = oracle::from_eigen(p.label_projection);
  auto w2 = oracle::from_eigen(p.event_projection);
  const auto anchors = oracle::from_eigen(b.anchors);
  const auto cands = oracle::from_eigen(b.candidates);
  auto loss = [&] {
    return oracle::supcon_loss(w1, w2, p.temperature, anchors, b.anchor_category, cands,
                               b.candidate_category);
  };
  const auto fd1 = oracle::central_differences(w1, 1e-5, loss);
  const auto fd2 = oracle::central_differences(w2, 1e-5, loss);
  const auto g = supcon_gradient(p, to_batch(b));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.label_projection.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.label_projection.cols(); ++j) {
      const auto r = static_cast<std::size_t>(i);
      const auto c = static_cast<std::size_t>(j);
      worst = std::max(worst, oracle::relative_error(g.label_projection(i, j), fd1[r][c], floor));
      worst = std::max(worst, oracle::relative_error(g.event_projection(i, j), fd2[r][c], floor));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("similarity closed forms with identity projections") {
  const auto p2 = identity_params(2);
  Eigen::Vector2d e1(1, 0), e2(0, 1), diag(1, 1);
  CHECK(similarity(p2, e1, e1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(similarity(p2, e1, e2) == doctest::Approx(0.0));
  CHECK(similarity(p2, e1, diag) == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-12));

  const auto p5 = identity_params(5);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(5);
  v(0) = 1.0;
  CHECK(similarity(p5, v, v) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("similarity reports which projection collapsed") {
  auto p = identity_params(2);
  Eigen::Vector2d zero(0, 0), e1(1, 0);
  try {
    similarity(p, zero, e1);
    FAIL("expected DegenerateProjectionError");
  } catch (const DegenerateProjectionError& e) {
    CHECK(e.side() == ProjectionSide::kLabel);
  }
  try {
    similarity(p, e1, zero);
    FAIL("expected DegenerateProjectionError");
  } catch (const DegenerateProjectionError& e) {
    CHECK(e.side() == ProjectionSide::kEvent);
  }
  Eigen::MatrixXd labels(2, 2);
  labels << 1, 0, 0, 0;
  try {
    similarity_matrix(p, labels, Eigen::MatrixXd::Identity(2, 2));
    FAIL("expected DegenerateProjectionError");
  } catch (const DegenerateProjectionError& e) {
    CHECK(e.side() == ProjectionSide::kLabel);
    CHECK(e.row() == 1);
  }
}

TEST_CASE("similarity matrix matches the double-loop oracle") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testdata::random_params(rng, 8, 5, 0.1);
    const auto labels = testdata::gaussian(rng, 3, 8);
    const auto events = testdata::gaussian(rng, 5, 8);
    const auto s = similarity_matrix(p, labels, events);
    const auto expected =
        oracle::similarity_matrix(oracle::from_eigen(p.label_projection),
                                  oracle::from_eigen(p.event_projection),
                                  oracle::from_eigen(labels), oracle::from_eigen(events));
    REQUIRE(s.rows() == 3);
    REQUIRE(s.cols() == 5);
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) {
        CHECK(std::abs(s(i, j) - expected[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) <= 1e-6);
        CHECK(std::abs(s(i, j) - similarity(p, labels.row(i).transpose(), events.row(j).transpose())) <= 1e-6);
        CHECK(s(i, j) >= -1.0 - 1e-9);
        CHECK(s(i, j) <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("similarity matrix is invariant to positive rescaling of either projection") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = testdata::random_params(rng, 6, 4, 0.1);
    const auto labels = testdata::gaussian(rng, 4, 6);
    const auto events = testdata::gaussian(rng, 7, 6);
    const auto before = similarity_matrix(p, labels, events);
    p.label_projection *= scale(rng);
    p.event_projection *= scale(rng);
    const auto after = similarity_matrix(p, labels, events);
    CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("supcon loss closed forms") {
  const auto p = identity_params(2);
  Eigen::MatrixXd anchor(1, 2);
  anchor << 1, 0;

  SUBCASE("single positive candidate gives zero loss") {
    Eigen::MatrixXd cands(1, 2);
    cands << 0.3, 0.7;
    const auto batch = make_batch(anchor, {0}, cands, {0});
    CHECK(std::abs(supcon_loss(p, batch)) <= 1e-12);
  }

  SUBCASE("two candidates with equal similarity give ln 2 for any temperature") {
    Eigen::MatrixXd cands(2, 2);
    cands << 1, 1, 1, -1;  // both at 45 degrees from the anchor
    const auto batch = make_batch(anchor, {0}, cands, {0, 1});
    for (double tau : {0.05, 0.1, 1.0, 7.0}) {
      auto q = p;
      q.temperature = tau;
      CHECK(std::abs(supcon_loss(q, batch) - std::numbers::ln2) <= 1e-12);
    }
  }

  SUBCASE("anchors without positives are dropped") {
    Eigen::MatrixXd anchors(2, 2);
    anchors << 1, 0, 0, 1;
    Eigen::MatrixXd cands(1, 2);
    cands << 1, 0;
    const auto batch = make_batch(anchors, {0, 1}, cands, {0});
    CHECK(batch.anchor_count() == 1);
    CHECK(batch.anchor_category[0] == 0);
  }

  SUBCASE("empty batch is an error") {
    Eigen::MatrixXd cands(1, 2);
    cands << 1, 0;
    const auto batch = make_batch(anchor, {0}, cands, {1});
    CHECK(batch.anchor_count() == 0);
    CHECK_THROWS_AS(supcon_loss(p, batch), Error);
  }
}

TEST_CASE("supcon loss matches the straightforward reimplementation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = testdata::random_params(rng, 4, 3, 0.1);
    const auto b = testdata::random_batch(rng, 2, 6, 4);
    const auto batch = to_batch(b);
    CHECK(std::abs(supcon_loss(p, batch) - oracle_loss(p, b)) <= 1e-8);
    const auto terms = supcon_anchor_terms(p, batch);
    CHECK(terms.minCoeff() >= -1e-12);
  }
}

TEST_CASE("gradient is exactly zero when every candidate is positive with equal similarity") {
  const auto p = identity_params(3);
  Eigen::MatrixXd anchor(1, 3);
  anchor << 1, 0, 0;
  Eigen::MatrixXd cands(3, 3);
  cands << 1, 1, 0,   //
      1, -1, 0,       //
      1, 0, 1;        // all at 45 degrees
  const auto batch = make_batch(anchor, {0}, cands, {0, 0, 0});
  const auto g = supcon_gradient(p, batch);
  CHECK(g.label_projection.norm() <= 1e-8);
  CHECK(g.event_projection.norm() <= 1e-8);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testdata::random_params(rng, 4, 3, 0.1);
    const auto b = testdata::random_batch(rng, 3, 6, 4);
    CHECK(max_gradient_error(p, b, 1e-8) < 1e-4);
  }
}

TEST_CASE("rescaling W1 changes the gradient but not the similarities") {
  std::mt19937_64 rng(8);
  const auto p = testdata::random_params(rng, 4, 3, 0.1);
  const auto b = testdata::random_batch(rng, 3, 6, 4);
  auto q = p;
  q.label_projection *= 2.0;
  const auto batch = to_batch(b);
  const auto gp = supcon_gradient(p, batch);
  const auto gq = supcon_gradient(q, batch);
  CHECK((gp.label_projection - gq.label_projection).norm() > 1e-6);
  // d/dW of a scale-invariant function scales by 1/s.
  CHECK((gp.label_projection - 2.0 * gq.label_projection).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(gp.loss - gq.loss) <= 1e-12);
  CHECK((similarity_matrix(p, b.anchors, b.candidates) -
         similarity_matrix(q, b.anchors, b.candidates)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("init_parameters is seeded, float32-exact and scaled by 1/sqrt(d)") {
  const auto a = init_parameters(64, 16, 0.1, 9);
  const auto b = init_parameters(64, 16, 0.1, 9);
  const auto c = init_parameters(64, 16, 0.1, 10);
  CHECK(a.label_projection == b.label_projection);
  CHECK(a.event_projection == b.event_projection);
  CHECK(a.label_projection != c.label_projection);
  CHECK(representable_as_float32(a.label_projection));
  CHECK(representable_as_float32(a.event_projection));
  const double rms = std::sqrt(a.label_projection.squaredNorm() /
                               static_cast<double>(a.label_projection.size()));
  CHECK(rms == doctest::Approx(1.0 / 8.0).epsilon(0.15));
  CHECK_THROWS_AS(init_parameters(0, 4, 0.1, 1), ConfigError);
}

TEST_CASE("parameter validation") {
  auto p = identity_params(3);
  CHECK_NOTHROW(p.validate());
  p.temperature = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = identity_params(3);
  p.event_projection = Eigen::MatrixXd::Identity(2, 3);
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = identity_params(3);
  p.label_projection(0, 0) = std::nan("");
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
