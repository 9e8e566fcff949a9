#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/bounds.hpp"
#include "core/error.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace lfa;

namespace {

Eigen::VectorXd sample_in(const Box& box, std::mt19937_64& rng) {
  Eigen::VectorXd x(box.lower.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    std::uniform_real_distribution<double> u(box.lower[j], box.upper[j]);
    x[j] = box.lower[j] == box.upper[j] ? box.lower[j] : u(rng);
  }
  return x;
}

// Counts preactivations outside their interval over random points and corners.
int violations(const Plnn& m, const Box& box, std::mt19937_64& rng, int samples) {
  const IntervalStack s = propagate(m, box);
  const oracle::RefNet ref = oracle::copy_net(m);
  int bad = 0;
  auto check = [&](const Eigen::VectorXd& x) {
    std::vector<oracle::Vec> pre;
    oracle::forward(ref, oracle::to_vec(x), &pre);
    for (std::size_t k = 0; k < pre.size(); ++k)
      for (std::size_t u = 0; u < pre[k].size(); ++u) {
        const auto ui = static_cast<Eigen::Index>(u);
        if (pre[k][u] < s.lower[k + 1][ui] || pre[k][u] > s.upper[k + 1][ui]) ++bad;
      }
  };
  for (int i = 0; i < samples; ++i) check(sample_in(box, rng));
  for (int corner = 0; corner < 64; ++corner) {
    Eigen::VectorXd x = box.lower;
    for (int j = 0; j < 6; ++j)
      if ((corner >> j) & 1) x[j] = box.upper[j];
    check(x);
  }
  return bad;
}

}  // namespace

TEST_CASE("availability box") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.8);
  ImputationVector c;
  c.c = Eigen::VectorXd::Zero(12);
  x[0] = 0.7;
  c.c[0] = 0.3;
  x[1] = 0.5;
  c.c[1] = 0.5;
  Box b = init_bounds_availability(x, c, 0.0);
  CHECK(b.lower[0] == 0.3);
  CHECK(b.upper[0] == 0.7);
  b = init_bounds_availability(x, c, 1e-6);
  CHECK(b.lower[1] == 0.5 - 1e-6);
  CHECK(b.upper[1] == 0.5 + 1e-6);
  CHECK(b.lower[8] == 0.8);
  CHECK(b.upper[8] == 0.8);
}

TEST_CASE("integrity box") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.5);
  x[2] = 0.05;
  Box b = init_bounds_integrity(x, 0.0);
  CHECK(b.lower == x);
  CHECK(b.upper == x);
  b = init_bounds_integrity(x, 0.1);
  CHECK(b.lower[0] == doctest::Approx(0.4));
  CHECK(b.upper[0] == doctest::Approx(0.6));
  CHECK(b.lower[2] == doctest::Approx(-0.05));
  CHECK(b.lower[9] == 0.5);
  CHECK(b.upper[9] == 0.5);
}

TEST_CASE("propagate hand example") {
  const Plnn m({Layer{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1)},
                Layer{Eigen::MatrixXd::Constant(1, 1, -2.0), Eigen::VectorXd::Constant(1, 1.0)}});
  const Box box{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 2.0)};
  const IntervalStack s = propagate(m, box);
  REQUIRE(s.levels() == 3);
  CHECK(s.lower[1][0] == doctest::Approx(-1.0));
  CHECK(s.upper[1][0] == doctest::Approx(2.0));
  CHECK(s.lower[2][0] == doctest::Approx(-3.0));
  CHECK(s.upper[2][0] == doctest::Approx(1.0));
}

TEST_CASE("zero weights propagate the bias exactly") {
  std::vector<Layer> layers;
  layers.push_back({Eigen::MatrixXd::Zero(4, 12), Eigen::VectorXd::LinSpaced(4, -1.0, 2.0)});
  layers.push_back({Eigen::MatrixXd::Zero(3, 4), Eigen::VectorXd::LinSpaced(3, 0.5, 1.5)});
  layers.push_back({Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Constant(1, 7.0)});
  const Plnn m(layers);
  const Box box = init_bounds_integrity(Eigen::VectorXd::Constant(12, 0.5), 0.3);
  const IntervalStack s = propagate(m, box);
  for (std::size_t k = 1; k < s.levels(); ++k) {
    CHECK(s.lower[k] == layers[k - 1].b);
    CHECK(s.upper[k] == layers[k - 1].b);
  }
}

TEST_CASE("propagation is sound on random nets") {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Plnn m = Plnn::init_uniform({12, 16, 8, 1}, seed);
    const Eigen::VectorXd x = sample_in(init_bounds_integrity(Eigen::VectorXd::Constant(12, 0.5), 0.5), rng);
    CHECK(violations(m, init_bounds_integrity(x, 0.2), rng, 2000) == 0);
    ImputationVector c;
    c.c = Eigen::VectorXd::Zero(12);
    CHECK(violations(m, init_bounds_availability(x, c), rng, 2000) == 0);
  }
}

TEST_CASE("enlarging the box never shrinks intervals") {
  const Plnn m = Plnn::init_uniform({12, 16, 8, 1}, 8);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.4);
  const IntervalStack small = propagate(m, init_bounds_integrity(x, 0.05));
  const IntervalStack big = propagate(m, init_bounds_integrity(x, 0.2));
  for (std::size_t k = 0; k < small.levels(); ++k) {
    CHECK((big.lower[k].array() <= small.lower[k].array()).all());
    CHECK((big.upper[k].array() >= small.upper[k].array()).all());
  }
  const IntervalStack point = propagate(m, init_bounds_integrity(x, 0.0));
  const ForwardPass fp = forward(m, x);
  for (std::size_t k = 0; k + 1 < point.levels(); ++k) {
    CHECK((point.lower[k + 1].array() <= fp.preactivations[k].array()).all());
    CHECK((point.upper[k + 1].array() >= fp.preactivations[k].array()).all());
  }
}

TEST_CASE("inverted boxes are rejected") {
  const Plnn m = Plnn::init_uniform({12, 4, 1}, 1);
  Box box = init_bounds_integrity(Eigen::VectorXd::Constant(12, 0.5), 0.1);
  box.lower[0] = 1.0;
  try {
    propagate(m, box);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBounds);
  }
}
