#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/bounds.hpp"
#include "core/branch_bound.hpp"
#include "core/encode.hpp"
#include "core/error.hpp"
#include "core/simplex.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace lfa;

namespace {

// Best vertex of a 2-variable LP by intersecting every pair of constraint and
// bound lines.
struct Line {
  double a, b, c;  // a x + b y (rel) c
  Relation rel;
};

std::optional<double> vertex_oracle(const std::vector<Line>& rows, double lo, double hi,
                                    double cx, double cy, bool maximize) {
  std::vector<Line> all = rows;
  all.push_back({1, 0, lo, Relation::GreaterEq});
  all.push_back({1, 0, hi, Relation::LessEq});
  all.push_back({0, 1, lo, Relation::GreaterEq});
  all.push_back({0, 1, hi, Relation::LessEq});
  std::optional<double> best;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double det = all[i].a * all[j].b - all[i].b * all[j].a;
      if (std::abs(det) < 1e-12) continue;
      const double x = (all[i].c * all[j].b - all[i].b * all[j].c) / det;
      const double y = (all[i].a * all[j].c - all[i].c * all[j].a) / det;
      bool ok = true;
      for (const auto& l : all) {
        const double v = l.a * x + l.b * y;
        if (l.rel == Relation::LessEq && v > l.c + 1e-9) ok = false;
        if (l.rel == Relation::GreaterEq && v < l.c - 1e-9) ok = false;
        if (l.rel == Relation::Equal && std::abs(v - l.c) > 1e-9) ok = false;
      }
      if (!ok) continue;
      const double obj = cx * x + cy * y;
      if (!best || (maximize ? obj > *best : obj < *best)) best = obj;
    }
  return best;
}

Plnn relu_unit() {
  return Plnn({Layer{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1)},
               Layer{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1)}});
}

ImputationVector zero_c(Eigen::Index p) {
  ImputationVector c;
  c.c = Eigen::VectorXd::Zero(p);
  return c;
}

}  // namespace

TEST_CASE("lp: single bounded variable") {
  MilpProblem p;
  const int x = p.add_continuous(0.0, 1.0, "x");
  p.add_row({{x, 1.0}}, Relation::LessEq, 0.5);
  p.objective[static_cast<std::size_t>(x)] = 1.0;
  p.sense = Sense::Maximize;
  const LpResult r = lp_solve(p);
  CHECK(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.5));
}

TEST_CASE("lp: textbook problem") {
  MilpProblem p;
  const int x = p.add_continuous(0.0, 10.0, "x");
  const int y = p.add_continuous(0.0, 10.0, "y");
  p.add_row({{x, 1.0}}, Relation::LessEq, 4.0);
  p.add_row({{y, 2.0}}, Relation::LessEq, 12.0);
  p.add_row({{x, 3.0}, {y, 2.0}}, Relation::LessEq, 18.0);
  p.objective = {3.0, 5.0};
  p.sense = Sense::Maximize;
  const LpResult r = lp_solve(p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(36.0));
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(6.0));
}

TEST_CASE("lp: infeasible rows") {
  MilpProblem p;
  const int x = p.add_continuous(0.0, 1.0, "x");
  p.add_row({{x, 1.0}}, Relation::GreaterEq, 2.0);
  CHECK(lp_solve(p).status == LpStatus::Infeasible);
}

TEST_CASE("lp: random two-variable problems match vertex enumeration") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    MilpProblem p;
    p.add_continuous(-2.0, 3.0, "x");
    p.add_continuous(-2.0, 3.0, "y");
    std::vector<Line> lines;
    for (int r = 0; r < 4; ++r) {
      const Line l{u(rng), u(rng), u(rng), r % 3 == 0 ? Relation::GreaterEq : Relation::LessEq};
      lines.push_back(l);
      p.add_row({{0, l.a}, {1, l.b}}, l.rel, l.c);
    }
    if (trial % 5 == 0) {
      const Line l{u(rng), u(rng), 0.1 * u(rng), Relation::Equal};
      lines.push_back(l);
      p.add_row({{0, l.a}, {1, l.b}}, l.rel, l.c);
    }
    p.objective = {u(rng), u(rng)};
    p.sense = trial % 2 ? Sense::Maximize : Sense::Minimize;
    const auto expect =
        vertex_oracle(lines, -2.0, 3.0, p.objective[0], p.objective[1], p.sense == Sense::Maximize);
    const LpResult r = lp_solve(p);
    if (!expect) {
      CHECK(r.status == LpStatus::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(std::abs(r.objective - *expect) < 1e-7);
    CHECK(p.max_violation(r.x) < 1e-8);
  }
  CHECK(feasible > 50);
}

TEST_CASE("branch and bound matches exhaustive search on knapsacks") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    MilpProblem p;
    const int n = 9;
    std::vector<double> w(n), v(n);
    for (int i = 0; i < n; ++i) {
      w[static_cast<std::size_t>(i)] = u(rng);
      v[static_cast<std::size_t>(i)] = u(rng);
    }
    const int slack = p.add_continuous(0.0, 0.3, "s");
    std::vector<std::pair<int, double>> cap;
    for (int i = 0; i < n; ++i) cap.push_back({p.add_binary("b" + std::to_string(i)), w[static_cast<std::size_t>(i)]});
    cap.push_back({slack, -1.0});
    p.add_row(cap, Relation::LessEq, 2.0);
    p.objective.assign(p.num_vars(), 0.0);
    for (int i = 0; i < n; ++i) p.objective[static_cast<std::size_t>(i + 1)] = v[static_cast<std::size_t>(i)];
    p.objective[static_cast<std::size_t>(slack)] = -0.5;
    p.sense = Sense::Maximize;

    double best = -INFINITY;
    for (int bits = 0; bits < (1 << n); ++bits) {
      double ww = 0.0, vv = 0.0;
      for (int i = 0; i < n; ++i)
        if ((bits >> i) & 1) {
          ww += w[static_cast<std::size_t>(i)];
          vv += v[static_cast<std::size_t>(i)];
        }
      const double s = std::max(0.0, ww - 2.0);
      if (s > 0.3) continue;
      best = std::max(best, vv - 0.5 * s);
    }
    const MilpSolution sol = solve_bb(p);
    REQUIRE(sol.status == MilpStatus::Optimal);
    CHECK(std::abs(sol.objective - best) < 1e-6);
    CHECK(sol.root_bound >= sol.objective - 1e-9);
    for (double b : sol.x_bin) CHECK((b == 0.0 || b == 1.0));
    const MilpSolution again = solve_bb(p);
    CHECK(again.nodes_explored == sol.nodes_explored);
    CHECK(again.objective == sol.objective);
  }
}

TEST_CASE("encode_integrity structure and trivial optima") {
  const Plnn m = Plnn::init_uniform({12, 16, 8, 1}, 2);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.4);
  const AttackEncoding enc =
      encode_integrity(m, x, 0.1, propagate(m, init_bounds_integrity(x, 0.1)), Mode::Max);
  CHECK(enc.problem.n_bin == 24);
  CHECK(enc.mask_bins.empty());

  for (Mode mode : {Mode::Max, Mode::Min}) {
    const AttackEncoding e0 =
        encode_integrity(m, x, 0.0, propagate(m, init_bounds_integrity(x, 0.0)), mode);
    const MilpSolution s = solve_bb(e0.problem);
    REQUIRE(s.status == MilpStatus::Optimal);
    CHECK(std::abs(s.objective - predict(m, x)) < 1e-6);
  }

  const Plnn unit = relu_unit();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const IntervalStack box = propagate(unit, init_bounds_integrity(zero, 1.0));
  // A one-input net has no fixed coordinates.
  CHECK(solve_bb(encode_integrity(unit, zero, 1.0, box, Mode::Max).problem).objective ==
        doctest::Approx(1.0));
  CHECK(solve_bb(encode_integrity(unit, zero, 1.0, box, Mode::Min).problem).objective ==
        doctest::Approx(0.0).scale(1e-9));
}

TEST_CASE("encode_availability structure, budgets and errors") {
  const Plnn m = Plnn::init_uniform({12, 16, 8, 1}, 3);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(12, 0.1, 0.9);
  const ImputationVector c = zero_c(12);
  const IntervalStack b = propagate(m, init_bounds_availability(x, c), kDefaultSlack);
  const AttackEncoding enc = encode_availability(m, x, c, 3, b, Mode::Max);
  CHECK(enc.problem.n_bin == 24 + 6);
  CHECK(enc.mask_bins.size() == 6);

  const MilpSolution s0 = solve_bb(encode_availability(m, x, c, 0, b, Mode::Max).problem);
  CHECK(std::abs(s0.objective - predict(m, x)) < 1e-6);

  const oracle::RefNet ref = oracle::copy_net(m);
  for (Mode mode : {Mode::Max, Mode::Min}) {
    const MilpSolution s6 = solve_bb(encode_availability(m, x, c, 6, b, mode).problem);
    const oracle::Extremes e = oracle::enumerate(ref, oracle::to_vec(x), oracle::to_vec(c.c), 6);
    CHECK(std::abs(s6.objective - (mode == Mode::Max ? e.max : e.min)) < 1e-6);
  }

  CHECK_THROWS_AS(encode_availability(m, x, c, 7, b, Mode::Max), Error);
  IntervalStack broken = b;
  broken.lower[1][0] = broken.upper[1][0] + 1.0;
  try {
    encode_availability(m, x, c, 2, broken, Mode::Max);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBounds);
  }

  // All mask binaries fixed to 0 violates any budget below 6.
  std::vector<BinaryFixing> fix;
  for (int v : enc.mask_bins) fix.push_back({static_cast<std::size_t>(v) - enc.problem.n_cont, 0.0});
  CHECK(lp_solve(enc.problem, fix).status == LpStatus::Infeasible);
}

TEST_CASE("forward trajectories are feasible for the encodings") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Plnn m = Plnn::init_uniform({12, 16, 8, 1}, seed);
    Eigen::VectorXd x(12);
    for (int j = 0; j < 12; ++j) x[j] = 0.5 + 0.4 * u(rng);
    const double eps = 0.2;
    const AttackEncoding enc =
        encode_integrity(m, x, eps, propagate(m, init_bounds_integrity(x, eps)), Mode::Max);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd z = x;
      for (int j = 0; j < 6; ++j) z[j] += eps * u(rng);
      CHECK(enc.problem.max_violation(trajectory_assignment(enc, m, z)) < 1e-9);
    }
    ImputationVector c = zero_c(12);
    for (int j = 0; j < 6; ++j) c.c[j] = 0.5;
    const AttackEncoding av = encode_availability(
        m, x, c, 4, propagate(m, init_bounds_availability(x, c), kDefaultSlack), Mode::Min);
    for (int bits = 0; bits < 64; ++bits) {
      if (__builtin_popcount(static_cast<unsigned>(bits)) > 4) continue;
      std::vector<int> mask(6, 1);
      Eigen::VectorXd z = x;
      for (int j = 0; j < 6; ++j)
        if ((bits >> j) & 1) {
          mask[static_cast<std::size_t>(j)] = 0;
          z[j] = c.c[j];
        }
      CHECK(av.problem.max_violation(trajectory_assignment(av, m, z, mask)) < 1e-9);
    }
  }
}

TEST_CASE("relaxation dominance, determinism and budget monotonicity") {
  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  const ImputationVector& c = d.data.manifest.mean;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = d.data.test.X.row(i).transpose();
    const IntervalStack b = propagate(d.model, init_bounds_availability(x, c), kDefaultSlack);
    double prev_max = -INFINITY, prev_min = INFINITY;
    for (int beta = 0; beta <= 6; ++beta) {
      const MilpSolution hi = solve_bb(encode_availability(d.model, x, c, beta, b, Mode::Max).problem);
      const MilpSolution lo = solve_bb(encode_availability(d.model, x, c, beta, b, Mode::Min).problem);
      CHECK(hi.root_bound >= hi.objective - 1e-9);
      CHECK(lo.root_bound <= lo.objective + 1e-9);
      CHECK(hi.objective >= prev_max - 1e-9);
      CHECK(lo.objective <= prev_min + 1e-9);
      prev_max = hi.objective;
      prev_min = lo.objective;
    }
    const AttackEncoding enc = encode_availability(d.model, x, c, 6, b, Mode::Max);
    const MilpSolution a = solve_bb(enc.problem);
    const MilpSolution bb = solve_bb(enc.problem);
    CHECK(a.x_cont == bb.x_cont);
    CHECK(a.nodes_explored == bb.nodes_explored);
  }
}

TEST_CASE("solve_bb node accounting and limits") {
  MilpProblem p;
  const int x = p.add_continuous(0.0, 5.0, "x");
  const int b = p.add_binary("b", 1.0, 1.0);
  p.add_row({{x, 1.0}, {b, -2.0}}, Relation::LessEq, 1.0);
  p.objective.assign(p.num_vars(), 0.0);
  p.objective[static_cast<std::size_t>(x)] = 1.0;
  p.sense = Sense::Maximize;
  const MilpSolution s = solve_bb(p);
  CHECK(s.status == MilpStatus::Optimal);
  CHECK(s.nodes_explored == 1);
  CHECK(s.objective == doctest::Approx(3.0));

  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  bool saw_limit = false;
  for (int i = 0; i < 20 && !saw_limit; ++i) {
    const Eigen::VectorXd xi = d.data.test.X.row(i).transpose();
    const AttackEncoding enc = encode_integrity(
        d.model, xi, 0.3, propagate(d.model, init_bounds_integrity(xi, 0.3)), Mode::Max);
    BbOptions opts;
    opts.node_limit = 1;
    const MilpSolution lim = solve_bb(enc.problem, opts);
    if (lim.status != MilpStatus::NodeLimit) continue;
    saw_limit = true;
    CHECK(lim.bound >= lim.objective);
    CHECK(lim.gap == doctest::Approx(lim.bound - lim.objective));
    CHECK(lim.objective >= predict(d.model, xi) - 1e-9);
  }
  CHECK(saw_limit);
}

TEST_CASE("LP dump") {
  const Plnn m = Plnn::init_uniform({12, 4, 1}, 1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.5);
  const AttackEncoding enc = encode_availability(
      m, x, zero_c(12), 2, propagate(m, init_bounds_availability(x, zero_c(12)), kDefaultSlack),
      Mode::Max);
  std::ostringstream out;
  write_lp(enc.problem, out);
  const std::string text = out.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("Binaries") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
