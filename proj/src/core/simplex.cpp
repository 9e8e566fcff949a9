#include "simplex.hpp"

#include "error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace lfa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRefactorInterval = 64;

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper };

}  // namespace

LpRelaxation::LpRelaxation(const MilpProblem& problem, LpTolerances tol)
    : problem_(problem), tol_(tol) {
  problem_.validate();
  m_ = problem_.rows.size();
  n_ = problem_.num_vars();
  cols_.assign(n_, {});
  rhs_.resize(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    const auto& r = problem_.rows[i];
    rhs_[i] = r.rhs;
    for (const auto& [j, a] : r.terms)
      if (a != 0.0) cols_[static_cast<std::size_t>(j)].emplace_back(static_cast<int>(i), a);
  }
  // Merge duplicate (row, var) terms.
  for (auto& col : cols_) {
    std::stable_sort(col.begin(), col.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, double>> merged;
    for (const auto& e : col) {
      if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
      else merged.push_back(e);
    }
    col = std::move(merged);
  }
  for (std::size_t i = 0; i < m_; ++i) {
    const auto rel = problem_.rows[i].rel;
    if (rel == Relation::Equal) continue;
    cols_.push_back({{static_cast<int>(i), rel == Relation::LessEq ? 1.0 : -1.0}});
    ++n_slack_;
  }
}

namespace {

class SimplexRun {
 public:
  SimplexRun(std::size_t m, std::size_t n_struct, std::size_t n_slack,
             const std::vector<std::vector<std::pair<int, double>>>& cols,
             const std::vector<double>& rhs, const LpTolerances& tol)
      : m_(m), n_(n_struct), ns_(n_slack), total_(n_struct + n_slack + m), cols_(cols),
        rhs_(rhs), tol_(tol) {
    lo_.assign(total_, 0.0);
    hi_.assign(total_, kInf);
    x_.assign(total_, 0.0);
    cost_.assign(total_, 0.0);
    state_.assign(total_, VarState::AtLower);
    art_sign_.assign(m_, 1.0);
    basis_.assign(m_, -1);
    max_iter_ = tol_.max_iterations > 0 ? tol_.max_iterations
                                         : static_cast<long>(50 * (m_ + total_) + 1000);
  }

  template <class F>
  void for_col(std::size_t j, F&& f) const {
    if (j < n_ + ns_) {
      for (const auto& [r, a] : cols_[j]) f(static_cast<std::size_t>(r), a);
    } else {
      const std::size_t r = j - n_ - ns_;
      f(r, art_sign_[r]);
    }
  }

  void init(const std::vector<double>& lower, const std::vector<double>& upper) {
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
      x_[j] = lo_[j];
      state_[j] = VarState::AtLower;
    }
    std::vector<double> res = rhs_;
    for (std::size_t j = 0; j < n_; ++j)
      if (x_[j] != 0.0)
        for (const auto& [r, a] : cols_[j]) res[static_cast<std::size_t>(r)] -= a * x_[j];

    std::vector<int> slack_of_row(m_, -1);
    for (std::size_t s = n_; s < n_ + ns_; ++s) slack_of_row[static_cast<std::size_t>(cols_[s][0].first)] = static_cast<int>(s);

    needs_phase1_ = false;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t art = n_ + ns_ + i;
      const int s = slack_of_row[i];
      if (s >= 0) {
        const double coef = cols_[static_cast<std::size_t>(s)][0].second;
        const double value = res[i] / coef;
        if (value >= -tol_.feasibility) {
          basis_[i] = s;
          state_[static_cast<std::size_t>(s)] = VarState::Basic;
          x_[static_cast<std::size_t>(s)] = std::max(0.0, value);
          art_sign_[i] = 1.0;
          lo_[art] = hi_[art] = 0.0;
          x_[art] = 0.0;
          state_[art] = VarState::AtLower;
          continue;
        }
        x_[static_cast<std::size_t>(s)] = 0.0;
        state_[static_cast<std::size_t>(s)] = VarState::AtLower;
      }
      art_sign_[i] = res[i] >= 0.0 ? 1.0 : -1.0;
      basis_[i] = static_cast<int>(art);
      state_[art] = VarState::Basic;
      lo_[art] = 0.0;
      hi_[art] = kInf;
      x_[art] = std::abs(res[i]);
      if (x_[art] > 0.0) needs_phase1_ = true;
    }
    binv_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      double coef = 0.0;
      for_col(static_cast<std::size_t>(basis_[i]), [&](std::size_t r, double a) {
        if (r == i) coef = a;
      });
      binv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / coef;
    }
  }

  bool needs_phase1() const { return needs_phase1_; }

  double phase1() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) cost_[n_ + ns_ + i] = 1.0;
    iterate();
    return objective();
  }

  void phase2(const std::vector<double>& cost) {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t art = n_ + ns_ + i;
      hi_[art] = 0.0;
      if (state_[art] != VarState::Basic) {
        x_[art] = 0.0;
        state_[art] = VarState::AtLower;
      }
    }
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = cost[j];
    iterate();
  }

  double objective() const {
    double v = 0.0;
    for (std::size_t j = 0; j < total_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  const std::vector<double>& x() const { return x_; }
  long iterations() const { return iterations_; }

 private:
  void refactor() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m_; ++i)
      for_col(static_cast<std::size_t>(basis_[i]), [&](std::size_t r, double a) {
        B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = a;
      });
    binv_ = B.partialPivLu().inverse();
    Eigen::VectorXd eff = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), m);
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for_col(j, [&](std::size_t r, double a) { eff[static_cast<Eigen::Index>(r)] -= a * x_[j]; });
    }
    const Eigen::VectorXd xb = binv_ * eff;
    for (std::size_t i = 0; i < m_; ++i) x_[static_cast<std::size_t>(basis_[i])] = xb[static_cast<Eigen::Index>(i)];
  }

  void iterate() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd cb(m);
    Eigen::VectorXd y(m);
    Eigen::VectorXd alpha(m);
    bool bland = false;
    int stall = 0;
    double last_obj = objective();
    long local = 0;
    int since_refactor = 0;

    while (true) {
      if (++local > max_iter_)
        throw Error(ErrorCode::CycleLimit, "simplex iteration limit reached");
      if (since_refactor >= kRefactorInterval) {
        refactor();
        since_refactor = 0;
      }

      for (std::size_t i = 0; i < m_; ++i) cb[static_cast<Eigen::Index>(i)] = cost_[static_cast<std::size_t>(basis_[i])];
      y.noalias() = binv_.transpose() * cb;

      // Pricing.
      int enter = -1;
      double best = 0.0;
      for (std::size_t j = 0; j < total_; ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        double d = cost_[j];
        for_col(j, [&](std::size_t r, double a) { d -= y[static_cast<Eigen::Index>(r)] * a; });
        const bool eligible = (state_[j] == VarState::AtLower && d < -tol_.optimality) ||
                              (state_[j] == VarState::AtUpper && d > tol_.optimality);
        if (!eligible) continue;
        if (bland) {
          enter = static_cast<int>(j);
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = static_cast<int>(j);
        }
      }
      if (enter < 0) return;

      const auto q = static_cast<std::size_t>(enter);
      alpha.setZero();
      for_col(q, [&](std::size_t r, double a) { alpha.noalias() += a * binv_.col(static_cast<Eigen::Index>(r)); });
      const double dir = state_[q] == VarState::AtLower ? 1.0 : -1.0;

      // Ratio test.
      double t_min = kInf;
      int leave = -1;
      bool leave_to_lower = true;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = dir * alpha[static_cast<Eigen::Index>(i)];
        const auto b = static_cast<std::size_t>(basis_[i]);
        double t;
        bool to_lower;
        if (a > tol_.pivot && std::isfinite(lo_[b])) {
          t = (x_[b] - lo_[b]) / a;
          to_lower = true;
        } else if (a < -tol_.pivot && std::isfinite(hi_[b])) {
          t = (hi_[b] - x_[b]) / -a;
          to_lower = false;
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        bool take = false;
        if (leave < 0 || t < t_min - 1e-12) {
          take = true;
        } else if (t <= t_min + 1e-12) {
          if (bland) take = basis_[i] < basis_[static_cast<std::size_t>(leave)];
          else take = std::abs(a) > std::abs(alpha[leave]);
        }
        if (take) {
          t_min = std::min(t_min, t);
          leave = static_cast<int>(i);
          leave_to_lower = to_lower;
        }
      }
      const double t_flip = hi_[q] - lo_[q];
      if (leave >= 0) {
        // Recompute exactly for the chosen row so the step never overshoots.
        const double a = dir * alpha[leave];
        const auto b = static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)]);
        t_min = std::max(0.0, leave_to_lower ? (x_[b] - lo_[b]) / a : (hi_[b] - x_[b]) / -a);
      }
      if (leave < 0 && !std::isfinite(t_flip))
        throw Error(ErrorCode::InvalidArgument, "LP relaxation is unbounded");

      ++iterations_;
      ++since_refactor;
      if (leave < 0 || t_flip <= t_min) {
        const double t = t_flip;
        x_[q] = dir > 0 ? hi_[q] : lo_[q];
        for (std::size_t i = 0; i < m_; ++i)
          x_[static_cast<std::size_t>(basis_[i])] -= dir * t * alpha[static_cast<Eigen::Index>(i)];
        state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
      } else {
        const double t = t_min;
        const auto r = static_cast<std::size_t>(leave);
        const auto out = static_cast<std::size_t>(basis_[r]);
        x_[q] += dir * t;
        for (std::size_t i = 0; i < m_; ++i)
          x_[static_cast<std::size_t>(basis_[i])] -= dir * t * alpha[static_cast<Eigen::Index>(i)];
        x_[out] = leave_to_lower ? lo_[out] : hi_[out];
        state_[out] = leave_to_lower ? VarState::AtLower : VarState::AtUpper;
        basis_[r] = static_cast<int>(q);
        state_[q] = VarState::Basic;

        const double piv = alpha[static_cast<Eigen::Index>(r)];
        const Eigen::RowVectorXd prow = binv_.row(static_cast<Eigen::Index>(r)) / piv;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (i == static_cast<Eigen::Index>(r)) continue;
          const double f = alpha[i];
          if (f != 0.0) binv_.row(i).noalias() -= f * prow;
        }
        binv_.row(static_cast<Eigen::Index>(r)) = prow;
      }

      const double obj = objective();
      if (obj < last_obj - 1e-12 * std::max(1.0, std::abs(last_obj))) {
        stall = 0;
        bland = false;
      } else if (++stall > tol_.bland_after) {
        bland = true;
      }
      last_obj = obj;
    }
  }

  std::size_t m_, n_, ns_, total_;
  const std::vector<std::vector<std::pair<int, double>>>& cols_;
  const std::vector<double>& rhs_;
  const LpTolerances& tol_;
  std::vector<double> lo_, hi_, x_, cost_, art_sign_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  Eigen::MatrixXd binv_;
  bool needs_phase1_ = false;
  long max_iter_ = 0;
  long iterations_ = 0;
};

}  // namespace

LpResult LpRelaxation::solve(const std::vector<double>& lower,
                             const std::vector<double>& upper) const {
  if (lower.size() != n_ || upper.size() != n_)
    throw Error(ErrorCode::InvalidArgument, "bound vectors do not match the problem");
  LpResult result;
  for (std::size_t j = 0; j < n_; ++j)
    if (lower[j] > upper[j] + tol_.feasibility) {
      result.status = LpStatus::Infeasible;
      return result;
    }
  std::vector<double> lo = lower;
  std::vector<double> hi = upper;
  for (std::size_t j = 0; j < n_; ++j) hi[j] = std::max(hi[j], lo[j]);

  SimplexRun run(m_, n_, n_slack_, cols_, rhs_, tol_);
  run.init(lo, hi);
  if (run.needs_phase1()) {
    double scale = 1.0;
    for (double b : rhs_) scale = std::max(scale, std::abs(b));
    const double infeas = run.phase1();
    if (infeas > 1e-8 * scale) {
      result.status = LpStatus::Infeasible;
      result.iterations = run.iterations();
      return result;
    }
  }
  const double sign = problem_.sense == Sense::Maximize ? -1.0 : 1.0;
  std::vector<double> cost(n_);
  for (std::size_t j = 0; j < n_; ++j) cost[j] = sign * problem_.objective[j];
  run.phase2(cost);

  result.status = LpStatus::Optimal;
  result.x.assign(run.x().begin(), run.x().begin() + static_cast<std::ptrdiff_t>(n_));
  for (std::size_t j = 0; j < n_; ++j) result.x[j] = std::clamp(result.x[j], lo[j], hi[j]);
  result.objective = problem_.objective_value(result.x);
  result.iterations = run.iterations();
  return result;
}

LpResult lp_solve(const MilpProblem& problem, std::span<const BinaryFixing> fixings,
                  LpTolerances tol) {
  LpRelaxation lp(problem, tol);
  std::vector<double> lo = problem.lower;
  std::vector<double> hi = problem.upper;
  for (const auto& f : fixings) {
    if (f.index >= problem.n_bin) throw Error(ErrorCode::InvalidArgument, "fixing index out of range");
    const std::size_t j = problem.n_cont + f.index;
    lo[j] = std::max(lo[j], f.value);
    hi[j] = std::min(hi[j], f.value);
  }
  return lp.solve(lo, hi);
}

}  // namespace lfa
