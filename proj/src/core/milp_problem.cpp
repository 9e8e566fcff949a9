#include "milp_problem.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lfa {

int MilpProblem::add_continuous(double lo, double hi, std::string name) {
  if (n_bin != 0)
    throw Error(ErrorCode::InvalidArgument, "continuous variables must precede binaries");
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(0.0);
  names.push_back(std::move(name));
  return static_cast<int>(n_cont++);
}

int MilpProblem::add_binary(std::string name, double lo, double hi) {
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(0.0);
  names.push_back(std::move(name));
  ++n_bin;
  return static_cast<int>(n_cont + n_bin - 1);
}

void MilpProblem::add_row(std::vector<std::pair<int, double>> terms, Relation rel, double rhs,
                          std::string name) {
  rows.push_back({std::move(terms), rel, rhs, std::move(name)});
}

void MilpProblem::validate() const {
  const std::size_t n = num_vars();
  if (lower.size() != n || upper.size() != n || objective.size() != n)
    throw Error(ErrorCode::InvalidArgument, "problem vectors disagree with variable count");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw Error(ErrorCode::InvalidArgument, "variable " + names[j] + " has a non-finite bound");
    if (lower[j] > upper[j])
      throw Error(ErrorCode::InvalidBounds, "variable " + names[j] + " has lower > upper");
    if (is_binary(j) && (lower[j] < 0.0 || upper[j] > 1.0))
      throw Error(ErrorCode::InvalidBounds, "binary " + names[j] + " bounds outside [0,1]");
  }
  for (const auto& r : rows) {
    if (!std::isfinite(r.rhs)) throw Error(ErrorCode::InvalidArgument, "non-finite rhs");
    for (const auto& [j, a] : r.terms)
      if (j < 0 || static_cast<std::size_t>(j) >= n || !std::isfinite(a))
        throw Error(ErrorCode::InvalidArgument, "bad row term in " + r.name);
  }
}

double MilpProblem::objective_value(const std::vector<double>& x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < objective.size(); ++j) v += objective[j] * x[j];
  return v;
}

double MilpProblem::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, lower[j] - x[j]);
    worst = std::max(worst, x[j] - upper[j]);
  }
  for (const auto& r : rows) {
    double lhs = 0.0;
    for (const auto& [j, a] : r.terms) lhs += a * x[static_cast<std::size_t>(j)];
    switch (r.rel) {
      case Relation::LessEq: worst = std::max(worst, lhs - r.rhs); break;
      case Relation::GreaterEq: worst = std::max(worst, r.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - r.rhs)); break;
    }
  }
  return worst;
}

void write_lp(const MilpProblem& p, std::ostream& out) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto name = [&](std::size_t j) {
    return p.names[j].empty() ? "x" + std::to_string(j) : p.names[j];
  };
  out << (p.sense == Sense::Maximize ? "Maximize\n" : "Minimize\n") << " obj:";
  for (std::size_t j = 0; j < p.objective.size(); ++j)
    if (p.objective[j] != 0.0)
      out << (p.objective[j] < 0 ? " - " : " + ") << num(std::abs(p.objective[j])) << " " << name(j);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& r = p.rows[i];
    out << " " << (r.name.empty() ? "r" + std::to_string(i) : r.name) << ":";
    for (const auto& [j, a] : r.terms)
      out << (a < 0 ? " - " : " + ") << num(std::abs(a)) << " " << name(static_cast<std::size_t>(j));
    out << (r.rel == Relation::LessEq ? " <= " : r.rel == Relation::GreaterEq ? " >= " : " = ")
        << num(r.rhs) << "\n";
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < p.num_vars(); ++j)
    out << " " << num(p.lower[j]) << " <= " << name(j) << " <= " << num(p.upper[j]) << "\n";
  if (p.n_bin > 0) {
    out << "Binaries\n";
    for (std::size_t j = p.n_cont; j < p.num_vars(); ++j) out << " " << name(j) << "\n";
  }
  out << "End\n";
}

}  // namespace lfa
