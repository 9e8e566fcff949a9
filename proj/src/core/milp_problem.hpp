#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace lfa {

enum class Relation { LessEq, GreaterEq, Equal };
enum class Sense { Minimize, Maximize };

struct LinearRow {
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
  std::string name;
};

// Continuous variables occupy indices [0, n_cont); binaries follow. Binaries
// carry their own [lo, hi] so encoders can pre-fix them.
struct MilpProblem {
  std::size_t n_cont = 0;
  std::size_t n_bin = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearRow> rows;
  std::vector<double> objective;
  Sense sense = Sense::Minimize;
  std::vector<std::string> names;
  // Optional known-feasible assignment, used as the starting incumbent.
  std::optional<std::vector<double>> hint;

  std::size_t num_vars() const { return n_cont + n_bin; }
  bool is_binary(std::size_t j) const { return j >= n_cont; }

  int add_continuous(double lo, double hi, std::string name);
  int add_binary(std::string name, double lo = 0.0, double hi = 1.0);
  void add_row(std::vector<std::pair<int, double>> terms, Relation rel, double rhs,
               std::string name = {});

  // Throws InvalidArgument on non-finite bounds, lo > hi, or bad indices.
  void validate() const;

  double objective_value(const std::vector<double>& x) const;
  // Largest bound or row violation of `x`.
  double max_violation(const std::vector<double>& x) const;
};

struct BinaryFixing {
  std::size_t index;  // binary index in [0, n_bin)
  double value;       // 0 or 1
};

// CPLEX-LP style plain text dump.
void write_lp(const MilpProblem& problem, std::ostream& out);

}  // namespace lfa
