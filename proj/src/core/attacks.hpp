#pragma once

#include "bounds.hpp"
#include "branch_bound.hpp"
#include "dataset.hpp"
#include "encode.hpp"
#include "metrics.hpp"
#include "network.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lfa {

enum class AttackKind { Integrity, Availability };
enum class AttackMethod { Milp, Pgd, BruteForce };

const char* to_string(AttackKind kind);
const char* to_string(Mode mode);
const char* to_string(AttackMethod method);
AttackKind parse_attack_kind(const std::string& text);
Mode parse_mode(const std::string& text);
AttackMethod parse_attack_method(const std::string& text);

struct PgdParams {
  int steps = 40;
  double step_size = -1.0;  // negative: eps / 10
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct AttackSpec {
  AttackKind kind = AttackKind::Availability;
  Mode mode = Mode::Max;
  double eps = 0.0;                      // integrity
  int budget = 0;                        // availability
  ImputeMode impute = ImputeMode::Zero;  // availability
  PgdParams pgd;
  long node_limit = 100000;
  double slack = kDefaultSlack;

  static AttackSpec integrity(Mode mode, double eps);
  static AttackSpec availability(Mode mode, ImputeMode impute, int budget);
  void validate() const;
  // "INTE(max, 0.1)" / "AVAI(min, mean, 3)".
  std::string label() const;
};

using Mask = std::vector<int>;  // 1 = available, 0 = blocked

struct SolverStats {
  long nodes = 0;
  long forward_evals = 0;
  double ms = 0.0;
  MilpStatus status = MilpStatus::Optimal;
  double gap = 0.0;
};

struct AttackResult {
  double clean_forecast = 0.0;
  double adversarial_forecast = 0.0;
  Eigen::VectorXd adversarial_input;
  Mask mask;  // availability only
  double mpe = 0.0;  // signed percent vs the clean forecast
  int missing_count = 0;
  double linf = 0.0;  // integrity: ||z_1 - x||_inf actually used
  SolverStats stats;
};

Eigen::VectorXd impute(const Eigen::Ref<const Eigen::VectorXd>& x, const Mask& mask,
                       const ImputationVector& c);

AttackResult integrity_milp(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const AttackSpec& spec);
AttackResult integrity_pgd(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const AttackSpec& spec);
AttackResult availability_milp(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const AttackSpec& spec, const ImputationVector& c);

// Enumerates every mask with at most `budget` blocked features. Ties keep the
// mask with fewer blocked features, then the lexicographically smallest set of
// blocked indices.
AttackResult availability_bruteforce(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const AttackSpec& spec, const ImputationVector& c);

// Both forecast extremes from one enumeration pass.
struct MaskExtremes {
  Mask max_mask;
  double max_forecast = 0.0;
  Mask min_mask;
  double min_forecast = 0.0;
  long evaluated = 0;
};
MaskExtremes enumerate_mask_extremes(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const ImputationVector& c, int budget);

AttackResult run_attack(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const AttackSpec& spec, const ImputationVector& c, AttackMethod method,
                        std::uint64_t sample_seed = 0);

struct BatchOptions {
  int workers = 0;  // 0: hardware concurrency
  AttackMethod method = AttackMethod::Milp;
  bool oracle_check = false;  // availability: compare against brute force
  double oracle_tol = 1e-6;
};

struct BatchFailure {
  std::size_t index;
  std::string message;
};

struct BatchSummary {
  std::size_t samples = 0;
  BoxStats mpe;
  double mean_ms = 0.0;
  double elapsed_ms = 0.0;
  std::vector<double> sample_ms;
  std::vector<BatchFailure> failures;
  std::vector<std::size_t> oracle_mismatches;
};

struct BatchResult {
  std::vector<std::optional<AttackResult>> results;  // dataset order
  BatchSummary summary;
};

BatchResult batch_attack(const Plnn& model, const Eigen::MatrixXd& X, const AttackSpec& spec,
                         const ImputationVector& c, const BatchOptions& options);

int default_workers();

}  // namespace lfa
