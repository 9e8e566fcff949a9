#include "attacks.hpp"

#include "error.hpp"
#include "parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

namespace lfa {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool close_enough(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

bool better(Mode mode, double candidate, double incumbent) {
  return mode == Mode::Max ? candidate > incumbent : candidate < incumbent;
}

void finish(AttackResult& r) { r.mpe = mpe_term(r.adversarial_forecast, r.clean_forecast); }

// Calls visit(mask) for every mask with at most `budget` zeros, ordered by the
// number of zeros and then lexicographically by the set of blocked indices.
template <class Visit>
void for_each_mask(int flex, int budget, Visit&& visit) {
  Mask mask(static_cast<std::size_t>(flex), 1);
  for (int k = 0; k <= budget; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      std::fill(mask.begin(), mask.end(), 1);
      for (int i : idx) mask[static_cast<std::size_t>(i)] = 0;
      visit(mask);
      int pos = k - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == flex - k + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < k; ++i)
        idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
}

}  // namespace

const char* to_string(AttackKind kind) {
  return kind == AttackKind::Integrity ? "integrity" : "availability";
}
const char* to_string(Mode mode) { return mode == Mode::Max ? "max" : "min"; }
const char* to_string(AttackMethod method) {
  switch (method) {
    case AttackMethod::Milp: return "milp";
    case AttackMethod::Pgd: return "pgd";
    case AttackMethod::BruteForce: return "bruteforce";
  }
  return "unknown";
}

AttackKind parse_attack_kind(const std::string& text) {
  if (text == "integrity") return AttackKind::Integrity;
  if (text == "availability") return AttackKind::Availability;
  throw Error(ErrorCode::InvalidArgument, "unknown attack kind '" + text + "'");
}

Mode parse_mode(const std::string& text) {
  if (text == "max") return Mode::Max;
  if (text == "min") return Mode::Min;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + text + "'");
}

AttackMethod parse_attack_method(const std::string& text) {
  if (text == "milp") return AttackMethod::Milp;
  if (text == "pgd") return AttackMethod::Pgd;
  if (text == "bruteforce") return AttackMethod::BruteForce;
  throw Error(ErrorCode::InvalidArgument, "unknown attack method '" + text + "'");
}

AttackSpec AttackSpec::integrity(Mode mode, double eps) {
  AttackSpec s;
  s.kind = AttackKind::Integrity;
  s.mode = mode;
  s.eps = eps;
  return s;
}

AttackSpec AttackSpec::availability(Mode mode, ImputeMode impute, int budget) {
  AttackSpec s;
  s.kind = AttackKind::Availability;
  s.mode = mode;
  s.impute = impute;
  s.budget = budget;
  return s;
}

void AttackSpec::validate() const {
  if (kind == AttackKind::Integrity) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
      throw Error(ErrorCode::InvalidArgument, "epsilon must be finite and >= 0");
  } else if (budget < 0 || budget > static_cast<int>(kNumFlex)) {
    throw Error(ErrorCode::BadBudget, "budget must lie in [0, 6]");
  }
  if (pgd.steps < 0 || pgd.restarts < 1)
    throw Error(ErrorCode::InvalidArgument, "PGD needs steps >= 0 and restarts >= 1");
  if (node_limit < 1) throw Error(ErrorCode::InvalidArgument, "node limit must be >= 1");
}

std::string AttackSpec::label() const {
  char buf[96];
  if (kind == AttackKind::Integrity)
    std::snprintf(buf, sizeof buf, "INTE(%s, %g)", to_string(mode), eps);
  else
    std::snprintf(buf, sizeof buf, "AVAI(%s, %s, %d)", to_string(mode), to_string(impute), budget);
  return buf;
}

Eigen::VectorXd impute(const Eigen::Ref<const Eigen::VectorXd>& x, const Mask& mask,
                       const ImputationVector& c) {
  Eigen::VectorXd z = x;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j] == 0) z[static_cast<Eigen::Index>(j)] = c.c[static_cast<Eigen::Index>(j)];
  return z;
}

AttackResult integrity_milp(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const AttackSpec& spec) {
  spec.validate();
  const auto t0 = Clock::now();
  AttackResult r;
  r.clean_forecast = predict(model, x);

  const Box box = init_bounds_integrity(x, spec.eps);
  const IntervalStack stack = propagate(model, box);
  const AttackEncoding enc = encode_integrity(model, x, spec.eps, stack, spec.mode);
  BbOptions opts;
  opts.node_limit = spec.node_limit;
  const MilpSolution sol = solve_bb(enc.problem, opts);
  if (sol.status == MilpStatus::Infeasible)
    throw Error(ErrorCode::VerificationFailed, "integrity MILP reported infeasible");

  Eigen::VectorXd z(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    z[j] = std::clamp(sol.x_cont[static_cast<std::size_t>(enc.input_vars[static_cast<std::size_t>(j)])],
                      box.lower[j], box.upper[j]);
  r.adversarial_input = z;
  r.adversarial_forecast = predict(model, z);
  if (!close_enough(r.adversarial_forecast, sol.objective, 1e-6))
    throw Error(ErrorCode::VerificationFailed,
                "forward pass disagrees with the MILP objective for the integrity attack");
  r.linf = (z - x).cwiseAbs().maxCoeff();
  r.stats.nodes = sol.nodes_explored;
  r.stats.status = sol.status;
  r.stats.gap = sol.gap;
  r.stats.ms = ms_since(t0);
  finish(r);
  return r;
}

AttackResult integrity_pgd(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const AttackSpec& spec) {
  spec.validate();
  const auto t0 = Clock::now();
  AttackResult r;
  r.clean_forecast = predict(model, x);
  r.adversarial_forecast = r.clean_forecast;
  r.adversarial_input = x;

  const double eps = spec.eps;
  const double step = spec.pgd.step_size < 0.0 ? eps / 10.0 : spec.pgd.step_size;
  const double sigma = spec.mode == Mode::Max ? 1.0 : -1.0;
  const auto flex = static_cast<Eigen::Index>(flex_count(static_cast<std::size_t>(x.size())));
  std::mt19937_64 rng(spec.pgd.seed);
  std::uniform_real_distribution<double> unif(-eps, eps);
  long evals = 1;

  for (int restart = 0; restart < spec.pgd.restarts; ++restart) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(x.size());
    if (restart > 0 && eps > 0.0)
      for (Eigen::Index j = 0; j < flex; ++j) delta[j] = unif(rng);
    Eigen::VectorXd z = x + delta;
    auto consider = [&] {
      const double f = predict(model, z);
      ++evals;
      if (better(spec.mode, f, r.adversarial_forecast)) {
        r.adversarial_forecast = f;
        r.adversarial_input = z;
      }
    };
    consider();
    for (int s = 0; s < spec.pgd.steps; ++s) {
      const Eigen::VectorXd g = grad_input(model, z);
      for (Eigen::Index j = 0; j < flex; ++j) {
        const double sgn = g[j] > 0.0 ? 1.0 : (g[j] < 0.0 ? -1.0 : 0.0);
        delta[j] = std::clamp(delta[j] + step * sgn * sigma, -eps, eps);
      }
      z = x + delta;
      consider();
    }
  }
  r.linf = (r.adversarial_input - x).cwiseAbs().maxCoeff();
  r.stats.nodes = 0;
  r.stats.forward_evals = evals;
  r.stats.ms = ms_since(t0);
  finish(r);
  return r;
}

AttackResult availability_milp(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const AttackSpec& spec, const ImputationVector& c) {
  spec.validate();
  const auto t0 = Clock::now();
  AttackResult r;
  r.clean_forecast = predict(model, x);

  const Box box = init_bounds_availability(x, c, spec.slack);
  const IntervalStack stack = propagate(model, box, spec.slack);
  const AttackEncoding enc = encode_availability(model, x, c, spec.budget, stack, spec.mode);
  BbOptions opts;
  opts.node_limit = spec.node_limit;
  const MilpSolution sol = solve_bb(enc.problem, opts);
  if (sol.status == MilpStatus::Infeasible)
    throw Error(ErrorCode::VerificationFailed, "availability MILP reported infeasible");

  r.mask.resize(enc.mask_bins.size());
  int kept = 0;
  for (std::size_t j = 0; j < enc.mask_bins.size(); ++j) {
    const auto bin = static_cast<std::size_t>(enc.mask_bins[j]) - enc.problem.n_cont;
    r.mask[j] = sol.x_bin[bin] > 0.5 ? 1 : 0;
    kept += r.mask[j];
  }
  r.missing_count = static_cast<int>(r.mask.size()) - kept;
  r.adversarial_input = impute(x, r.mask, c);
  r.adversarial_forecast = predict(model, r.adversarial_input);
  if (!close_enough(r.adversarial_forecast, sol.objective, 1e-6))
    throw Error(ErrorCode::VerificationFailed,
                "forward pass disagrees with the MILP objective for the availability attack");
  r.linf = (r.adversarial_input - x).cwiseAbs().maxCoeff();
  r.stats.nodes = sol.nodes_explored;
  r.stats.status = sol.status;
  r.stats.gap = sol.gap;
  r.stats.ms = ms_since(t0);
  finish(r);
  return r;
}

MaskExtremes enumerate_mask_extremes(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const ImputationVector& c, int budget) {
  const auto flex = static_cast<int>(flex_count(static_cast<std::size_t>(x.size())));
  if (budget < 0 || budget > flex)
    throw Error(ErrorCode::BadBudget, "budget must lie in [0, " + std::to_string(flex) + "]");
  if (c.c.size() != x.size())
    throw Error(ErrorCode::DimensionMismatch, "imputation vector length differs from input");
  MaskExtremes e;
  bool first = true;
  for_each_mask(flex, budget, [&](const Mask& mask) {
    const double f = predict(model, impute(x, mask, c));
    ++e.evaluated;
    if (first || f > e.max_forecast) {
      e.max_forecast = f;
      e.max_mask = mask;
    }
    if (first || f < e.min_forecast) {
      e.min_forecast = f;
      e.min_mask = mask;
    }
    first = false;
  });
  return e;
}

AttackResult availability_bruteforce(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const AttackSpec& spec, const ImputationVector& c) {
  spec.validate();
  const auto t0 = Clock::now();
  const MaskExtremes e = enumerate_mask_extremes(model, x, c, spec.budget);
  AttackResult r;
  r.clean_forecast = predict(model, x);
  r.mask = spec.mode == Mode::Max ? e.max_mask : e.min_mask;
  r.adversarial_forecast = spec.mode == Mode::Max ? e.max_forecast : e.min_forecast;
  r.adversarial_input = impute(x, r.mask, c);
  int kept = 0;
  for (int m : r.mask) kept += m;
  r.missing_count = static_cast<int>(r.mask.size()) - kept;
  r.linf = (r.adversarial_input - x).cwiseAbs().maxCoeff();
  r.stats.forward_evals = e.evaluated;
  r.stats.ms = ms_since(t0);
  finish(r);
  return r;
}

AttackResult run_attack(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const AttackSpec& spec, const ImputationVector& c, AttackMethod method,
                        std::uint64_t sample_seed) {
  if (spec.kind == AttackKind::Integrity) {
    if (method == AttackMethod::Pgd) {
      AttackSpec s = spec;
      s.pgd.seed = spec.pgd.seed ^ (sample_seed * 0x9E3779B97F4A7C15ULL);
      return integrity_pgd(model, x, s);
    }
    if (method == AttackMethod::BruteForce)
      throw Error(ErrorCode::InvalidArgument, "brute force applies to availability attacks only");
    return integrity_milp(model, x, spec);
  }
  switch (method) {
    case AttackMethod::Milp: return availability_milp(model, x, spec, c);
    case AttackMethod::BruteForce: return availability_bruteforce(model, x, spec, c);
    case AttackMethod::Pgd: break;
  }
  throw Error(ErrorCode::InvalidArgument, "PGD applies to integrity attacks only");
}

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

BatchResult batch_attack(const Plnn& model, const Eigen::MatrixXd& X, const AttackSpec& spec,
                         const ImputationVector& c, const BatchOptions& options) {
  spec.validate();
  if (spec.kind == AttackKind::Integrity && options.method == AttackMethod::BruteForce)
    throw Error(ErrorCode::InvalidArgument, "brute force applies to availability attacks only");
  if (spec.kind == AttackKind::Availability && options.method == AttackMethod::Pgd)
    throw Error(ErrorCode::InvalidArgument, "PGD applies to integrity attacks only");
  const auto t0 = Clock::now();
  const auto n = static_cast<std::size_t>(X.rows());
  BatchResult out;
  out.results.resize(n);
  std::vector<std::string> errors(n);
  std::vector<char> mismatch(n, 0);
  std::vector<double> ms(n, 0.0);
  const bool oracle = options.oracle_check && spec.kind == AttackKind::Availability &&
                      options.method != AttackMethod::BruteForce;

  parallel_for(n, options.workers > 0 ? options.workers : default_workers(), [&](std::size_t i) {
    const auto ts = Clock::now();
    const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(i)).transpose();
    try {
      out.results[i] = run_attack(model, x, spec, c, options.method, i);
      if (oracle) {
        const AttackResult ref = availability_bruteforce(model, x, spec, c);
        if (std::abs(ref.adversarial_forecast - out.results[i]->adversarial_forecast) >
            options.oracle_tol)
          mismatch[i] = 1;
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown failure";
    }
    ms[i] = ms_since(ts);
  });

  BatchSummary& s = out.summary;
  s.samples = n;
  s.sample_ms = ms;
  std::vector<double> mpes;
  double total_ms = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_ms += ms[i];
    if (!errors[i].empty()) s.failures.push_back({i, errors[i]});
    else mpes.push_back(out.results[i]->mpe);
    if (mismatch[i]) s.oracle_mismatches.push_back(i);
  }
  if (!mpes.empty()) s.mpe = box_stats(mpes);
  s.mean_ms = n > 0 ? total_ms / static_cast<double>(n) : 0.0;
  s.elapsed_ms = ms_since(t0);
  return out;
}

}  // namespace lfa
