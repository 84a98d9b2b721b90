#pragma once

#include "bregkacz/dgf.hpp"
#include "bregkacz/linesearch.hpp"
#include "bregkacz/problems.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace bregkacz {

enum class Method { Nbk, Rnbk, Nk, Pocs, Pnk };
Method parse_method(const std::string& name);
std::string method_name(Method method);

struct SolverConfig {
  Vector probabilities;          // per-component sampling weights; empty = uniform
  double sigma = 0.0;            // relaxed-step modulus; <= 0 means the DGF's sigma
  LineSearchConfig linesearch;
  std::int64_t max_iterations = 10000;
  double stop_residual = 0.0;    // 0 disables the residual stop
  double zero_tolerance = 1e-14;
  std::uint64_t seed = 0;
};

enum class StepKind { Exact, Relaxed, Skipped };

/// Everything one step did; filled by the *_update functions.
struct StepOutcome {
  int index = -1;
  double f_value = 0.0;
  double t = 0.0;
  double grad_dual_norm_sq = 0.0;
  StepKind kind = StepKind::Skipped;
  bool feasible = true;           // hyperplane met dom(subdiff phi)
  bool used_globalized = false;
  bool relaxed_fallback = false;  // globalized Newton hit |t| > threshold
};

struct SolverState {
  std::int64_t k = 0;
  PrimalDualPair pair;  // x always valid; x_star empty for nk/pocs/pnk
  std::mt19937_64 rng;
  StepKind last_step_kind = StepKind::Skipped;
  StepOutcome last;
  std::int64_t skipped_count = 0;
  std::int64_t relaxed_count = 0;
  std::int64_t infeasible_count = 0;
  std::int64_t globalized_count = 0;
  std::int64_t relaxed_fallback_count = 0;
};

SolverState make_dual_state(const Dgf& dgf, Vector x0_star, const SolverConfig& cfg);
SolverState make_primal_state(Vector x0, const SolverConfig& cfg);

// Deterministic one-component updates; the *_step functions sample the index.
StepOutcome nbk_update(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
                       PrimalDualPair& pair, int i);
StepOutcome rnbk_update(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
                        PrimalDualPair& pair, int i);
StepOutcome nk_update(const NonlinearSystem& sys, const SolverConfig& cfg, Vector& x, int i);
StepOutcome pocs_update(const LinearSystem& sys, const SolverConfig& cfg, Vector& x, int i);
StepOutcome pnk_update(const LsdSystem& sys, const SolverConfig& cfg, Vector& x, int i);

void nbk_step(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
              SolverState& state);
void rnbk_step(const NonlinearSystem& sys, const Dgf& dgf, const SolverConfig& cfg,
               SolverState& state);
void nk_step(const NonlinearSystem& sys, const SolverConfig& cfg, SolverState& state);
void pocs_step(const LinearSystem& sys, const SolverConfig& cfg, SolverState& state);
void pnk_step(const LsdSystem& sys, const SolverConfig& cfg, SolverState& state);

/// True iff every component has |f_i(x)| <= tol or ||grad f_i(x)||_2 <= tol.
bool fixed_point_check(const NonlinearSystem& sys, const Vector& x, double tol);

/// One metric row of a run; optional metrics are NaN when unavailable.
struct RunRecord {
  std::string experiment;
  std::string method;
  int repeat = 0;
  std::int64_t iter = 0;
  double elapsed_s = 0.0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double dist_to_sol = std::numeric_limits<double>::quiet_NaN();
  double bregman_dist = std::numeric_limits<double>::quiet_NaN();
};

struct RecordOptions {
  int every = 1;                 // record every k-th iteration
  bool with_residual = true;
  bool with_dist = true;
  bool with_bregman = true;
  bool timing = true;            // wall-clock around the step call only
  std::string experiment;
  int repeat = 0;
  std::function<void(const SolverState&)> observer;  // called at record points
};

struct RunResult {
  std::vector<RunRecord> records;
  SolverState state;
  std::int64_t iterations = 0;
  double elapsed_s = 0.0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  bool reached_stop = false;
};

/// Drives one solver run from the given initial state. dgf may be null for
/// nk/pocs/pnk. Deterministic given the state's rng seed (timing aside).
RunResult run(const NonlinearSystem& sys, const Dgf* dgf, Method method, const SolverConfig& cfg,
              const RecordOptions& rec, SolverState state);

}  // namespace bregkacz
