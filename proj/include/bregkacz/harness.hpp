#pragma once

#include "bregkacz/solvers.hpp"

#include <string>
#include <vector>

namespace bregkacz {

enum class Family { SparseQuadratic, SimplexLinear, Lsd };
Family parse_family(const std::string& name);
std::string family_name(Family family);

/// One experiment: a problem family at a given size, a set of methods to
/// compare, and a number of seeded random repeats.
struct ExperimentSpec {
  Family family = Family::SimplexLinear;
  int rows = 50;   // n (components), or r for LSD
  int cols = 20;   // d (variables), or m for LSD
  int nnz = 5;     // sparse-quadratic only
  double lambda = 10.0;  // sparse-quadratic only
  Dist dist = Dist::StdNormal;  // simplex-linear only
  std::vector<Method> methods;
  int repeats = 10;
  std::uint64_t seed = 0;
  double eps = 1e-9;          // line-search tolerance
  std::int64_t max_iterations = 10000;
  double stop_residual = 0.0;
  int record_every = 1;
  bool timing = true;         // false zeroes elapsed_s, making output byte-reproducible
  std::string experiment_id;  // derived from the family and sizes when empty

  std::string default_id() const;
  void validate() const;
};

struct Quantiles {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

/// Linear-interpolation quantiles of a nonempty sample.
Quantiles quantiles(std::vector<double> values);

enum class Metric { Residual, DistToSol, BregmanDist };

struct QuantileRow {
  std::string method;
  std::int64_t key = 0;  // iteration, or time-bucket index
  Quantiles q;
  int count = 0;
};

/// Per-(method, iteration) quantiles of one metric across repeats.
std::vector<QuantileRow> aggregate_by_iteration(const std::vector<RunRecord>& records,
                                                Metric metric);

/// Per-(method, time-bucket) quantiles; buckets partition [0, max elapsed] per
/// method with the upper edge inclusive, so every run's final record lands in
/// a bucket.
std::vector<QuantileRow> aggregate_by_time(const std::vector<RunRecord>& records, int buckets,
                                           Metric metric);

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<QuantileRow> summary;  // residual quantiles by iteration
};

/// Regenerates the problem per repeat with a derived seed, runs every
/// requested method from the same initial state, and aggregates quantiles.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// CSV with header experiment,method,repeat,iter,elapsed_s,residual,
/// dist_to_sol,bregman_dist; 17 significant digits; missing metrics empty.
void emit_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> parse_csv(const std::string& path);

/// Named experiment presets mirroring the figure setups; desk scale unless
/// full_scale is requested.
ExperimentSpec preset(const std::string& name, bool full_scale);
std::vector<std::string> preset_names();

}  // namespace bregkacz
