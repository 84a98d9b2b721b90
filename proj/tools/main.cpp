#include "bregkacz/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<bregkacz::Method> parse_methods(const std::string& csv) {
  std::vector<bregkacz::Method> methods;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) methods.push_back(bregkacz::parse_method(item));
  }
  return methods;
}

void print_summary(const bregkacz::ExperimentResult& result) {
  // final-iteration residual quantiles per method
  std::map<std::string, bregkacz::QuantileRow> last;
  for (const auto& row : result.summary) {
    auto it = last.find(row.method);
    if (it == last.end() || row.key > it->second.key) last[row.method] = row;
  }
  std::printf("%-8s %10s %14s %14s %14s\n", "method", "iter", "res_q25", "res_median",
              "res_q75");
  for (const auto& [method, row] : last) {
    std::printf("%-8s %10lld %14.6g %14.6g %14.6g\n", method.c_str(),
                static_cast<long long>(row.key), row.q.q25, row.q.median, row.q.q75);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Bregman-Kaczmarz solvers for constrained nonlinear systems"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write per-iteration CSV");

  std::string family = "simplex-linear";
  std::string preset_name;
  int rows = 0, cols = 0;
  int nnz = 5;
  double lambda = 10.0;
  std::string dist = "stdn";
  std::string methods_csv;
  int repeats = 0;
  std::uint64_t seed = 0;
  double eps = 1e-9;
  long long max_iters = 0;
  double stop_residual = -1.0;
  bool full_scale = false;
  bool no_timing = false;
  int record_every = 0;
  std::string out_path;

  run_cmd->add_option("--family", family, "Problem family: sparse-quadratic, simplex-linear, lsd")
      ->capture_default_str();
  run_cmd->add_option("--preset", preset_name,
                      "Named preset fig1..fig8 (overrides family defaults)");
  run_cmd->add_option("--rows", rows, "Component count n (r for lsd); 0 = family default")
      ->capture_default_str();
  run_cmd->add_option("--cols", cols, "Variable dimension d (m for lsd); 0 = family default")
      ->capture_default_str();
  run_cmd->add_option("--nnz", nnz, "Nonzeros of the planted sparse solution")
      ->capture_default_str();
  run_cmd->add_option("--lambda", lambda, "l1 weight of the sparse DGF")->capture_default_str();
  run_cmd->add_option("--dist", dist, "Matrix entry distribution: stdn, u01, u09")
      ->capture_default_str();
  run_cmd->add_option("--methods", methods_csv,
                      "Comma-separated subset of nbk,rnbk,nk,pocs,pnk; empty = family default");
  run_cmd->add_option("--repeats", repeats, "Random repeats; 0 = preset/family default")
      ->capture_default_str();
  run_cmd->add_option("--seed", seed, "Base seed; repeats use derived streams")
      ->capture_default_str();
  run_cmd->add_option("--eps", eps, "Line-search tolerance on |g'(t)|")->capture_default_str();
  run_cmd->add_option("--max-iters", max_iters, "Iteration cap per run; 0 = default")
      ->capture_default_str();
  run_cmd->add_option("--stop-residual", stop_residual,
                      "Stop once ||f(x_k)|| falls below this; negative = default");
  run_cmd->add_flag("--full-scale", full_scale, "Use the full-size preset dimensions");
  run_cmd->add_flag("--no-timing", no_timing,
                    "Zero the elapsed_s column for byte-reproducible output");
  run_cmd->add_option("--record-every", record_every, "Metric recording cadence; 0 = default")
      ->capture_default_str();
  run_cmd->add_option("--out", out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    bregkacz::ExperimentSpec spec;
    if (!preset_name.empty()) {
      spec = bregkacz::preset(preset_name, full_scale);
    } else {
      spec.family = bregkacz::parse_family(family);
      switch (spec.family) {
        case bregkacz::Family::SparseQuadratic:
          spec.rows = 100; spec.cols = 50; spec.nnz = 5;
          spec.methods = {bregkacz::Method::Nbk, bregkacz::Method::Rnbk, bregkacz::Method::Nk};
          spec.max_iterations = 20000;
          break;
        case bregkacz::Family::SimplexLinear:
          spec.rows = 50; spec.cols = 20;
          spec.methods = {bregkacz::Method::Nbk, bregkacz::Method::Rnbk, bregkacz::Method::Pocs};
          spec.max_iterations = 50000;
          break;
        case bregkacz::Family::Lsd:
          spec.rows = 10; spec.cols = 5;
          spec.methods = {bregkacz::Method::Nbk, bregkacz::Method::Rnbk, bregkacz::Method::Pnk};
          spec.max_iterations = 5000;
          break;
      }
      spec.repeats = 10;
      spec.stop_residual = 1e-10;
      spec.record_every = 10;
      spec.lambda = lambda;
    }
    if (rows > 0) spec.rows = rows;
    if (cols > 0) spec.cols = cols;
    if (run_cmd->count("--nnz")) spec.nnz = nnz;
    if (run_cmd->count("--lambda")) spec.lambda = lambda;
    if (run_cmd->count("--dist")) spec.dist = bregkacz::parse_dist(dist);
    if (!methods_csv.empty()) spec.methods = parse_methods(methods_csv);
    if (repeats > 0) spec.repeats = repeats;
    if (run_cmd->count("--seed")) spec.seed = seed;
    if (run_cmd->count("--eps")) spec.eps = eps;
    if (max_iters > 0) spec.max_iterations = max_iters;
    if (stop_residual >= 0.0) spec.stop_residual = stop_residual;
    if (record_every > 0) spec.record_every = record_every;
    spec.timing = !no_timing;
    spec.validate();

    std::printf("experiment %s: %d repeat(s), seed %llu\n", spec.default_id().c_str(),
                spec.repeats, static_cast<unsigned long long>(spec.seed));
    const bregkacz::ExperimentResult result = bregkacz::run_experiment(spec);
    bregkacz::emit_csv(result.records, out_path);
    print_summary(result);
    std::printf("wrote %zu records to %s\n", result.records.size(), out_path.c_str());
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
