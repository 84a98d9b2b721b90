#include "bregkacz/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace bregkacz {

Family parse_family(const std::string& name) {
  if (name == "sparse-quadratic") return Family::SparseQuadratic;
  if (name == "simplex-linear") return Family::SimplexLinear;
  if (name == "lsd") return Family::Lsd;
  throw std::invalid_argument("unknown family: " + name);
}

std::string family_name(Family family) {
  switch (family) {
    case Family::SparseQuadratic: return "sparse-quadratic";
    case Family::SimplexLinear: return "simplex-linear";
    case Family::Lsd: return "lsd";
  }
  return "";
}

std::string ExperimentSpec::default_id() const {
  std::ostringstream os;
  os << family_name(family) << "-" << rows << "x" << cols;
  if (family == Family::SimplexLinear) os << "-" << dist_name(dist);
  if (family == Family::SparseQuadratic) os << "-nnz" << nnz << "-lam" << lambda;
  return os.str();
}

void ExperimentSpec::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("experiment: dims must be positive");
  if (repeats < 1) throw std::invalid_argument("experiment: repeats must be >= 1");
  if (record_every < 1) throw std::invalid_argument("experiment: record_every must be >= 1");
  if (methods.empty()) throw std::invalid_argument("experiment: no methods requested");
  if (family == Family::SparseQuadratic && (nnz < 0 || nnz > cols))
    throw std::invalid_argument("experiment: nnz must lie in [0, cols]");
  for (Method m : methods) {
    const bool ok = (m == Method::Nbk || m == Method::Rnbk) ||
                    (m == Method::Nk && family == Family::SparseQuadratic) ||
                    (m == Method::Pocs && family == Family::SimplexLinear) ||
                    (m == Method::Pnk && family == Family::Lsd);
    if (!ok)
      throw std::invalid_argument("experiment: method " + method_name(m) +
                                  " is not applicable to family " + family_name(family));
  }
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quantiles: empty input");
  std::sort(values.begin(), values.end());
  const auto interp = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = h - static_cast<double>(lo);
    return (1.0 - w) * values[lo] + w * values[hi];
  };
  return {values.front(), interp(0.25), interp(0.5), interp(0.75), values.back()};
}

namespace {

double pick_metric(const RunRecord& r, Metric metric) {
  switch (metric) {
    case Metric::Residual: return r.residual;
    case Metric::DistToSol: return r.dist_to_sol;
    case Metric::BregmanDist: return r.bregman_dist;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::vector<QuantileRow> aggregate_by_iteration(const std::vector<RunRecord>& records,
                                                Metric metric) {
  std::map<std::pair<std::string, std::int64_t>, std::vector<double>> groups;
  for (const RunRecord& r : records) {
    const double v = pick_metric(r, metric);
    if (std::isnan(v)) continue;
    groups[{r.method, r.iter}].push_back(v);
  }
  std::vector<QuantileRow> out;
  out.reserve(groups.size());
  for (auto& [key, vals] : groups) {
    QuantileRow row;
    row.method = key.first;
    row.key = key.second;
    row.count = static_cast<int>(vals.size());
    row.q = quantiles(std::move(vals));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<QuantileRow> aggregate_by_time(const std::vector<RunRecord>& records, int buckets,
                                           Metric metric) {
  if (buckets < 1) throw std::invalid_argument("aggregate_by_time: buckets must be positive");
  std::map<std::string, double> span;
  for (const RunRecord& r : records)
    span[r.method] = std::max(span[r.method], r.elapsed_s);
  std::map<std::pair<std::string, std::int64_t>, std::vector<double>> groups;
  for (const RunRecord& r : records) {
    const double v = pick_metric(r, metric);
    if (std::isnan(v)) continue;
    const double width = span[r.method] / buckets;
    std::int64_t b = width > 0.0 ? static_cast<std::int64_t>(r.elapsed_s / width) : 0;
    b = std::min<std::int64_t>(b, buckets - 1);  // upper edge inclusive
    groups[{r.method, b}].push_back(v);
  }
  std::vector<QuantileRow> out;
  out.reserve(groups.size());
  for (auto& [key, vals] : groups) {
    QuantileRow row;
    row.method = key.first;
    row.key = key.second;
    row.count = static_cast<int>(vals.size());
    row.q = quantiles(std::move(vals));
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

struct RepeatSetup {
  std::unique_ptr<NonlinearSystem> system;
  std::optional<Dgf> dgf;
  Vector x0;
  Vector x0_star;  // empty for primal-only starts
};

// Stream split per repeat: problem generation, initial state, index sampling.
RepeatSetup build_repeat(const ExperimentSpec& spec, int rep) {
  const std::uint64_t problem_seed = derive_seed(spec.seed, 3 * static_cast<std::uint64_t>(rep));
  const std::uint64_t init_seed = derive_seed(spec.seed, 3 * static_cast<std::uint64_t>(rep) + 1);
  RepeatSetup setup;
  switch (spec.family) {
    case Family::SparseQuadratic: {
      setup.system = std::make_unique<QuadraticSystem>(
          gen_sparse_quadratic(spec.rows, spec.cols, spec.nnz, problem_seed));
      setup.dgf = Dgf::l1_half_square(spec.cols, spec.lambda);
      auto rng = make_rng(init_seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector x0_star(spec.cols);
      for (int i = 0; i < spec.cols; ++i) x0_star[i] = normal(rng);
      setup.x0_star = x0_star;
      setup.x0 = setup.dgf->conjugate_gradient(x0_star);
      break;
    }
    case Family::SimplexLinear: {
      setup.system = std::make_unique<LinearSystem>(
          gen_simplex_linear(spec.rows, spec.cols, spec.dist, problem_seed));
      setup.dgf = Dgf::simplex_entropy(spec.cols);
      setup.x0 = Vector::Constant(spec.cols, 1.0 / spec.cols);
      setup.x0_star = setup.x0.array().log().matrix();
      break;
    }
    case Family::Lsd: {
      setup.system = std::make_unique<LsdSystem>(gen_lsd(spec.rows, spec.cols, problem_seed));
      std::vector<Dgf> blocks(spec.cols, Dgf::simplex_entropy(spec.rows));
      setup.dgf = Dgf::product(std::move(blocks));
      // random interior columns; the uniform matrix is a fixed point of every
      // method here (all gradients are constant within each block)
      auto rng = make_rng(init_seed);
      setup.x0.resize(static_cast<Eigen::Index>(spec.rows) * spec.cols);
      for (int j = 0; j < spec.cols; ++j)
        setup.x0.segment(static_cast<Eigen::Index>(j) * spec.rows, spec.rows) =
            sample_simplex_uniform(spec.rows, rng);
      setup.x0_star = setup.x0.array().log().matrix();
      break;
    }
  }
  return setup;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::string id = spec.experiment_id.empty() ? spec.default_id() : spec.experiment_id;

  ExperimentResult result;
  for (int rep = 0; rep < spec.repeats; ++rep) {
    const RepeatSetup setup = build_repeat(spec, rep);
    const std::uint64_t solver_seed =
        derive_seed(spec.seed, 3 * static_cast<std::uint64_t>(rep) + 2);
    for (Method method : spec.methods) {
      SolverConfig cfg;
      cfg.seed = solver_seed;
      cfg.linesearch.eps = spec.eps;
      cfg.max_iterations = spec.max_iterations;
      cfg.stop_residual = spec.stop_residual;
      // the left-stochastic runs rely on the |t| threshold, not the iteration
      // cap, to cut off divergent dual line searches
      if (spec.family == Family::Lsd) cfg.linesearch.max_iters = 1000;

      SolverState state;
      const bool dual = method == Method::Nbk || method == Method::Rnbk;
      if (dual) {
        state = make_dual_state(*setup.dgf, setup.x0_star, cfg);
      } else {
        state = make_primal_state(setup.x0, cfg);
      }

      RecordOptions rec;
      rec.every = spec.record_every;
      rec.timing = spec.timing;
      rec.experiment = id;
      rec.repeat = rep;

      RunResult rr = run(*setup.system, setup.dgf ? &*setup.dgf : nullptr, method, cfg, rec,
                         std::move(state));
      result.records.insert(result.records.end(),
                            std::make_move_iterator(rr.records.begin()),
                            std::make_move_iterator(rr.records.end()));
    }
  }

  // canonical order: method in requested order, then repeat, then iteration
  std::map<std::string, int> method_rank;
  for (std::size_t i = 0; i < spec.methods.size(); ++i)
    method_rank[method_name(spec.methods[i])] = static_cast<int>(i);
  std::stable_sort(result.records.begin(), result.records.end(),
                   [&](const RunRecord& a, const RunRecord& b) {
                     const int ra = method_rank[a.method], rb = method_rank[b.method];
                     if (ra != rb) return ra < rb;
                     if (a.repeat != b.repeat) return a.repeat < b.repeat;
                     return a.iter < b.iter;
                   });

  result.summary = aggregate_by_iteration(result.records, Metric::Residual);
  return result;
}

namespace {

void append_field(std::string& line, double v) {
  line.push_back(',');
  if (std::isnan(v)) return;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << "experiment,method,repeat,iter,elapsed_s,residual,dist_to_sol,bregman_dist\n";
  for (const RunRecord& r : records) {
    std::string line = r.experiment + "," + r.method + "," + std::to_string(r.repeat) + "," +
                       std::to_string(r.iter);
    append_field(line, r.elapsed_s);
    append_field(line, r.residual);
    append_field(line, r.dist_to_sol);
    append_field(line, r.bregman_dist);
    out << line << "\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failed");
}

std::vector<RunRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty file");
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      fields.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (fields.size() != 8) throw std::runtime_error("parse_csv: malformed row");
    RunRecord r;
    r.experiment = fields[0];
    r.method = fields[1];
    r.repeat = std::stoi(fields[2]);
    r.iter = std::stoll(fields[3]);
    const auto num = [](const std::string& s) {
      return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
    };
    r.elapsed_s = num(fields[4]);
    r.residual = num(fields[5]);
    r.dist_to_sol = num(fields[6]);
    r.bregman_dist = num(fields[7]);
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

ExperimentSpec make_spec(Family family, int rows, int cols, std::vector<Method> methods,
                         int repeats) {
  ExperimentSpec s;
  s.family = family;
  s.rows = rows;
  s.cols = cols;
  s.methods = std::move(methods);
  s.repeats = repeats;
  return s;
}

}  // namespace

ExperimentSpec preset(const std::string& name, bool full_scale) {
  using enum Family;
  const std::vector<Method> sq{Method::Nbk, Method::Rnbk, Method::Nk};
  const std::vector<Method> sl{Method::Nbk, Method::Rnbk, Method::Pocs};
  const std::vector<Method> lsd{Method::Nbk, Method::Rnbk, Method::Pnk};
  ExperimentSpec s;
  if (name == "fig1") {
    s = full_scale ? make_spec(SparseQuadratic, 1000, 500, sq, 20)
                   : make_spec(SparseQuadratic, 100, 50, sq, 10);
    s.nnz = full_scale ? 50 : 5;
    s.lambda = 10.0;
    s.max_iterations = full_scale ? 200000 : 20000;
  } else if (name == "fig2") {
    s = full_scale ? make_spec(SparseQuadratic, 50, 100, sq, 50)
                   : make_spec(SparseQuadratic, 20, 50, sq, 10);
    s.nnz = 5;
    s.lambda = 2.0;
    s.max_iterations = full_scale ? 200000 : 20000;
  } else if (name == "fig3") {
    s = full_scale ? make_spec(SimplexLinear, 500, 200, sl, 50)
                   : make_spec(SimplexLinear, 50, 20, sl, 10);
    s.dist = Dist::StdNormal;
    s.max_iterations = full_scale ? 200000 : 50000;
  } else if (name == "fig4") {
    s = full_scale ? make_spec(SimplexLinear, 200, 500, sl, 50)
                   : make_spec(SimplexLinear, 20, 50, sl, 10);
    s.dist = Dist::Unif09;
    s.max_iterations = full_scale ? 200000 : 50000;
  } else if (name == "fig5") {
    s = full_scale ? make_spec(SimplexLinear, 200, 500, sl, 50)
                   : make_spec(SimplexLinear, 20, 50, sl, 10);
    s.dist = Dist::Unif01;
    s.eps = 1e-5;  // the low-accuracy step-size setting
    s.max_iterations = full_scale ? 200000 : 50000;
  } else if (name == "fig6") {
    s = full_scale ? make_spec(Lsd, 100, 50, lsd, 50) : make_spec(Lsd, 10, 5, lsd, 10);
    s.max_iterations = full_scale ? 200000 : 5000;
  } else if (name == "fig7") {
    s = full_scale ? make_spec(Lsd, 50, 100, lsd, 50) : make_spec(Lsd, 5, 10, lsd, 10);
    s.max_iterations = full_scale ? 200000 : 10000;
  } else if (name == "fig8") {
    s = full_scale ? make_spec(Lsd, 3, 100, lsd, 50) : make_spec(Lsd, 3, 20, lsd, 10);
    s.max_iterations = full_scale ? 200000 : 20000;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  s.stop_residual = 1e-10;
  s.record_every = full_scale ? 100 : 10;
  s.experiment_id = name;
  return s;
}

std::vector<std::string> preset_names() {
  return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"};
}

}  // namespace bregkacz
