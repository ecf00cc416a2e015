#include "daverpg/experiment.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "daverpg/csv.hpp"
#include "daverpg/libsvm.hpp"
#include "daverpg/synth.hpp"

namespace daverpg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& v, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
  }
  return x;
}

std::int64_t to_int(const std::string& v, const std::string& key) {
  const double x = to_double(v, key);
  const auto i = static_cast<std::int64_t>(x);
  if (static_cast<double>(i) != x) {
    throw std::invalid_argument("config key '" + key + "': expected integer, got '" + v +
                                "'");
  }
  return i;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(to_double(trim(part), key));
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

VecD parse_init_vector(const std::string& text, Index dim) {
  if (text.empty()) return VecD::Zero(dim);
  const std::vector<double> vals = parse_double_list(text, "init");
  if (vals.size() == 1) return VecD::Constant(dim, vals[0]);
  if (static_cast<Index>(vals.size()) != dim) {
    throw std::invalid_argument("config key 'init': expected 1 or " + std::to_string(dim) +
                                " values, got " + std::to_string(vals.size()));
  }
  VecD v(dim);
  for (Index j = 0; j < dim; ++j) v[j] = vals[static_cast<std::size_t>(j)];
  return v;
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;  // FNV-1a
  }
}

void hash_vec(std::uint64_t& h, const VecD& v) {
  hash_bytes(h, v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

}  // namespace

std::uint64_t hash_problem(const ProblemD& problem) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& term : problem.terms) {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, QuadraticTerm<double>>) {
            const char tag = 'q';
            hash_bytes(h, &tag, 1);
            hash_bytes(h, f.hessian.data(),
                       static_cast<std::size_t>(f.hessian.size()) * sizeof(double));
            hash_vec(h, f.center);
          } else {
            const char tag = 'l';
            hash_bytes(h, &tag, 1);
            for (int k = 0; k < f.features.outerSize(); ++k) {
              for (typename SparseRowMatrix<double>::InnerIterator it(f.features, k); it;
                   ++it) {
                const std::int64_t idx[2] = {it.row(), it.col()};
                hash_bytes(h, idx, sizeof(idx));
                const double v = it.value();
                hash_bytes(h, &v, sizeof(v));
              }
            }
            hash_vec(h, f.labels);
            hash_bytes(h, &f.ridge, sizeof(f.ridge));
          }
        },
        term.payload);
  }
  const int kind = problem.reg.kind == Regularizer<double>::Kind::l1 ? 1 : 0;
  hash_bytes(h, &kind, sizeof(kind));
  hash_bytes(h, &problem.reg.lambda1, sizeof(double));
  return h;
}

DelayModel parse_delay_model(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  const std::vector<double> vals =
      args.empty() ? std::vector<double>{} : parse_double_list(args, "delay-model");
  auto want = [&](std::size_t lo, std::size_t hi) {
    if (vals.size() < lo || vals.size() > hi) {
      throw std::invalid_argument("delay-model '" + text + "': wrong parameter count");
    }
  };
  if (kind == "constant") {
    want(1, 1);
    return DelayModel::constant(vals[0]);
  }
  if (kind == "uniform") {
    want(2, 2);
    return DelayModel::uniform(vals[0], vals[1]);
  }
  if (kind == "exponential") {
    want(1, 1);
    return DelayModel::exponential(vals[0]);
  }
  if (kind == "slow-worker") {
    want(2, 3);
    return DelayModel::slow_worker(static_cast<int>(vals[0]), vals[1],
                                   vals.size() == 3 ? vals[2] : 1.0);
  }
  throw std::invalid_argument("unknown delay model kind '" + kind + "'");
}

RepetitionPolicy parse_repetition_policy(const std::string& text, int workers) {
  if (text.rfind("budget:", 0) == 0) {
    return RepetitionPolicy::budgeted(to_double(text.substr(7), "reps"));
  }
  if (text.find(',') != std::string::npos) {
    const std::vector<double> vals = parse_double_list(text, "reps");
    if (static_cast<int>(vals.size()) != workers) {
      throw std::invalid_argument("reps: per-worker list must have one entry per worker");
    }
    std::vector<int> ps;
    for (double v : vals) ps.push_back(static_cast<int>(to_int(format_double(v), "reps")));
    return RepetitionPolicy::per_worker(std::move(ps));
  }
  return RepetitionPolicy::fixed(static_cast<int>(to_int(text, "reps")));
}

void set_config_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "mode") c.mode = value;
  else if (key == "algo") c.algo = value;
  else if (key == "problem") c.problem = value;
  else if (key == "data") c.data = value;
  else if (key == "workers") c.workers = static_cast<int>(to_int(value, key));
  else if (key == "reps") c.reps = value;
  else if (key == "delay-model") c.delay_model = value;
  else if (key == "lambda1") c.lambda1 = to_double(value, key);
  else if (key == "lambda2") c.lambda2 = to_double(value, key);
  else if (key == "feature-cap") c.feature_cap = to_int(value, key);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(value, key));
  else if (key == "budget-iters") c.budget_iters = to_int(value, key);
  else if (key == "budget-time") c.budget_time = to_double(value, key);
  else if (key == "dim") c.dim = to_int(value, key);
  else if (key == "examples") c.examples = to_int(value, key);
  else if (key == "spread") c.spread = to_double(value, key);
  else if (key == "condition") c.condition = to_double(value, key);
  else if (key == "density") c.density = to_double(value, key);
  else if (key == "noise") c.noise = to_double(value, key);
  else if (key == "init") c.init = value;
  else if (key == "piag-delay") c.piag_delay = value;
  else if (key == "stop-residual") c.stop_residual = to_double(value, key);
  else if (key == "slowdown") c.slowdown = value;
  else if (key == "ref-tol") c.ref_tol = to_double(value, key);
  else if (key == "ref-cap") c.ref_cap = to_int(value, key);
  else if (key == "out") c.out = value;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    line_no += 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    try {
      set_config_key(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

std::string config_to_text(const ExperimentConfig& c) {
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  kv("mode", c.mode);
  kv("algo", c.algo);
  kv("problem", c.problem);
  kv("data", c.data);
  kv("workers", std::to_string(c.workers));
  kv("reps", c.reps);
  kv("delay-model", c.delay_model);
  kv("lambda1", format_double(c.lambda1));
  kv("lambda2", format_double(c.lambda2));
  kv("feature-cap", std::to_string(c.feature_cap));
  kv("seed", std::to_string(c.seed));
  kv("budget-iters", std::to_string(c.budget_iters));
  kv("budget-time", format_double(c.budget_time));
  kv("dim", std::to_string(c.dim));
  kv("examples", std::to_string(c.examples));
  kv("spread", format_double(c.spread));
  kv("condition", format_double(c.condition));
  kv("density", format_double(c.density));
  kv("noise", format_double(c.noise));
  kv("init", c.init);
  kv("piag-delay", c.piag_delay);
  kv("stop-residual", format_double(c.stop_residual));
  kv("slowdown", c.slowdown);
  kv("ref-tol", format_double(c.ref_tol));
  kv("ref-cap", std::to_string(c.ref_cap));
  kv("out", c.out);
  return out;
}

namespace {

ProblemD build_problem(const ExperimentConfig& c) {
  if (c.problem == "quadratic-sum") {
    QuadraticSumParams p;
    p.workers = c.workers;
    p.dim = c.dim;
    p.center_spread = c.spread;
    p.condition = c.condition;
    p.lambda1 = c.lambda1;
    return synth_quadratic_sum(p, c.seed);
  }
  if (c.problem == "logistic-synthetic") {
    LogisticSynthParams p;
    p.workers = c.workers;
    p.dim = c.dim;
    p.examples = c.examples;
    p.density = c.density;
    p.noise = c.noise;
    p.lambda1 = c.lambda1;
    p.lambda2 = c.lambda2;
    return synth_logistic(p, c.seed);
  }
  if (c.problem == "libsvm") {
    if (c.data.empty()) throw std::invalid_argument("libsvm problem: 'data' not set");
    LibSVMDataset data = parse_libsvm_file(c.data, c.feature_cap);
    return problem_from_dataset(data, c.workers, c.lambda1, c.lambda2);
  }
  throw std::invalid_argument("unknown problem kind '" + c.problem + "'");
}

}  // namespace

ExperimentOutputs run_experiment(const ExperimentConfig& config) {
  // Validate everything up front: no file is written until the run and its
  // analysis have completed.
  if (config.mode != "simulate" && config.mode != "run") {
    throw std::invalid_argument("mode must be 'simulate' or 'run', got '" + config.mode +
                                "'");
  }
  const Algo algo = algo_from_name(config.algo);
  if (config.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (config.lambda1 < 0 || config.lambda2 < 0) {
    throw std::invalid_argument("lambda1/lambda2 must be >= 0");
  }
  const DelayModel model = parse_delay_model(config.delay_model);
  const RepetitionPolicy reps = parse_repetition_policy(config.reps, config.workers);
  if (config.problem == "libsvm" && !std::filesystem::exists(config.data)) {
    throw std::runtime_error("dataset file does not exist: " + config.data);
  }

  const ProblemD problem = build_problem(config);
  const StepConfigD steps = default_step_config(problem);
  const VecD x0 = parse_init_vector(config.init, problem.dim());

  const ReferenceSolution<double> ref =
      reference_solution(problem, steps, config.ref_tol, config.ref_cap);

  const SimBudget budget{config.budget_iters, config.budget_time};

  Trace trace;
  VecD output;
  long observed_piag_delay = -1;
  if (config.mode == "simulate") {
    budget.validate();
    SimOptions options;
    options.algo = algo;
    options.steps = steps;
    options.reps = reps;
    options.model = model;
    options.seed = config.seed;
    options.budget = budget;
    options.x_bar_init = x0;
    if (algo == Algo::piag) {
      long d = 0;
      if (config.piag_delay == "auto") {
        // The commit order only depends on the delay model and seed, so the
        // delay bound can be read off a dry schedule pass.
        const auto order = simulate_schedule(model, config.workers, config.seed,
                                             RepetitionPolicy::fixed(1), budget);
        d = delays_from_update_order(order, config.workers).max_delay();
      } else {
        d = static_cast<long>(to_int(config.piag_delay, "piag-delay"));
      }
      observed_piag_delay = d;
      double mu_mean = 0, L_mean = 0;
      for (const auto& t : problem.terms) {
        mu_mean += t.mu;
        L_mean += t.L;
      }
      mu_mean /= problem.workers();
      L_mean /= problem.workers();
      options.piag_gamma = piag_stepsize(mu_mean, L_mean, d);
    }
    SimResult sim = simulate(problem, options);
    trace = std::move(sim.trace);
    output = std::move(sim.output);
  } else {
    if (algo != Algo::dave_rpg) {
      throw std::invalid_argument("run mode executes the asynchronous protocol only "
                                  "(algo = daverpg)");
    }
    ClusterConfig cluster;
    cluster.workers = config.workers;
    cluster.steps = steps;
    cluster.reps = reps;
    cluster.stop.max_iterations = config.budget_iters;
    cluster.stop.residual_threshold = config.stop_residual;
    cluster.stop.wall_clock_seconds = config.budget_time;
    cluster.x_bar_init = x0;
    if (!config.slowdown.empty()) {
      cluster.slowdown = parse_double_list(config.slowdown, "slowdown");
    }
    RunResult run = run_cluster(problem, cluster);
    if (run.failed) throw std::runtime_error("cluster run failed: " + run.error);
    trace = std::move(run.trace);
    output = std::move(run.output);
  }

  std::optional<std::vector<int>> reps_per_worker;
  if (reps.kind == RepetitionPolicy::Kind::fixed) {
    reps_per_worker = std::vector<int>(static_cast<std::size_t>(config.workers), reps.p);
  } else if (reps.kind == RepetitionPolicy::Kind::per_worker) {
    reps_per_worker = reps.per_worker_p;
  }
  const ConvergenceReport report = make_report(problem, steps, trace, ref, reps_per_worker);

  const EpochBoundReport bounds = verify_epoch_bounds(report.delays, report.epochs);

  std::filesystem::create_directories(config.out);
  ExperimentOutputs outputs;
  outputs.trace_csv_path = (std::filesystem::path(config.out) / "trace.csv").string();
  outputs.report_csv_path = (std::filesystem::path(config.out) / "report.csv").string();
  outputs.manifest_path = (std::filesystem::path(config.out) / "manifest.txt").string();

  write_text_file(outputs.trace_csv_path, export_trace_csv(trace, report));
  write_text_file(outputs.report_csv_path, export_report_csv(trace, report));

  std::string manifest = "# resolved run configuration; loadable as a config file\n";
  manifest += config_to_text(config);
  manifest += "# --- observed ---\n";
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash_problem(problem)));
  manifest += "# problem-hash = " + std::string(hex) + "\n";
  manifest += "# iterations = " + std::to_string(trace.records.size()) + "\n";
  manifest += "# partial = false\n";
  manifest += "# observed-max-delay = " + std::to_string(bounds.observed_max_delay) + "\n";
  manifest += "# observed-max-average-delay = " +
              format_double(bounds.observed_max_average_delay) + "\n";
  if (observed_piag_delay >= 0) {
    manifest += "# piag-delay-used = " + std::to_string(observed_piag_delay) + "\n";
  }
  manifest += "# reference-iterations = " + std::to_string(ref.iterations) + "\n";
  manifest += "# reference-residual = " + format_double(ref.residual) + "\n";
  manifest += "# final-distance-sq = " + format_double(report.distance_sq.back()) + "\n";
  manifest += "# final-suboptimality = " + format_double(report.suboptimality.back()) + "\n";
  manifest += "# nonzeros-at-solution = " +
              std::to_string((ref.x_star.array() != 0.0).count()) + "\n";
  manifest += "# epoch-boundaries =";
  for (const auto b : report.epochs.boundaries) manifest += " " + std::to_string(b);
  manifest += "\n";
  write_text_file(outputs.manifest_path, manifest);

  outputs.trace = std::move(trace);
  outputs.report = report;
  outputs.output = std::move(output);
  return outputs;
}

}  // namespace daverpg
