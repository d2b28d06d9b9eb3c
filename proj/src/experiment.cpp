#include "cubmom/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "cubmom/checks.hpp"
#include "cubmom/dataio.hpp"
#include "cubmom/estimators.hpp"
#include "cubmom/svg.hpp"

namespace cubmom::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

bool to_bool(const std::string& v) {
  return v == "1" || v == "true" || v == "yes" || v == "on";
}

int thread_cap() {
  const char* env = std::getenv("CUBIC_MOMENTUM_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v <= 1 ? 1 : v;
}

engine::Method method_from_name(const std::string& name) {
  if (name == "scnm") return engine::Method::kSCNM;
  if (name == "scn_plain" || name == "scn") return engine::Method::kSCNPlain;
  if (name == "sgd") return engine::Method::kSGD;
  throw std::invalid_argument("unknown method: " + name);
}

estimators::ScheduleSource schedule_from_name(const std::string& name) {
  if (name == "manual") return estimators::ScheduleSource::kManual;
  if (name == "main_it") return estimators::ScheduleSource::kMainIT;
  if (name == "appendix_hb") return estimators::ScheduleSource::kAppendixHB;
  if (name == "appendix_mvr") return estimators::ScheduleSource::kAppendixMVR;
  if (name == "appendix_som") return estimators::ScheduleSource::kAppendixSOM;
  throw std::invalid_argument("unknown schedule source: " + name);
}

void apply_run_key(engine::RunConfig* config, const std::string& key,
                   const std::string& value) {
  if (key == "T") config->T = std::stol(value);
  else if (key == "M") config->M = std::stod(value);
  else if (key == "alpha") config->alpha = std::stod(value);
  else if (key == "beta") config->beta = std::stod(value);
  else if (key == "schedule") config->schedule_source = schedule_from_name(value);
  else if (key == "batch_g") config->batch_g = std::stoi(value);
  else if (key == "batch_h") config->batch_h = std::stoi(value);
  else if (key == "initial_batch") config->initial_batch = std::stoi(value);
  else if (key == "split_sampling") config->split_sampling = to_bool(value);
  else if (key == "exact_oracle") config->exact_oracle = to_bool(value);
  else if (key == "sgd_step") config->sgd_step = std::stod(value);
  else if (key == "record_every") config->record_full_metrics_every = std::stol(value);
  else if (key == "output_from_t1") config->output_from_t1 = to_bool(value);
  else throw std::invalid_argument("unknown run key: " + key);
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  for (double v : values)
    if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string trace_to_csv(const engine::RunTrace& trace) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : trace.records) {
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.oracle_draws);
    for (double v : {r.f, r.grad_norm, r.lambda_min, r.mu, r.r, r.eps_norm,
                     r.sigma_norm, r.gamma}) {
      out += ',';
      out += fmt(v);
    }
    out += '\n';
  }
  return out;
}

std::string median_csv(const std::vector<engine::RunTrace>& traces) {
  if (traces.empty()) return std::string(kCsvHeader) + "\n";
  std::size_t rows = traces[0].records.size();
  for (const auto& t : traces) rows = std::min(rows, t.records.size());
  std::string out = kCsvHeader;
  out += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    const auto column = [&](auto getter) {
      std::vector<double> vals;
      vals.reserve(traces.size());
      for (const auto& t : traces) vals.push_back(getter(t.records[i]));
      return median(std::move(vals));
    };
    out += std::to_string(traces[0].records[i].t);
    out += ',';
    out += std::to_string(static_cast<long long>(
        column([](const auto& r) { return double(r.oracle_draws); })));
    for (auto getter : {+[](const engine::IterRecord& r) { return r.f; },
                        +[](const engine::IterRecord& r) { return r.grad_norm; },
                        +[](const engine::IterRecord& r) { return r.lambda_min; },
                        +[](const engine::IterRecord& r) { return r.mu; },
                        +[](const engine::IterRecord& r) { return r.r; },
                        +[](const engine::IterRecord& r) { return r.eps_norm; },
                        +[](const engine::IterRecord& r) { return r.sigma_norm; },
                        +[](const engine::IterRecord& r) { return r.gamma; }}) {
      out += ',';
      out += fmt(column(getter));
    }
    out += '\n';
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (methods.empty()) throw std::invalid_argument("experiment needs >= 1 method");
  if (seeds.empty()) throw std::invalid_argument("experiment needs >= 1 seed");
  if (problem != "synth" && problem != "libsvm")
    throw std::invalid_argument("problem must be synth or libsvm");
  if (objective != "ncvx" && objective != "convex")
    throw std::invalid_argument("objective must be ncvx or convex");
  if (problem == "libsvm" && data_path.empty())
    throw std::invalid_argument("libsvm problem needs data.path");
}

ExperimentSpec parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::vector<std::pair<std::string, std::string>> scoped;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    kv[key] = value;
    if (key.find('.') != std::string::npos) scoped.emplace_back(key, value);
  }

  ExperimentSpec spec;
  engine::RunConfig base;
  base.T = 2000;
  base.M = 0.0;  // 0: derive from estimated constants
  base.alpha = 0.1;
  base.beta = 0.01;
  std::vector<std::string> method_names = {"scnm", "scn_plain", "sgd"};

  for (const auto& [key, value] : kv) {
    if (key == "problem") spec.problem = value;
    else if (key == "objective") spec.objective = value;
    else if (key == "data.path") spec.data_path = value;
    else if (key == "data.subsample") spec.data_subsample = std::stoi(value);
    else if (key == "data.dim") spec.data_dim = std::stoi(value);
    else if (key == "data.seed") spec.data_seed = std::stoull(value);
    else if (key == "synth.n") spec.synth_n = std::stoi(value);
    else if (key == "synth.d") spec.synth_d = std::stoi(value);
    else if (key == "synth.seed") spec.synth_seed = std::stoull(value);
    else if (key == "synth.noise") spec.synth_noise = std::stod(value);
    else if (key == "lambda") spec.lambda = std::stod(value);
    else if (key == "ridge") spec.ridge = std::stod(value);
    else if (key == "methods") method_names = split(value, ',');
    else if (key == "seeds") {
      spec.seeds.clear();
      for (const auto& s : split(value, ',')) spec.seeds.push_back(std::stoull(s));
    } else if (key == "out") spec.out_dir = value;
    else if (key == "svg") spec.svg = to_bool(value);
    else if (key == "probes") spec.constant_probes = std::stoi(value);
    else if (key.find('.') != std::string::npos) continue;  // scoped, below
    else apply_run_key(&base, key, value);
  }
  if (spec.seeds.empty())
    for (std::uint64_t s = 1; s <= 10; ++s) spec.seeds.push_back(s);

  for (const auto& name : method_names) {
    MethodEntry entry;
    entry.name = name;
    entry.method = method_from_name(name);
    entry.config = base;
    entry.config.method = entry.method;
    for (const auto& [key, value] : scoped) {
      const auto dot = key.find('.');
      if (key.substr(0, dot) != name) continue;
      apply_run_key(&entry.config, key.substr(dot + 1), value);
    }
    spec.methods.push_back(entry);
  }
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

problems::Problem build_problem(const ExperimentSpec& spec) {
  dataio::Dataset ds;
  if (spec.problem == "synth") {
    ds = dataio::synth_logistic(spec.synth_n, spec.synth_d, spec.synth_seed,
                                spec.synth_noise);
  } else {
    ds = dataio::parse_libsvm_file(spec.data_path, spec.data_dim);
    if (spec.data_subsample > 0 && spec.data_subsample < ds.n)
      ds = dataio::subsample(ds, spec.data_subsample, spec.data_seed);
  }
  if (spec.objective == "convex")
    return problems::Problem::logistic(ds, problems::Kind::kLogisticConvex, 0.0,
                                       spec.ridge);
  return problems::Problem::logistic(ds, problems::Kind::kLogisticNcvx,
                                     spec.lambda, spec.ridge);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto problem = build_problem(spec);
  const auto constants = problems::estimate_constants(
      problem, numkit::Vec::Zero(problem.dim()), spec.constant_probes, 977);

  fs::create_directories(spec.out_dir);

  struct Job {
    MethodEntry entry;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& entry : spec.methods)
    for (const auto seed : spec.seeds) jobs.push_back({entry, seed});

  std::vector<engine::RunTrace> traces(jobs.size());
  std::vector<RunOutcome> outcomes(jobs.size());

  const auto run_job = [&](std::size_t j) {
    Job job = jobs[j];
    job.entry.config.seed = job.seed;
    if (job.entry.config.M <= 0.0)
      job.entry.config.M = std::max(1.0, constants.L);
    engine::RunTrace trace =
        job.entry.method == engine::Method::kSGD
            ? engine::run_sgd(problem, job.entry.config)
            : engine::run_scnm(problem, job.entry.config, constants);
    RunOutcome outcome;
    outcome.method = job.entry.name;
    outcome.seed = job.seed;
    outcome.aborted = trace.aborted;
    outcome.abort_reason = trace.abort_reason;
    const fs::path path = fs::path(spec.out_dir) /
                          (job.entry.name + "_seed" + std::to_string(job.seed) + ".csv");
    std::ofstream out(path, std::ios::binary);
    out << trace_to_csv(trace);
    outcome.csv_path = path.string();
    traces[j] = std::move(trace);
    outcomes[j] = std::move(outcome);
  };

  const int workers = std::min<int>(thread_cap(), static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < jobs.size();
             j = next.fetch_add(1))
          run_job(j);
      });
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.runs = outcomes;
  for (const auto& outcome : outcomes)
    result.ok = result.ok && !outcome.aborted;

  // per-method aggregates and chart series
  std::vector<Series> loss_series, grad_series;
  double f_best = std::numeric_limits<double>::infinity();
  for (const auto& trace : traces)
    for (const auto& rec : trace.records)
      if (std::isfinite(rec.f)) f_best = std::min(f_best, rec.f);

  for (const auto& entry : spec.methods) {
    std::vector<engine::RunTrace> group;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].entry.name == entry.name) group.push_back(traces[j]);
    const fs::path agg_path =
        fs::path(spec.out_dir) / (entry.name + "_median.csv");
    const std::string agg = median_csv(group);
    std::ofstream out(agg_path, std::ios::binary);
    out << agg;
    result.artifact_paths.push_back(agg_path.string());

    if (spec.svg && !group.empty()) {
      Series loss{entry.name, {}}, grad{entry.name, {}};
      std::istringstream is(agg);
      std::string line;
      std::getline(is, line);  // header
      while (std::getline(is, line)) {
        const auto cols = split(line, ',');
        const double draws = std::stod(cols[1]);
        const double f = std::stod(cols[2]);
        const double gn = std::stod(cols[3]);
        if (std::isfinite(f)) loss.points.push_back({draws, f - f_best + 1e-16});
        if (std::isfinite(gn)) grad.points.push_back({draws, gn});
      }
      loss_series.push_back(std::move(loss));
      grad_series.push_back(std::move(grad));
    }
  }

  if (spec.svg) {
    const fs::path loss_path = fs::path(spec.out_dir) / "loss.svg";
    std::ofstream(loss_path, std::ios::binary)
        << line_chart_svg("objective gap", "oracle draws", "f - f_best",
                          loss_series, /*log_y=*/true);
    result.artifact_paths.push_back(loss_path.string());
    const fs::path grad_path = fs::path(spec.out_dir) / "grad_norm.svg";
    std::ofstream(grad_path, std::ios::binary)
        << line_chart_svg("gradient norm", "oracle draws", "|grad f|",
                          grad_series, /*log_y=*/true);
    result.artifact_paths.push_back(grad_path.string());
  }

  // metadata; default lambda/noise values are toolkit stand-ins, flagged so
  std::ostringstream meta;
  meta << "{\n  \"problem\": \"" << spec.problem << "\",\n  \"objective\": \""
       << spec.objective << "\",\n  \"lambda\": " << fmt(spec.lambda)
       << ",\n  \"estimated_constants\": {\"L\": " << fmt(constants.L)
       << ", \"L_g\": " << fmt(constants.L_g)
       << ", \"sigma_g\": " << fmt(constants.sigma_g)
       << ", \"sigma_h\": " << fmt(constants.sigma_h) << "},\n"
       << "  \"note\": \"lambda, noise and schedule defaults are toolkit "
          "stand-ins, not externally calibrated values\",\n  \"runs\": [\n";
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    meta << "    {\"method\": \"" << outcomes[j].method
         << "\", \"seed\": " << outcomes[j].seed << ", \"aborted\": "
         << (outcomes[j].aborted ? "true" : "false") << "}"
         << (j + 1 < outcomes.size() ? "," : "") << "\n";
  }
  meta << "  ]\n}\n";
  const fs::path meta_path = fs::path(spec.out_dir) / "metadata.json";
  std::ofstream(meta_path, std::ios::binary) << meta.str();
  result.artifact_paths.push_back(meta_path.string());
  return result;
}

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const auto result = run_experiment(spec);
    for (const auto& run : result.runs) {
      if (run.aborted)
        err << "aborted: " << run.method << " seed " << run.seed << " ("
            << run.abort_reason << ")\n";
      else
        out << "done: " << run.csv_path << "\n";
    }
    return result.ok ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

bool report_suite(const checks::SuiteResult& suite, const std::string& replay_dir,
                  std::ostream& out) {
  bool ok = true;
  for (const auto& prop : suite.properties) {
    out << prop.name << ": " << prop.passed << "/" << prop.total << "\n";
    if (!prop.ok()) {
      ok = false;
      if (!prop.failure_replay.empty()) {
        const fs::path path = fs::path(replay_dir.empty() ? "." : replay_dir) /
                              (suite.suite + "_" + prop.name + "_failure.json");
        std::ofstream(path, std::ios::binary) << prop.failure_replay << "\n";
        out << "replay written: " << path.string() << "\n";
      }
    }
  }
  return ok;
}

int cmd_check(const std::string& suite, int trials, std::uint64_t seed,
              const std::string& replay_dir, std::ostream& out) {
  if (trials < 1) {
    out << "error: trials must be >= 1\n";
    return 1;
  }
  std::vector<checks::SuiteResult> results;
  if (suite == "cubic" || suite == "all")
    results.push_back(checks::run_cubic_suite(trials, seed));
  if (suite == "step" || suite == "all")
    results.push_back(checks::run_step_suite(trials, seed));
  if (suite == "estimators" || suite == "all")
    results.push_back(checks::run_estimator_suite(trials, seed));
  if (results.empty()) {
    out << "error: unknown suite '" << suite
        << "' (expected cubic | step | estimators | all)\n";
    return 1;
  }
  bool ok = true;
  for (const auto& suite_result : results)
    ok = report_suite(suite_result, replay_dir, out) && ok;
  return ok ? 0 : 1;
}

int cmd_schedule(const ScheduleArgs& args, std::ostream& out,
                 std::ostream& err) {
  problems::ProblemConstants constants;
  constants.L = args.L;
  constants.L_g = args.L_g;
  constants.sigma_g = args.sigma_g;
  constants.sigma_h = args.sigma_h;
  constants.sigma_g0 = args.a_g * args.sigma_g;
  constants.sigma_h0 = args.a_h * args.sigma_h;
  try {
    const auto schedule = estimators::make_schedule(
        constants, args.T, args.M, schedule_from_name(args.source));
    out << "alpha = " << fmt(schedule.alpha) << "\n"
        << "beta = " << fmt(schedule.beta) << "\n";
    const double lhs =
        estimators::condition10_lhs(args.L, args.M, schedule.alpha, schedule.beta);
    out << "condition10_lhs = " << fmt(lhs)
        << (lhs <= 0.0 ? " (satisfied)" : " (violated)") << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "schedule error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cubmom::cli
