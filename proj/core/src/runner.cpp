#include "metabench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "metabench/sobol.hpp"

namespace metabench {

namespace fs = std::filesystem;
using nlohmann::json;

int ExperimentPlan::budget_of(Method m) const {
  if (budget > 0) return budget;
  auto it = budget_by_method.find(method_tag(m));
  if (it != budget_by_method.end() && it->second > 0) return it->second;
  return default_budget(m);
}

void ExperimentPlan::validate() const {
  if (methods.empty()) throw ValidationError("plan: no methods");
  if (runs_per_task < 1) throw ValidationError("plan: runs_per_task must be >= 1");
  std::set<std::string> seen;
  for (Method m : methods)
    if (!seen.insert(method_tag(m)).second)
      throw ValidationError("plan: duplicate method " + method_tag(m));
}

json plan_to_json(const ExperimentPlan& plan) {
  json methods = json::array();
  json budgets = json::object();
  for (Method m : plan.methods) {
    methods.push_back(method_tag(m));
    budgets[method_tag(m)] = plan.budget_of(m);
  }
  return json{{"version", 1},
              {"task_source", plan.task_source},
              {"methods", methods},
              {"runs_per_task", plan.runs_per_task},
              {"budgets", budgets},
              {"fast", plan.fast},
              {"master_seed", plan.master_seed}};
}

namespace {
const json& require(const json& j, const char* field, const char* ctx) {
  auto it = j.find(field);
  if (it == j.end())
    throw SchemaError(std::string(ctx) + ": missing field \"" + field + "\"");
  return *it;
}
}  // namespace

ExperimentPlan plan_from_json(const json& j) {
  ExperimentPlan plan;
  plan.task_source = require(j, "task_source", "plan").get<std::string>();
  for (const auto& t : require(j, "methods", "plan"))
    plan.methods.push_back(method_from_tag(t.get<std::string>()));
  plan.runs_per_task = require(j, "runs_per_task", "plan").get<int>();
  for (auto& [k, v] : require(j, "budgets", "plan").items())
    plan.budget_by_method[k] = v.get<int>();
  plan.fast = require(j, "fast", "plan").get<bool>();
  plan.master_seed = require(j, "master_seed", "plan").get<std::uint64_t>();
  plan.validate();
  return plan;
}

// ---------------------------------------------------------------------------
// Archive I/O

namespace {

std::string record_to_line(const RunRecordLine& rec) {
  json xs = json::array();
  for (const auto& x : rec.xs)
    xs.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  json j{{"method", rec.method}, {"task_id", rec.task_id}, {"run", rec.run},
         {"seed", rec.seed},     {"status", rec.status},   {"wall_ms", rec.wall_ms},
         {"x", xs},              {"y", rec.ys}};
  if (!rec.error.empty()) j["error"] = rec.error;
  return j.dump();
}

RunRecordLine record_from_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("archive: bad record line: ") + e.what());
  }
  RunRecordLine rec;
  rec.method = require(j, "method", "record").get<std::string>();
  rec.task_id = require(j, "task_id", "record").get<std::uint64_t>();
  rec.run = require(j, "run", "record").get<int>();
  rec.seed = require(j, "seed", "record").get<std::uint64_t>();
  rec.status = require(j, "status", "record").get<std::string>();
  rec.wall_ms = require(j, "wall_ms", "record").get<double>();
  if (j.contains("error")) rec.error = j["error"].get<std::string>();
  for (const auto& xj : require(j, "x", "record")) {
    auto vals = xj.get<std::vector<double>>();
    rec.xs.push_back(Eigen::Map<Config>(vals.data(), static_cast<long>(vals.size())));
  }
  rec.ys = require(j, "y", "record").get<std::vector<double>>();
  return rec;
}

std::string method_file(const std::string& archive_dir, const std::string& tag) {
  return archive_dir + "/results/" + tag + ".jsonl";
}

}  // namespace

std::vector<RunRecordLine> load_method_records(const std::string& archive_dir,
                                               const std::string& method_tag_) {
  std::vector<RunRecordLine> out;
  std::ifstream in(method_file(archive_dir, method_tag_));
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_line(line));
    } catch (const SchemaError&) {
      break;  // trailing partial line from an interrupted run
    }
  }
  return out;
}

ExperimentPlan load_plan(const std::string& archive_dir) {
  std::ifstream in(archive_dir + "/plan.json");
  if (!in) throw SchemaError("archive: missing plan.json in " + archive_dir);
  json j;
  in >> j;
  return plan_from_json(j);
}

int default_worker_count() {
  if (const char* env = std::getenv("METABENCH_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// ---------------------------------------------------------------------------
// Parallel benchmark runner

namespace {

struct Cell {
  int method_idx;
  size_t task_idx;
  int run;
};

}  // namespace

BenchOutcome run_benchmark(const ExperimentPlan& plan,
                           const std::vector<const Objective*>& tasks,
                           const std::string& archive_dir, int workers,
                           bool quiet) {
  plan.validate();
  if (tasks.empty()) throw ValidationError("run_benchmark: no tasks");
  fs::create_directories(archive_dir + "/results");
  {
    std::ofstream plan_out(archive_dir + "/plan.json");
    if (!plan_out) throw SchemaError("cannot write " + archive_dir + "/plan.json");
    plan_out << plan_to_json(plan).dump(2) << "\n";
  }
  if (workers <= 0) workers = default_worker_count();

  BenchOutcome outcome;

  // Per-method completed cells (resumability) and ordered writers.
  const size_t K = plan.methods.size();
  std::vector<std::set<std::pair<std::uint64_t, int>>> done(K);
  for (size_t k = 0; k < K; ++k) {
    const std::string tag = method_tag(plan.methods[k]);
    auto existing = load_method_records(archive_dir, tag);
    // rewrite the file to drop any trailing partial line
    std::ofstream out(method_file(archive_dir, tag), std::ios::trunc);
    for (const auto& rec : existing) {
      out << record_to_line(rec) << "\n";
      done[k].insert({rec.task_id, rec.run});
      if (rec.status != "ok") ++outcome.failed;
    }
  }

  // Canonical cell order: methods (plan order) x tasks x runs.
  std::vector<Cell> cells;
  std::vector<long> cell_slot(0);
  std::vector<std::vector<std::optional<std::string>>> pending(K);
  std::vector<long> next_flush(K, 0), total_per_method(K, 0);
  for (size_t k = 0; k < K; ++k) {
    total_per_method[k] = static_cast<long>(tasks.size()) * plan.runs_per_task;
    pending[k].resize(static_cast<size_t>(total_per_method[k]));
  }
  for (size_t k = 0; k < K; ++k)
    for (size_t t = 0; t < tasks.size(); ++t)
      for (int r = 0; r < plan.runs_per_task; ++r)
        cells.push_back({static_cast<int>(k), t, r});

  std::mutex io_mutex;
  std::vector<std::ofstream> files(K);
  for (size_t k = 0; k < K; ++k)
    files[k].open(method_file(archive_dir, method_tag(plan.methods[k])),
                  std::ios::app);

  auto flush_ready = [&](size_t k) {
    auto& buf = pending[k];
    while (next_flush[k] < total_per_method[k] &&
           buf[static_cast<size_t>(next_flush[k])].has_value()) {
      files[k] << *buf[static_cast<size_t>(next_flush[k])] << "\n";
      buf[static_cast<size_t>(next_flush[k])].reset();
      ++next_flush[k];
    }
    files[k].flush();
  };

  std::atomic<size_t> next_cell{0};
  std::atomic<long> n_failed{0}, n_completed{0}, n_skipped{0};

  auto worker = [&]() {
    for (;;) {
      const size_t idx = next_cell.fetch_add(1);
      if (idx >= cells.size()) return;
      const Cell cell = cells[idx];
      const size_t k = static_cast<size_t>(cell.method_idx);
      const Method method = plan.methods[k];
      const std::string tag = method_tag(method);
      const Objective& task = *tasks[cell.task_idx];
      const long slot =
          static_cast<long>(cell.task_idx) * plan.runs_per_task + cell.run;

      RunRecordLine rec;
      rec.method = tag;
      rec.task_id = task.task_id();
      rec.run = cell.run;
      rec.seed = derive_seed(plan.master_seed, tag, task.task_id(),
                             static_cast<std::uint64_t>(cell.run));

      {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (done[k].count({rec.task_id, cell.run})) {
          pending[k][static_cast<size_t>(slot)] = std::nullopt;
          // already flushed by the pre-pass; mark slot as flushed
          // (the pre-pass wrote it, so only bump the pointer if aligned)
          ++n_skipped;
          if (next_flush[k] == slot) {
            ++next_flush[k];
            flush_ready(k);
          } else if (slot < next_flush[k]) {
            // fine: already inside the flushed prefix
          } else {
            pending[k][static_cast<size_t>(slot)] = std::string();  // sentinel
          }
          continue;
        }
      }

      OptimizerConfig config;
      config.method = method;
      config.budget = plan.budget_of(method);
      config.seed = rec.seed;
      config.fast = plan.fast;
      config.assume_noiseless = true;

      const auto t0 = std::chrono::steady_clock::now();
      try {
        Trajectory traj = run_optimizer(task, config);
        rec.status = "ok";
        rec.xs = std::move(traj.xs);
        rec.ys = std::move(traj.ys);
      } catch (const std::exception& e) {
        rec.status = "error";
        rec.error = e.what();
        ++n_failed;
      }
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      ++n_completed;

      std::lock_guard<std::mutex> lock(io_mutex);
      pending[k][static_cast<size_t>(slot)] = record_to_line(rec);
      flush_ready(k);
      if (!quiet && n_completed % 500 == 0) {
        std::fprintf(stderr, "[bench] %ld/%zu cells done\n",
                     n_completed.load(), cells.size());
      }
    }
  };

  std::vector<std::thread> pool;
  const int n_threads = std::min<long>(workers, static_cast<long>(cells.size()));
  pool.reserve(static_cast<size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  outcome.completed = n_completed.load();
  outcome.skipped = n_skipped.load();
  outcome.failed += n_failed.load();
  return outcome;
}

long verify_archive(const std::string& archive_dir,
                    const std::vector<const Objective*>& tasks) {
  const ExperimentPlan plan = load_plan(archive_dir);
  std::map<std::uint64_t, const Objective*> by_id;
  for (const auto* t : tasks) by_id[t->task_id()] = t;
  long mismatches = 0;
  for (Method m : plan.methods) {
    for (const auto& rec : load_method_records(archive_dir, method_tag(m))) {
      if (rec.status != "ok" || rec.xs.empty()) continue;
      auto it = by_id.find(rec.task_id);
      if (it == by_id.end()) {
        ++mismatches;
        continue;
      }
      const double expected = it->second->evaluate_noiseless(rec.xs.front());
      if (expected != rec.ys.front()) ++mismatches;
    }
  }
  return mismatches;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ArchiveData {
  std::vector<std::string> methods;
  // [method][task][run]
  std::vector<std::vector<std::vector<std::vector<double>>>> curves;
  std::vector<std::vector<std::vector<double>>> finals;
  std::vector<std::uint64_t> task_ids;
  std::vector<int> budgets;
};

ArchiveData load_archive(const std::string& archive_dir, const ExperimentPlan& plan) {
  ArchiveData data;
  std::set<std::uint64_t> id_set;
  std::vector<std::vector<RunRecordLine>> all(plan.methods.size());
  for (size_t k = 0; k < plan.methods.size(); ++k) {
    data.methods.push_back(method_tag(plan.methods[k]));
    data.budgets.push_back(plan.budget_of(plan.methods[k]));
    all[k] = load_method_records(archive_dir, data.methods.back());
    if (all[k].empty())
      throw ValidationError("archive has no records for method " + data.methods.back());
    for (const auto& rec : all[k]) id_set.insert(rec.task_id);
  }
  data.task_ids.assign(id_set.begin(), id_set.end());
  std::map<std::uint64_t, size_t> task_index;
  for (size_t i = 0; i < data.task_ids.size(); ++i) task_index[data.task_ids[i]] = i;

  data.curves.resize(plan.methods.size());
  data.finals.resize(plan.methods.size());
  for (size_t k = 0; k < plan.methods.size(); ++k) {
    data.curves[k].resize(data.task_ids.size());
    data.finals[k].resize(data.task_ids.size());
    for (auto& rec : all[k]) {
      if (rec.status != "ok")
        throw ValidationError("archive contains failed cells; rerun bench (method " +
                              rec.method + ", task " + std::to_string(rec.task_id) + ")");
      std::vector<double> inc(rec.ys.size());
      double best = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < rec.ys.size(); ++i) {
        best = std::min(best, rec.ys[i]);
        inc[i] = best;
      }
      const size_t t = task_index[rec.task_id];
      data.finals[k][t].push_back(best);
      data.curves[k][t].push_back(std::move(inc));
    }
    for (size_t t = 0; t < data.task_ids.size(); ++t)
      if (data.curves[k][t].empty())
        throw ValidationError("archive incomplete: method " + data.methods[k] +
                              " has no runs for task " +
                              std::to_string(data.task_ids[t]));
  }
  return data;
}

}  // namespace

std::vector<std::vector<double>> final_error_groups(
    const std::vector<std::string>& methods,
    const std::vector<std::vector<std::vector<double>>>& finals_per_method_task,
    int group_size) {
  std::vector<std::vector<double>> samples(methods.size());
  for (size_t k = 0; k < methods.size(); ++k) {
    for (const auto& per_task : finals_per_method_task[k]) {
      const auto means = group_means(per_task, group_size);
      samples[k].insert(samples[k].end(), means.begin(), means.end());
    }
    if (samples[k].empty())
      throw ValidationError("method " + methods[k] +
                            ": no complete group of runs (group size too large?)");
  }
  return samples;
}

void generate_reports(const std::string& archive_dir, const ReportOptions& options,
                      const std::string& out_dir) {
  const ExperimentPlan plan = load_plan(archive_dir);
  const ArchiveData data = load_archive(archive_dir, plan);
  fs::create_directories(out_dir);

  if (options.ecdf) {
    if (options.tasks_dir.empty())
      throw ValidationError("ecdf report needs the task directory (probe-grid targets)");
    auto tasks = load_task_dir(options.tasks_dir);
    std::map<std::uint64_t, const Objective*> by_id;
    for (const auto& t : tasks) by_id[t->task_id()] = t.get();

    std::ofstream out(out_dir + "/ecdf.csv");
    out << "method,budget,fraction\n";
    for (size_t k = 0; k < data.methods.size(); ++k) {
      const int budget = data.budgets[k];
      std::vector<long> solved(static_cast<size_t>(budget) + 1, 0);
      long total = 0;
      for (size_t t = 0; t < data.task_ids.size(); ++t) {
        auto it = by_id.find(data.task_ids[t]);
        if (it == by_id.end())
          throw ValidationError("task " + std::to_string(data.task_ids[t]) +
                                " not found in " + options.tasks_dir);
        std::vector<double> targets = make_targets(
            *it->second, sobol_grid(it->second->space(),
                                    default_grid_size(it->second->space())));
        if (options.target_quantiles) {
          std::vector<double> qs(11);
          for (int i = 0; i < 11; ++i) qs[static_cast<size_t>(i)] = i / 10.0;
          targets = quantile_targets(std::move(targets), qs);
        }
        for (const auto& curve : data.curves[k][t]) {
          for (double target : targets) {
            ++total;
            const auto rt = runtime_to_target(curve, target);
            if (rt && *rt <= budget) ++solved[static_cast<size_t>(*rt)];
          }
        }
      }
      long acc = 0;
      for (int b = 1; b <= budget; ++b) {
        acc += solved[static_cast<size_t>(b)];
        out << data.methods[k] << "," << b << ","
            << fmt_double(static_cast<double>(acc) / static_cast<double>(total))
            << "\n";
      }
    }
  }

  if (options.ranks) {
    Rng rng(splitmix64(options.seed ^ 0x72616e6bULL));
    const RankTable table =
        bootstrap_ranking(data.methods, data.curves, options.bootstrap_size, rng);
    std::ofstream out(out_dir + "/ranks.csv");
    out << "method,iteration,avg_rank\n";
    for (size_t k = 0; k < data.methods.size(); ++k)
      for (int it = 0; it < table.iterations(); ++it)
        out << data.methods[k] << "," << (it + 1) << ","
            << fmt_double(table.avg_rank(static_cast<long>(k), it)) << "\n";
  }

  if (options.utest) {
    const auto samples =
        final_error_groups(data.methods, data.finals, options.group_size);
    const UTestMatrix matrix = pairwise_utest_matrix(data.methods, samples);
    std::ofstream out(out_dir + "/utest.csv");
    out << "row_method,col_method,p_value,orientation\n";
    for (size_t r = 0; r < data.methods.size(); ++r)
      for (size_t c = 0; c < data.methods.size(); ++c) {
        if (r == c) continue;
        out << data.methods[r] << "," << data.methods[c] << ","
            << fmt_double(matrix.p(static_cast<long>(r), static_cast<long>(c)))
            << "," << UTestMatrix::kOrientation << "\n";
      }
  }

  if (options.scores) {
    std::ofstream out(out_dir + "/scores.csv");
    out << "method,mean,se\n";
    for (size_t k = 0; k < data.methods.size(); ++k) {
      std::vector<double> per_task;
      for (const auto& finals : data.finals[k]) {
        double acc = 0.0;
        for (double f : finals) acc += f;
        per_task.push_back(acc / static_cast<double>(finals.size()));
      }
      const ScoreEstimate est = score_estimate(data.methods[k], per_task);
      out << est.method << "," << fmt_double(est.mean) << ","
          << (est.se ? fmt_double(*est.se) : "nan") << "\n";
    }
  }
}

}  // namespace metabench
