#include "ucarp/bench.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace ucarp {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << content;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double x) { return fmt::format("{:.6f}", x); }

}  // namespace

SimConfig Variant::sim_config(EstimatorMode estimator) const {
  SimConfig c;
  c.collab_route_failure = collab_route_failure;
  c.collab_refill = collab_refill;
  c.estimator = estimator;
  return c;
}

Variant parse_variant(std::string_view name) {
  Variant v;
  v.name = std::string(name);
  if (name == "GPHH") return v;
  if (name == "GPHH-C") {
    v.collab_route_failure = v.collab_refill = true;
    return v;
  }
  if (name == "GPHH-C_RouteFailure") {
    v.collab_route_failure = true;
    return v;
  }
  if (name == "GPHH-C_Refill") {
    v.collab_refill = true;
    return v;
  }
  std::string_view base = name;
  bool collab = false;
  if (base.size() > 2 && base.substr(base.size() - 2) == "-C") {
    collab = true;
    base.remove_suffix(2);
  }
  if (auto id = manual_policy_id(base)) {
    v.manual = *id;
    v.collab_route_failure = v.collab_refill = collab;
    return v;
  }
  throw std::invalid_argument(fmt::format("unknown variant '{}'", name));
}

std::vector<std::string> variant_names() {
  std::vector<std::string> out = {"GPHH", "GPHH-C", "GPHH-C_RouteFailure", "GPHH-C_Refill"};
  for (int i = 1; i <= 5; ++i) out.push_back(fmt::format("PS{}", i));
  for (int i = 1; i <= 5; ++i) out.push_back(fmt::format("PS{}-C", i));
  return out;
}

TestResult test_performance(const PolicyExpr& policy, const Instance& instance,
                            const SimConfig& config, std::uint64_t seed_base, int count,
                            int num_vehicles, int threads, const SamplingParams& sampling) {
  const int m = num_vehicles > 0 ? num_vehicles : min_vehicles(instance);
  const auto oracle = std::make_shared<const DistanceOracle>(build_distance_oracle(instance));
  std::vector<double> costs(static_cast<size_t>(count), 0.0);
  std::vector<std::uint8_t> used(static_cast<size_t>(count), 0);
  parallel_for(static_cast<size_t>(count), threads, [&](size_t i) {
    const auto sample = sample_instance(instance, seed_base + i, sampling);
    if (!is_servable(sample)) return;
    costs[i] = construct_solution(sample, m, policy, config, oracle).total_cost;
    used[i] = 1;
  });
  TestResult result;
  for (size_t i = 0; i < costs.size(); ++i) {
    if (!used[i]) {
      ++result.excluded;
      continue;
    }
    result.seeds.push_back(seed_base + i);
    result.costs.push_back(costs[i]);
  }
  if (result.costs.empty()) throw SimulationError("no servable test samples");
  result.mean = mean(result.costs);
  return result;
}

void ExperimentSpec::validate() const {
  if (instances.empty()) throw std::invalid_argument("experiment lists no instances");
  if (variants.empty()) throw std::invalid_argument("experiment lists no variants");
  for (const auto& v : variants) parse_variant(v);
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (test_samples < 1) throw std::invalid_argument("test_samples must be at least 1");
  gp.validate();
}

ExperimentSpec parse_experiment_spec(const std::string& json_text,
                                     const std::filesystem::path& base_dir) {
  using nlohmann::json;
  const json doc = json::parse(json_text);
  ExperimentSpec spec;
  for (const auto& p : doc.at("instances")) {
    std::filesystem::path path = p.get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    spec.instances.push_back(path);
  }
  spec.variants = doc.at("variants").get<std::vector<std::string>>();
  spec.runs = doc.value("runs", spec.runs);
  spec.estimator = estimator_from_string(doc.value("estimator", std::string("actual")));
  spec.test_seed_base = doc.value("test_seed_base", spec.test_seed_base);
  spec.test_samples = doc.value("test_samples", spec.test_samples);
  if (doc.contains("output_dir")) {
    spec.output_dir = doc["output_dir"].get<std::string>();
    if (spec.output_dir.is_relative() && !base_dir.empty()) spec.output_dir = base_dir / spec.output_dir;
  }
  spec.seed = doc.value("seed", spec.seed);
  spec.threads = doc.value("threads", spec.threads);
  if (doc.contains("gp")) {
    const auto& g = doc["gp"];
    auto& gp = spec.gp;
    gp.population_size = g.value("population_size", gp.population_size);
    gp.generations = g.value("generations", gp.generations);
    gp.tournament_size = g.value("tournament_size", gp.tournament_size);
    gp.crossover_rate = g.value("crossover_rate", gp.crossover_rate);
    gp.mutation_rate = g.value("mutation_rate", gp.mutation_rate);
    gp.reproduction_rate = g.value("reproduction_rate", gp.reproduction_rate);
    gp.max_depth = g.value("max_depth", gp.max_depth);
    gp.training_samples = g.value("training_samples", gp.training_samples);
    gp.init_min_depth = g.value("init_min_depth", gp.init_min_depth);
    gp.init_max_depth = g.value("init_max_depth", gp.init_max_depth);
    gp.mutation_subtree_depth = g.value("mutation_subtree_depth", gp.mutation_subtree_depth);
    gp.internal_node_probability = g.value("internal_node_probability", gp.internal_node_probability);
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str(), path.parent_path());
}

Comparison compare_variants(const std::string& instance, const std::string& a,
                            const std::vector<const RunRecord*>& runs_a, const std::string& b,
                            const std::vector<const RunRecord*>& runs_b) {
  Comparison c{instance, a, b};
  auto run_means = [](const std::vector<const RunRecord*>& runs) {
    std::vector<double> out;
    for (const auto* r : runs) out.push_back(r->test_mean);
    return out;
  };
  auto per_seed = [](const std::vector<const RunRecord*>& runs) {
    std::vector<double> out(runs.front()->test_costs.size(), 0.0);
    for (const auto* r : runs)
      for (size_t i = 0; i < out.size() && i < r->test_costs.size(); ++i) out[i] += r->test_costs[i];
    for (double& x : out) x /= static_cast<double>(runs.size());
    return out;
  };
  const auto ma = run_means(runs_a), mb = run_means(runs_b);
  c.mean_a = mean(ma);
  c.mean_b = mean(mb);
  if (runs_a.size() >= 2 && runs_b.size() >= 2) {
    c.p_value = wilcoxon_rank_sum(ma, mb);
    c.verdict = compare(ma, mb);
  } else {
    const auto sa = per_seed(runs_a), sb = per_seed(runs_b);
    c.p_value = wilcoxon_rank_sum(sa, sb);
    c.verdict = compare(sa, sb);
  }
  return c;
}

TestReport run_experiment(const ExperimentSpec& spec, const ProgressCallback& progress) {
  spec.validate();
  const int threads = spec.threads > 0 ? spec.threads : default_threads();
  TestReport report;
  std::vector<Instance> instances;
  for (const auto& path : spec.instances) instances.push_back(load_instance(path));

  for (const auto& inst : instances) {
    for (const auto& vname : spec.variants) {
      const Variant variant = parse_variant(vname);
      const SimConfig sim = variant.sim_config(spec.estimator);
      const int runs = variant.is_gp() ? spec.runs : 1;
      for (int run = 0; run < runs; ++run) {
        RunRecord rec;
        rec.instance = inst.name();
        rec.variant = vname;
        rec.run = run;
        rec.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(run));
        const std::string cell = fmt::format("{}_{}_run{}", inst.name(), vname, run);
        if (progress) progress(fmt::format("{}: start", cell));
        try {
          PolicyExpr policy;
          if (variant.is_gp()) {
            GpConfig gp = spec.gp;
            gp.sim = sim;
            gp.seed = rec.seed;
            gp.threads = threads;
            const auto result = evolve(inst, gp);
            policy = result.best.policy;
            rec.train_fitness = result.best.fitness;
            write_file(spec.output_dir / "logs" / (cell + ".csv"), generation_log_csv(result.log));
          } else {
            policy = manual_policy(*variant.manual);
          }
          rec.policy = serialize(policy);
          write_file(spec.output_dir / "policies" / (cell + ".txt"), rec.policy + "\n");
          const auto test = test_performance(policy, inst, sim, spec.test_seed_base,
                                             spec.test_samples, 0, threads);
          rec.test_mean = test.mean;
          rec.test_used = static_cast<int>(test.costs.size());
          rec.test_excluded = test.excluded;
          rec.test_costs = test.costs;
          if (progress)
            progress(fmt::format("{}: test mean {:.4f} ({} excluded)", cell, rec.test_mean,
                                 rec.test_excluded));
        } catch (const std::exception& err) {
          rec.error = err.what();
          if (progress) progress(fmt::format("{}: failed: {}", cell, rec.error));
        }
        report.runs.push_back(std::move(rec));
      }
    }
  }

  // reduce
  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> cells;
  for (const auto& r : report.runs)
    if (r.error.empty()) cells[{r.instance, r.variant}].push_back(&r);
  for (const auto& inst : instances) {
    for (const auto& v : spec.variants) {
      auto it = cells.find({inst.name(), v});
      if (it == cells.end()) continue;
      std::vector<double> means;
      for (const auto* r : it->second) means.push_back(r->test_mean);
      report.summary.push_back({inst.name(), v, static_cast<int>(means.size()), mean(means),
                                stddev(means)});
    }
    for (size_t i = 0; i < spec.variants.size(); ++i)
      for (size_t j = i + 1; j < spec.variants.size(); ++j) {
        auto ia = cells.find({inst.name(), spec.variants[i]});
        auto ib = cells.find({inst.name(), spec.variants[j]});
        if (ia == cells.end() || ib == cells.end()) continue;
        report.comparisons.push_back(compare_variants(inst.name(), spec.variants[i], ia->second,
                                                      spec.variants[j], ib->second));
      }
  }

  write_file(spec.output_dir / "runs.csv", runs_csv(report));
  write_file(spec.output_dir / "summary.csv", summary_csv(report));
  write_file(spec.output_dir / "summary.txt", summary_text(report, spec));
  write_file(spec.output_dir / "wdl.csv", wdl_csv(report));
  write_file(spec.output_dir / "wdl_matrix.csv", wdl_matrix_csv(report, spec.variants));
  return report;
}

std::string runs_csv(const TestReport& report) {
  std::string out =
      "instance,variant,run,seed,test_mean,test_used,test_excluded,train_fitness,policy,error\n";
  for (const auto& r : report.runs)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.instance), r.variant, r.run,
                       r.seed, num(r.test_mean), r.test_used, r.test_excluded,
                       num(r.train_fitness), csv_field(r.policy), csv_field(r.error));
  return out;
}

std::string summary_csv(const TestReport& report) {
  std::string out = "instance,variant,runs,mean,sd\n";
  for (const auto& s : report.summary)
    out += fmt::format("{},{},{},{},{}\n", csv_field(s.instance), s.variant, s.runs, num(s.mean),
                       num(s.sd));
  return out;
}

std::string summary_text(const TestReport& report, const ExperimentSpec& spec) {
  std::vector<std::string> instances;
  std::map<std::pair<std::string, std::string>, const SummaryRow*> rows;
  for (const auto& s : report.summary) {
    if (std::find(instances.begin(), instances.end(), s.instance) == instances.end())
      instances.push_back(s.instance);
    rows[{s.instance, s.variant}] = &s;
  }
  std::string out = fmt::format("test seeds: {} .. {} ({} per instance), estimator: {}\n\n",
                                spec.test_seed_base, spec.test_seed_base + spec.test_samples - 1,
                                spec.test_samples, to_string(spec.estimator));
  size_t width = 8;
  for (const auto& i : instances) width = std::max(width, i.size() + 1);
  out += fmt::format("{:<{}}", "instance", width);
  for (const auto& v : spec.variants) out += fmt::format(" {:>22}", v);
  out += "\n";
  std::map<std::string, std::vector<double>> grand;
  for (const auto& i : instances) {
    out += fmt::format("{:<{}}", i, width);
    for (const auto& v : spec.variants) {
      auto it = rows.find({i, v});
      if (it == rows.end()) {
        out += fmt::format(" {:>22}", "-");
        continue;
      }
      grand[v].push_back(it->second->mean);
      const std::string cellv = it->second->runs > 1
                                    ? fmt::format("{:.2f}({:.2f})", it->second->mean, it->second->sd)
                                    : fmt::format("{:.2f}", it->second->mean);
      out += fmt::format(" {:>22}", cellv);
    }
    out += "\n";
  }
  out += fmt::format("{:<{}}", "mean", width);
  for (const auto& v : spec.variants) {
    auto it = grand.find(v);
    out += fmt::format(" {:>22}", it == grand.end() ? std::string("-") : fmt::format("{:.2f}", mean(it->second)));
  }
  out += "\n";
  return out;
}

std::string wdl_csv(const TestReport& report) {
  std::string out = "instance,a,b,p_value,mean_a,mean_b,verdict\n";
  for (const auto& c : report.comparisons)
    out += fmt::format("{},{},{},{:.6g},{},{},{}\n", csv_field(c.instance), c.a, c.b, c.p_value,
                       num(c.mean_a), num(c.mean_b), to_string(c.verdict));
  return out;
}

std::string wdl_matrix_csv(const TestReport& report, const std::vector<std::string>& variants) {
  // cell (row, col): wins-draws-losses of row against col over instances
  std::map<std::pair<std::string, std::string>, std::array<int, 3>> tally;
  for (const auto& c : report.comparisons) {
    auto& ab = tally[{c.a, c.b}];
    auto& ba = tally[{c.b, c.a}];
    switch (c.verdict) {
      case Verdict::Win: ++ab[0]; ++ba[2]; break;
      case Verdict::Draw: ++ab[1]; ++ba[1]; break;
      case Verdict::Lose: ++ab[2]; ++ba[0]; break;
    }
  }
  std::string out = "variant";
  for (const auto& v : variants) out += "," + v;
  out += "\n";
  for (const auto& r : variants) {
    out += r;
    for (const auto& c : variants) {
      if (r == c) {
        out += ",-";
        continue;
      }
      auto it = tally.find({r, c});
      const auto t = it == tally.end() ? std::array<int, 3>{0, 0, 0} : it->second;
      out += fmt::format(",{}-{}-{}", t[0], t[1], t[2]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace ucarp
