#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ucarp/bench.hpp"
#include "ucarp/evolve.hpp"
#include "ucarp/instance.hpp"
#include "ucarp/policy.hpp"
#include "ucarp/simulator.hpp"

using namespace ucarp;

namespace {

struct PolicySource {
  std::string file;
  std::string text;
  std::string manual;

  void add_to(CLI::App* app) {
    app->add_option("--policy-file", file, "File holding a prefix-expression policy");
    app->add_option("--policy", text, "Prefix-expression policy");
    app->add_option("--manual", manual, "Manual policy PS1..PS5");
  }

  PolicyExpr load() const {
    const int given = !file.empty() + !text.empty() + !manual.empty();
    if (given != 1) throw std::invalid_argument("give exactly one of --policy-file, --policy, --manual");
    if (!manual.empty()) return manual_policy(manual);
    if (!text.empty()) return parse_policy(text);
    std::ifstream in(file);
    if (!in) throw std::runtime_error(fmt::format("cannot open {}", file));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_policy(ss.str());
  }
};

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertain capacitated arc routing: collaborative construction, GP training, benchmarks"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Evolve a routing policy on one instance");
  std::string train_instance, train_variant = "GPHH-C", train_estimator = "actual", train_out, train_log;
  GpConfig gp;
  int train_test_samples = 0;
  std::uint64_t train_test_base = 1000000;
  train->add_option("--instance", train_instance, "Instance file")->required();
  train->add_option("--variant", train_variant, "GPHH, GPHH-C, GPHH-C_RouteFailure or GPHH-C_Refill");
  train->add_option("--seed", gp.seed, "Master seed");
  train->add_option("--estimator", train_estimator, "actual or truncate");
  train->add_option("--population", gp.population_size);
  train->add_option("--generations", gp.generations);
  train->add_option("--tournament", gp.tournament_size);
  train->add_option("--crossover", gp.crossover_rate);
  train->add_option("--mutation", gp.mutation_rate);
  train->add_option("--reproduction", gp.reproduction_rate);
  train->add_option("--max-depth", gp.max_depth);
  train->add_option("--training-samples", gp.training_samples);
  train->add_option("--internal-bias", gp.internal_node_probability,
                    "Probability of picking an internal node as crossover/mutation point (default uniform)");
  train->add_option("--threads", gp.threads, "Worker threads (default UCARP_THREADS or all cores)");
  train->add_option("--out", train_out, "Write the best policy here");
  train->add_option("--log", train_log, "Write the per-generation CSV log here");
  train->add_option("--test-samples", train_test_samples, "Test the result on this many samples");
  train->add_option("--test-seed-base", train_test_base);

  // test
  auto* test = app.add_subcommand("test", "Mean test cost of a policy over fixed samples");
  PolicySource test_policy;
  std::string test_instance, test_variant = "GPHH-C", test_estimator = "actual";
  std::uint64_t test_base = 1000000;
  int test_samples = 500, test_threads = 0;
  bool test_costs = false;
  test_policy.add_to(test);
  test->add_option("--instance", test_instance, "Instance file")->required();
  test->add_option("--variant", test_variant, "Variant whose collaboration flags apply");
  test->add_option("--estimator", test_estimator, "actual or truncate");
  test->add_option("--seed-base", test_base);
  test->add_option("--samples", test_samples);
  test->add_option("--threads", test_threads);
  test->add_flag("--costs", test_costs, "Print every sample cost");

  // compare
  auto* cmp = app.add_subcommand("compare", "Run an experiment spec and write reports");
  std::string spec_path, spec_output;
  cmp->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  cmp->add_option("--output", spec_output, "Override the output directory");

  // trace
  auto* trace = app.add_subcommand("trace", "One simulation with its event log as JSON");
  PolicySource trace_policy;
  std::string trace_instance, trace_variant = "GPHH-C", trace_estimator = "actual", trace_out;
  std::uint64_t trace_seed = 1;
  bool trace_means = false;
  trace_policy.add_to(trace);
  trace->add_option("--instance", trace_instance, "Instance file")->required();
  trace->add_option("--variant", trace_variant);
  trace->add_option("--estimator", trace_estimator);
  trace->add_option("--seed", trace_seed, "Sample seed");
  trace->add_flag("--means", trace_means, "Use the all-means sample instead of a random one");
  trace->add_option("--out", trace_out, "Write the JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const Instance inst = load_instance(train_instance);
      const Variant variant = parse_variant(train_variant);
      if (!variant.is_gp()) throw std::invalid_argument("train needs a GP variant");
      gp.sim = variant.sim_config(estimator_from_string(train_estimator));
      const auto result = evolve(inst, gp, [](const GenerationStats& g) {
        fmt::print(stderr, "gen {:3d} best {:.4f} mean {:.4f} ({:.1f}s)\n", g.generation, g.best,
                   g.mean, g.seconds);
      });
      const std::string text = serialize(result.best.policy);
      fmt::print("{}\nfitness {:.6f}\n", text, result.best.fitness);
      if (!train_out.empty()) write_text(train_out, text + "\n");
      if (!train_log.empty()) write_text(train_log, generation_log_csv(result.log));
      if (train_test_samples > 0) {
        const auto tr = test_performance(result.best.policy, inst, gp.sim, train_test_base,
                                         train_test_samples, 0, gp.threads > 0 ? gp.threads : default_threads());
        fmt::print("test mean {:.6f} over {} samples ({} excluded)\n", tr.mean, tr.costs.size(),
                   tr.excluded);
      }
    } else if (*test) {
      const Instance inst = load_instance(test_instance);
      const PolicyExpr policy = test_policy.load();
      const SimConfig sim = parse_variant(test_variant).sim_config(estimator_from_string(test_estimator));
      const auto tr = test_performance(policy, inst, sim, test_base, test_samples, 0,
                                       test_threads > 0 ? test_threads : default_threads());
      if (test_costs)
        for (size_t i = 0; i < tr.costs.size(); ++i) fmt::print("{} {:.6f}\n", tr.seeds[i], tr.costs[i]);
      fmt::print("{} {} mean {:.6f} over {} samples ({} excluded)\n", inst.name(), test_variant, tr.mean,
                 tr.costs.size(), tr.excluded);
      if (tr.excluded > 0)
        fmt::print(stderr, "warning: {} unservable samples excluded\n", tr.excluded);
    } else if (*cmp) {
      ExperimentSpec spec = load_experiment_spec(spec_path);
      if (!spec_output.empty()) spec.output_dir = spec_output;
      const auto report = run_experiment(spec, [](const std::string& msg) {
        fmt::print(stderr, "{}\n", msg);
      });
      fmt::print("{}", summary_text(report, spec));
      int failed = 0;
      for (const auto& r : report.runs) failed += !r.error.empty();
      if (failed > 0) {
        fmt::print(stderr, "{} cells failed\n", failed);
        return 1;
      }
    } else if (*trace) {
      const Instance inst = load_instance(trace_instance);
      const PolicyExpr policy = trace_policy.load();
      SimConfig sim = parse_variant(trace_variant).sim_config(estimator_from_string(trace_estimator));
      sim.record_log = true;
      const InstanceSample sample = trace_means ? mean_sample(inst) : sample_instance(inst, trace_seed);
      const Solution sol = construct_solution(sample, min_vehicles(inst), policy, sim);
      const std::string json = event_log_json(sol, inst);
      if (trace_out.empty())
        fmt::print("{}\n", json);
      else
        write_text(trace_out, json + "\n");
      const auto violations = validate_solution(sol, sample, inst.capacity());
      for (const auto& v : violations)
        fmt::print(stderr, "violation {} vehicle {} position {}: {}\n", v.constraint, v.vehicle + 1,
                   v.position, v.detail);
      if (!violations.empty()) return 1;
    }
  } catch (const std::exception& err) {
    fmt::print(stderr, "error: {}\n", err.what());
    return 1;
  }
  return 0;
}
