#include "ucarp/evolve.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

namespace ucarp {

namespace {

constexpr std::array<Op, 6> kFunctions = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Max, Op::Min};
constexpr std::uint64_t kInitStream = 0x1e17;
constexpr std::uint64_t kBreedStream = 0xb4eed;

Node random_leaf(Rng& rng) {
  const auto pick = rng.uniform_int(kNumTerminals + 1);
  if (pick == kNumTerminals) return Node::constant(rng.uniform01());
  return Node::var(kAllTerminals[pick]);
}

void grow_into(std::vector<Node>& out, Rng& rng, int level, int depth, bool full) {
  bool leaf = level >= depth;
  if (!leaf && !full) {
    // grow: every primitive is equally likely while depth remains
    leaf = rng.uniform_int(kFunctions.size() + kNumTerminals + 1) >= kFunctions.size();
  }
  if (leaf) {
    out.push_back(random_leaf(rng));
    return;
  }
  out.push_back(Node::function(kFunctions[rng.uniform_int(kFunctions.size())]));
  grow_into(out, rng, level + 1, depth, full);
  grow_into(out, rng, level + 1, depth, full);
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void GpConfig::validate() const {
  if (population_size < 1 || generations < 1 || tournament_size < 1 || training_samples < 1)
    throw std::invalid_argument("GP counts must be positive");
  if (crossover_rate < 0 || mutation_rate < 0 || reproduction_rate < 0 ||
      std::abs(crossover_rate + mutation_rate + reproduction_rate - 1.0) > 1e-9)
    throw std::invalid_argument("operator rates must be non-negative and sum to 1");
  if (max_depth < 1 || init_min_depth < 1 || init_max_depth < init_min_depth ||
      init_max_depth > max_depth || mutation_subtree_depth < 1)
    throw std::invalid_argument("inconsistent depth limits");
  if (internal_node_probability > 1.0) throw std::invalid_argument("internal_node_probability above 1");
  if (max_retries < 1) throw std::invalid_argument("max_retries must be positive");
  if (num_vehicles < 0 || threads < 0) throw std::invalid_argument("negative vehicle or thread count");
}

int default_threads() {
  if (const char* env = std::getenv("UCARP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  const size_t count = std::min(n, static_cast<size_t>(threads));
  for (size_t i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::uint64_t> training_seeds(const Instance& instance, std::uint64_t master,
                                          int generation, int count,
                                          const SamplingParams& sampling) {
  const std::uint64_t base = mix_seed(master, static_cast<std::uint64_t>(generation));
  std::vector<std::uint64_t> out;
  for (std::uint64_t j = 0; static_cast<int>(out.size()) < count; ++j) {
    if (j > 1000u * static_cast<std::uint64_t>(count))
      throw SimulationError(fmt::format("no servable samples for {}", instance.name()));
    const std::uint64_t seed = mix_seed(base, j);
    if (is_servable(sample_instance(instance, seed, sampling))) out.push_back(seed);
  }
  return out;
}

SampleSet::SampleSet(const Instance& instance, std::span<const std::uint64_t> seeds,
                     const SamplingParams& sampling) {
  samples_.reserve(seeds.size());
  for (auto s : seeds) samples_.push_back(sample_instance(instance, s, sampling));
}

double fitness(const PolicyExpr& policy, const SampleSet& samples, int num_vehicles,
               const SimConfig& config, std::shared_ptr<const DistanceOracle> oracle) {
  if (samples.samples().empty()) throw std::invalid_argument("fitness needs at least one sample");
  double sum = 0.0;
  for (const auto& sample : samples.samples())
    sum += construct_solution(sample, num_vehicles, policy, config, oracle).total_cost;
  return sum / static_cast<double>(samples.samples().size());
}

double fitness(const PolicyExpr& policy, const Instance& instance,
               std::span<const std::uint64_t> seeds, int num_vehicles, const SimConfig& config,
               const SamplingParams& sampling) {
  return fitness(policy, SampleSet(instance, seeds, sampling), num_vehicles, config,
                 std::make_shared<const DistanceOracle>(build_distance_oracle(instance)));
}

PolicyExpr random_tree(Rng& rng, int depth, bool full) {
  std::vector<Node> nodes;
  grow_into(nodes, rng, 1, depth, full);
  return PolicyExpr(std::move(nodes));
}

std::vector<PolicyExpr> ramped_half_and_half(Rng& rng, int count, int min_depth, int max_depth) {
  const int span = max_depth - min_depth + 1;
  std::vector<PolicyExpr> out;
  std::unordered_set<std::string> seen;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int depth = min_depth + i % span;
    const bool full = (i / span) % 2 == 0;
    PolicyExpr tree = random_tree(rng, depth, full);
    for (int attempt = 0; attempt < 100 && seen.contains(serialize(tree)); ++attempt)
      tree = random_tree(rng, depth, full);
    seen.insert(serialize(tree));
    out.push_back(std::move(tree));
  }
  return out;
}

PolicyExpr replace_subtree(const PolicyExpr& tree, size_t index, const PolicyExpr& replacement) {
  const auto nodes = tree.nodes();
  const size_t end = tree.subtree_end(index);
  std::vector<Node> out(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(index));
  out.insert(out.end(), replacement.nodes().begin(), replacement.nodes().end());
  out.insert(out.end(), nodes.begin() + static_cast<std::ptrdiff_t>(end), nodes.end());
  return PolicyExpr(std::move(out));
}

namespace {
PolicyExpr subtree(const PolicyExpr& tree, size_t index) {
  const auto nodes = tree.nodes();
  return PolicyExpr(std::vector<Node>(nodes.begin() + static_cast<std::ptrdiff_t>(index),
                                      nodes.begin() + static_cast<std::ptrdiff_t>(tree.subtree_end(index))));
}
}  // namespace

std::pair<PolicyExpr, PolicyExpr> crossover_at(const PolicyExpr& a, size_t ia, const PolicyExpr& b,
                                               size_t ib) {
  return {replace_subtree(a, ia, subtree(b, ib)), replace_subtree(b, ib, subtree(a, ia))};
}

size_t pick_node(const PolicyExpr& tree, Rng& rng, double internal_probability) {
  if (internal_probability < 0.0 || tree.size() == 1) return rng.uniform_int(tree.size());
  const bool internal = rng.uniform01() < internal_probability;
  size_t count = 0;
  for (const auto& n : tree.nodes()) count += n.is_leaf() != internal;
  size_t k = rng.uniform_int(count);
  for (size_t i = 0; i < tree.size(); ++i)
    if (tree.nodes()[i].is_leaf() != internal && k-- == 0) return i;
  return 0;
}

std::pair<PolicyExpr, PolicyExpr> crossover(const PolicyExpr& a, const PolicyExpr& b, Rng& rng,
                                            int max_depth, int retries, double internal_probability) {
  std::optional<PolicyExpr> first, second;
  for (int attempt = 0; attempt < retries && !(first && second); ++attempt) {
    const size_t ia = pick_node(a, rng, internal_probability);
    const size_t ib = pick_node(b, rng, internal_probability);
    auto [c1, c2] = crossover_at(a, ia, b, ib);
    if (!first && c1.depth() <= max_depth) first = std::move(c1);
    if (!second && c2.depth() <= max_depth) second = std::move(c2);
  }
  return {first ? *first : a, second ? *second : b};
}

PolicyExpr mutate(const PolicyExpr& parent, Rng& rng, int max_depth, int subtree_depth,
                  int retries, double internal_probability) {
  for (int attempt = 0; attempt < retries; ++attempt) {
    const size_t index = pick_node(parent, rng, internal_probability);
    PolicyExpr child = replace_subtree(parent, index, random_tree(rng, subtree_depth, false));
    if (child.depth() <= max_depth) return child;
  }
  return parent;
}

size_t tournament(std::span<const double> fitness, int size, Rng& rng) {
  size_t best = rng.uniform_int(fitness.size());
  for (int i = 1; i < size; ++i) {
    const size_t j = rng.uniform_int(fitness.size());
    if (fitness[j] < fitness[best]) best = j;
  }
  return best;
}

EvolveResult evolve(const Instance& instance, const GpConfig& config,
                    const GenerationCallback& on_generation) {
  config.validate();
  const int m = config.num_vehicles > 0 ? config.num_vehicles : min_vehicles(instance);
  const int threads = config.threads > 0 ? config.threads : default_threads();
  const auto oracle = std::make_shared<const DistanceOracle>(build_distance_oracle(instance));

  Rng init_rng(mix_seed(config.seed, kInitStream));
  std::vector<PolicyExpr> population = ramped_half_and_half(
      init_rng, config.population_size, config.init_min_depth, config.init_max_depth);
  std::vector<double> fit(population.size());

  EvolveResult result;
  for (int gen = 0; gen < config.generations; ++gen) {
    const auto started = std::chrono::steady_clock::now();
    const auto seeds =
        training_seeds(instance, config.seed, gen, config.training_samples, config.sampling);
    const SampleSet samples(instance, seeds, config.sampling);
    parallel_for(population.size(), threads, [&](size_t i) {
      fit[i] = fitness(population[i], samples, m, config.sim, oracle);
    });

    size_t best = 0;
    double sum = 0.0, worst = fit[0];
    for (size_t i = 0; i < fit.size(); ++i) {
      if (fit[i] < fit[best]) best = i;
      worst = std::max(worst, fit[i]);
      sum += fit[i];
    }
    GenerationStats stats{gen, fit[best], sum / static_cast<double>(fit.size()), worst,
                          serialize(population[best]),
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                              .count()};
    result.log.push_back(stats);
    if (on_generation) on_generation(stats);

    if (gen + 1 == config.generations) {
      result.best = {population[best], fit[best]};
      break;
    }

    Rng rng(mix_seed(mix_seed(config.seed, kBreedStream), static_cast<std::uint64_t>(gen)));
    std::vector<PolicyExpr> next;
    next.reserve(population.size());
    for (size_t slot = 0; slot < population.size(); ++slot) {
      const double r = rng.uniform01();
      if (r < config.crossover_rate) {
        const auto& a = population[tournament(fit, config.tournament_size, rng)];
        const auto& b = population[tournament(fit, config.tournament_size, rng)];
        next.push_back(crossover(a, b, rng, config.max_depth, config.max_retries,
                                 config.internal_node_probability)
                           .first);
      } else if (r < config.crossover_rate + config.mutation_rate) {
        const auto& a = population[tournament(fit, config.tournament_size, rng)];
        next.push_back(mutate(a, rng, config.max_depth, config.mutation_subtree_depth,
                              config.max_retries, config.internal_node_probability));
      } else {
        next.push_back(reproduce(population[tournament(fit, config.tournament_size, rng)]));
      }
    }
    population = std::move(next);
  }
  return result;
}

std::string generation_log_csv(const std::vector<GenerationStats>& log) {
  std::string out = "generation,best,mean,worst,seconds,best_policy\n";
  for (const auto& g : log)
    out += fmt::format("{},{},{},{},{:.3f},{}\n", g.generation, g.best, g.mean, g.worst, g.seconds,
                       csv_quote(g.best_policy));
  return out;
}

}  // namespace ucarp
