#include "ucarp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ucarp {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

std::vector<double> pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return all;
}

bool all_equal(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

void check_sizes(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("rank-sum test needs non-empty samples");
}

}  // namespace

double wilcoxon_exact(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const auto all = pooled(a, b);
  if (all_equal(all)) return 1.0;
  const auto ranks = midranks(all);
  // doubled midranks are integers, so the sum distribution is a DP over counts
  std::vector<int> twice(ranks.size());
  for (size_t i = 0; i < ranks.size(); ++i) twice[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
  const size_t na = a.size();
  const int max_sum = std::accumulate(twice.begin(), twice.end(), 0);
  std::vector<std::vector<double>> count(na + 1, std::vector<double>(static_cast<size_t>(max_sum) + 1, 0.0));
  count[0][0] = 1.0;
  for (int r : twice)
    for (size_t j = na; j >= 1; --j)
      for (int s = max_sum; s >= r; --s) count[j][static_cast<size_t>(s)] += count[j - 1][static_cast<size_t>(s - r)];

  int observed = 0;
  for (size_t i = 0; i < na; ++i) observed += twice[i];
  double total = 0.0, lower = 0.0, upper = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    const double c = count[na][static_cast<size_t>(s)];
    total += c;
    if (s <= observed) lower += c;
    if (s >= observed) upper += c;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

double wilcoxon_normal(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const auto all = pooled(a, b);
  if (all_equal(all)) return 1.0;
  const auto ranks = midranks(all);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double n = na + nb;
  double w = 0.0;
  for (size_t i = 0; i < a.size(); ++i) w += ranks[i];
  const double u = w - na * (na + 1.0) / 2.0;

  auto sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(u - na * nb / 2.0) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
  if (a.size() <= 10 && b.size() <= 10) return wilcoxon_exact(a, b);
  return wilcoxon_normal(a, b);
}

Verdict compare(std::span<const double> a, std::span<const double> b, double alpha) {
  if (wilcoxon_rank_sum(a, b) >= alpha) return Verdict::Draw;
  const double ma = mean(a), mb = mean(b);
  if (ma < mb) return Verdict::Win;
  if (ma > mb) return Verdict::Lose;
  return Verdict::Draw;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Win: return "win";
    case Verdict::Draw: return "draw";
    case Verdict::Lose: return "lose";
  }
  return "draw";
}

}  // namespace ucarp
