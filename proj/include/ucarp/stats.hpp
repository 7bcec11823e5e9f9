#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace ucarp {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);

/// Midranks (1-based) of `values`, ties sharing the average rank.
std::vector<double> midranks(std::span<const double> values);

/// Two-sided Wilcoxon rank-sum p-value. Exact when both samples have at most
/// 10 values (the permutation distribution of the rank sum over midranks),
/// otherwise the normal approximation with tie correction and a 0.5
/// continuity correction. All pooled values equal -> 1.
double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);
double wilcoxon_exact(std::span<const double> a, std::span<const double> b);
double wilcoxon_normal(std::span<const double> a, std::span<const double> b);

/// Verdict for `a` against `b` where lower is better.
enum class Verdict { Win, Draw, Lose };
Verdict compare(std::span<const double> a, std::span<const double> b, double alpha = 0.05);
std::string_view to_string(Verdict v);

}  // namespace ucarp
