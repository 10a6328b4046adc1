#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace shiftdiv {

// system name -> rank (1 = best, ties share the average rank)
using RankMap = std::map<std::string, double>;

// Fractional ranks of `scores`. With higher_is_better the largest score gets
// rank 1; otherwise the smallest does.
std::vector<double> average_ranks(std::span<const double> scores, bool higher_is_better);

// Spearman's rho. Untied inputs use 1 - 6 sum d^2 / (n (n^2 - 1)); inputs
// with ties fall back to the Pearson correlation of the rank vectors. NaN
// when either vector is constant.
double spearman_rho(std::span<const double> ranks_a, std::span<const double> ranks_b);

// Kendall's tau-b. NaN when either vector is constant.
double kendall_tau_b(std::span<const double> a, std::span<const double> b);

// Map overloads pair entries by system name; throws InputError unless both
// maps hold the same keys and at least two of them.
double spearman(const RankMap& ranks_a, const RankMap& ranks_b);
double kendall(const RankMap& ranks_a, const RankMap& ranks_b);

}  // namespace shiftdiv
