#include "shiftdiv/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shiftdiv/error.hpp"

namespace shiftdiv {

std::vector<double> average_ranks(std::span<const double> scores, bool higher_is_better) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? scores[a] > scores[b] : scores[a] < scores[b];
  });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Positions i..j-1 are tied; 1-based average of (i+1)..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("rank vectors differ in length");
  if (a.size() < 2) throw InputError("rank correlation needs at least 2 entries");
}

bool has_ties(std::span<const double> v) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

template <typename Fn>
double paired(const RankMap& a, const RankMap& b, Fn&& statistic) {
  if (a.size() != b.size()) throw InputError("rank maps cover different systems");
  std::vector<double> va, vb;
  for (const auto& [system, rank] : a) {
    auto it = b.find(system);
    if (it == b.end()) throw InputError("system '" + system + "' missing from second ranking");
    va.push_back(rank);
    vb.push_back(it->second);
  }
  return statistic(std::span<const double>(va), std::span<const double>(vb));
}

}  // namespace

double spearman_rho(std::span<const double> ranks_a, std::span<const double> ranks_b) {
  check_pair(ranks_a, ranks_b);
  if (has_ties(ranks_a) || has_ties(ranks_b)) return pearson(ranks_a, ranks_b);
  const double n = static_cast<double>(ranks_a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < ranks_a.size(); ++i) {
    const double d = ranks_a[i] - ranks_b[i];
    d2 += d * d;
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  long long concordant = 0, discordant = 0, tied_a = 0, tied_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ++tied_a;
      } else if (db == 0.0) {
        ++tied_b;
      } else if ((da > 0.0) == (db > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  // tau-b denominator: sqrt((n0 - n1)(n0 - n2)) where pairs tied in both
  // vectors drop out of both factors.
  const double pairs_a = static_cast<double>(concordant + discordant + tied_b);
  const double pairs_b = static_cast<double>(concordant + discordant + tied_a);
  if (pairs_a == 0.0 || pairs_b == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(concordant - discordant) / std::sqrt(pairs_a * pairs_b);
}

double spearman(const RankMap& ranks_a, const RankMap& ranks_b) {
  return paired(ranks_a, ranks_b, spearman_rho);
}

double kendall(const RankMap& ranks_a, const RankMap& ranks_b) {
  return paired(ranks_a, ranks_b, kendall_tau_b);
}

}  // namespace shiftdiv
