#pragma once

#include <cstdint>
#include <span>

#include "netdid/graph.hpp"

namespace netdid {

struct BandwidthChoice {
  int B = 1;
  double avg_path_length = 0.0;
  double avg_degree = 0.0;
  double threshold = 0.0;  // 2 log n / log avg_degree; +inf when avg_degree <= 1
  bool linear_branch = false;  // true: ceil(L / (2 + gamma)); false: ceil(L^(1/(2+gamma)))
  double gamma = 1.0;
};

// Bandwidth from precomputed graph statistics.
BandwidthChoice bandwidth_rule(double avg_path_length, double avg_degree, int n, double gamma);
BandwidthChoice bandwidth(const Graph& g, double gamma = 1.0, int jobs = 1);

struct HacResult {
  double value = 0.0;
  std::uint64_t pairs = 0;  // ordered (i, j) pairs within distance B, i == j included
};

// (1/m) sum_i sum_j (s_i - s_bar)(s_j - s_bar) 1{dist(i, j) <= B} over the
// analysis set `members`; scores[k] belongs to the k-th member. Distances
// are taken in the full graph.
HacResult hac_variance(std::span<const double> scores, const NodeSet& members, const Graph& g, int B, int jobs = 1);

// (1/m) sum_i (s_i - s_bar)^2.
double iid_variance(std::span<const double> scores);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// estimate -/+ z_{(1+level)/2} sqrt(variance / m). Throws on negative variance.
Interval confidence_interval(double estimate, double variance, std::size_t m, double level = 0.95);

double normal_quantile(double p);

}  // namespace netdid
