#include "netdid/variance.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netdid/parallel.hpp"

namespace netdid {

BandwidthChoice bandwidth_rule(double avg_path_length, double avg_degree, int n, double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("bandwidth: gamma must be positive");
  BandwidthChoice b;
  b.avg_path_length = avg_path_length;
  b.avg_degree = avg_degree;
  b.gamma = gamma;
  b.threshold = avg_degree > 1.0 ? 2.0 * std::log(static_cast<double>(n)) / std::log(avg_degree)
                                 : std::numeric_limits<double>::infinity();
  b.linear_branch = avg_degree > 1.0 && avg_path_length < b.threshold;
  const double raw = b.linear_branch ? avg_path_length / (2.0 + gamma) : std::pow(avg_path_length, 1.0 / (2.0 + gamma));
  b.B = std::max(1, static_cast<int>(std::ceil(raw)));
  return b;
}

BandwidthChoice bandwidth(const Graph& g, double gamma, int jobs) {
  return bandwidth_rule(average_path_length(g, jobs), average_degree(g), g.num_nodes(), gamma);
}

namespace {

std::vector<double> demeaned(std::span<const double> scores) {
  if (scores.size() < 2) throw std::invalid_argument("variance: need at least 2 scores");
  double mean = 0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  std::vector<double> c(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) c[k] = scores[k] - mean;
  return c;
}

}  // namespace

double iid_variance(std::span<const double> scores) {
  const auto c = demeaned(scores);
  double total = 0;
  for (double v : c) total += v * v;
  return total / static_cast<double>(c.size());
}

HacResult hac_variance(std::span<const double> scores, const NodeSet& members, const Graph& g, int B, int jobs) {
  if (scores.size() != members.size()) throw std::invalid_argument("hac_variance: scores and members differ in size");
  if (B < 0) throw std::invalid_argument("hac_variance: negative bandwidth");
  const auto c = demeaned(scores);
  const int n = g.num_nodes();
  std::vector<int> slot(n, -1);
  const auto nodes = members.nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] < 0 || nodes[k] >= n) throw std::invalid_argument("hac_variance: member out of range");
    slot[nodes[k]] = static_cast<int>(k);
  }
  const std::size_t m = nodes.size();
  std::vector<double> row(m);
  std::vector<std::uint64_t> count(m);
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(m)));
  const std::size_t chunk = (m + workers - 1) / workers;
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    BfsWorkspace ws(n);
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(m, begin + chunk);
    for (std::size_t k = begin; k < end; ++k) {
      double inner = 0;
      std::uint64_t pairs = 0;
      ws.run(g, nodes[k], B, [&](int v, int) {
        if (slot[v] >= 0) {
          inner += c[slot[v]];
          ++pairs;
        }
      });
      row[k] = c[k] * inner;
      count[k] = pairs;
    }
  });
  HacResult out;
  double total = 0;
  for (std::size_t k = 0; k < m; ++k) {
    total += row[k];
    out.pairs += count[k];
  }
  out.value = total / static_cast<double>(m);
  return out;
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

Interval confidence_interval(double estimate, double variance, std::size_t m, double level) {
  if (variance < 0) throw std::invalid_argument("confidence_interval: negative variance");
  if (!(level > 0 && level < 1)) throw std::invalid_argument("confidence_interval: level must be in (0, 1)");
  if (m == 0) throw std::invalid_argument("confidence_interval: m must be positive");
  const double half = normal_quantile(0.5 + level / 2.0) * std::sqrt(variance / static_cast<double>(m));
  return {estimate - half, estimate + half};
}

}  // namespace netdid
