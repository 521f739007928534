#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "netdid/graph.hpp"

namespace netdid {

enum class ExposureKind { Any, Count };

struct ExposureMap {
  ExposureKind kind = ExposureKind::Any;
  int cap = 3;  // COUNT only; counts >= cap are pooled into level cap

  [[nodiscard]] int level(const Graph& g, std::span<const int> D, int i) const;
  [[nodiscard]] std::vector<int> levels() const;
};

ExposureKind parse_exposure_kind(const std::string& s);
std::string to_string(ExposureKind k);

struct ExposureVector {
  std::vector<int> G;
  std::vector<int> levels;  // configured support, ascending
};

int exposure_count(const Graph& g, std::span<const int> D, int i);
int exposure_any(const Graph& g, std::span<const int> D, int i);
ExposureVector compute_exposure(const Graph& g, std::span<const int> D, const ExposureMap& map);

// Row i is the mean of X over the neighbors of i; zero for isolated nodes.
Eigen::VectorXd neighbor_mean_covariates(const Graph& g, const Eigen::MatrixXd& X, int i);
Eigen::MatrixXd neighbor_means(const Graph& g, const Eigen::MatrixXd& X);

int isolated_count(const Graph& g);

}  // namespace netdid
