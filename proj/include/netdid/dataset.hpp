#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "netdid/graph.hpp"

namespace netdid {

class DataError : public std::runtime_error {
 public:
  enum class Kind { Io, Header, LengthMismatch, NonBinary, Missing, NonNumeric, BadNodeId, Invalid };

  DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(DataError::Kind k);

// Two-period panel observed on a network. ids[i] is the file identifier of
// dense node i.
struct PanelDataset {
  Graph graph;
  Eigen::MatrixXd X;  // n x p
  std::vector<int> D;
  Eigen::VectorXd y_pre;
  Eigen::VectorXd y_post;
  std::vector<std::string> ids;
  std::vector<std::string> covariate_names;

  [[nodiscard]] int n() const { return graph.num_nodes(); }
  // Throws DataError on any broken invariant. Missing ids/names are filled.
  void validate();
};

// Repeated cross-section: each unit is observed once, in wave t.
struct RcsDataset {
  Graph graph;
  Eigen::MatrixXd X;
  std::vector<int> D;
  std::vector<int> T;  // 0 = pre, 1 = post
  Eigen::VectorXd y;
  std::vector<std::string> ids;
  std::vector<std::string> covariate_names;

  [[nodiscard]] int n() const { return graph.num_nodes(); }
  void validate();
};

// Staggered adoption over periods 1..T. adopt_time[i] == kNever for units
// never treated in the window.
struct StaggeredPanel {
  static constexpr int kNever = 0;

  Graph graph;
  Eigen::MatrixXd X;
  std::vector<int> adopt_time;
  Eigen::MatrixXd Y;  // n x T
  std::vector<std::string> ids;
  std::vector<std::string> covariate_names;

  [[nodiscard]] int n() const { return graph.num_nodes(); }
  [[nodiscard]] int periods() const { return static_cast<int>(Y.cols()); }
  [[nodiscard]] bool treated_at(int i, int t) const {
    return adopt_time[i] != kNever && adopt_time[i] <= t;
  }
  void validate();
};

PanelDataset load_panel(const std::string& nodes_path, const std::string& edges_path);
void save_panel(const PanelDataset& d, const std::string& nodes_path, const std::string& edges_path);

RcsDataset load_rcs(const std::string& nodes_path, const std::string& edges_path);
void save_rcs(const RcsDataset& d, const std::string& nodes_path, const std::string& edges_path);

StaggeredPanel load_staggered(const std::string& nodes_path, const std::string& edges_path);
void save_staggered(const StaggeredPanel& d, const std::string& nodes_path, const std::string& edges_path);

Eigen::VectorXd delta_y(const PanelDataset& d);

}  // namespace netdid
