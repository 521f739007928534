#pragma once

#include <stdexcept>
#include <string>

namespace netdid {

// Statistical failure: overlap violations, empty cells, non-convergence.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverlapError : public EstimationError {
 public:
  OverlapError(int d, int g, const std::string& detail)
      : EstimationError("overlap failure in cell (d=" + std::to_string(d) + ", g=" + std::to_string(g) +
                        "): " + detail),
        d_(d),
        g_(g) {}
  [[nodiscard]] int d() const { return d_; }
  [[nodiscard]] int g() const { return g_; }

 private:
  int d_;
  int g_;
};

}  // namespace netdid
