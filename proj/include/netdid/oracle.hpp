#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace netdid {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Population tables over finite supports of X, G and U. A spec without a
// neighborhood covariate has a single U level. Indices: d in {0,1}, g over
// g_levels, u over U levels, x over x_weight.
struct DiscreteSpec {
  std::vector<double> x_weight;  // analysis weight of each x value, sums to 1
  std::vector<int> g_levels;
  int n_u = 1;
  std::vector<std::vector<std::vector<std::vector<double>>>> mean;  // E[dY | D=d, G=g, U=u, x]: [d][g][u][x]
  std::vector<std::vector<std::vector<double>>> p_g;                // P(G=g | D=d, x): [d][g][x]
  std::vector<std::vector<std::vector<std::vector<double>>>> p_u;   // P(U=u | D=d, G=g, x): [d][g][u][x]

  [[nodiscard]] int n_x() const { return static_cast<int>(x_weight.size()); }
  [[nodiscard]] int n_g() const { return static_cast<int>(g_levels.size()); }
  // Throws SpecError on shape errors or probability tables that are negative
  // or do not sum to 1 (tolerance 1e-9).
  void validate() const;
};

// tau_obs - tau_DATT straight from the definitions: the naive contrast of
// outcome changes by own treatment minus the exposure-matched direct effect.
double direct_bias(const DiscreteSpec& s);

// Bias formula for treatment interference only (single U level). Reference
// level g' is the first support element.
double prop1_bias(const DiscreteSpec& s);
double prop1_bias(const DiscreteSpec& s, int ref_g);

// Bias formula with neighborhood covariates. With assume_dg_independent the
// formula marginalized over G is used; that requires P(G | D=1, x) =
// P(G | D=0, x) and P(U | D, G, x) free of G, and throws SpecError otherwise.
double prop2_bias(const DiscreteSpec& s, bool assume_dg_independent);
double prop2_bias(const DiscreteSpec& s, bool assume_dg_independent, int ref_g, int ref_u);

struct RandomSpecOptions {
  int n_x = 3;
  int n_g = 3;
  int n_u = 1;
  bool dg_independent = false;  // also makes U independent of G given (D, x)
  double dirichlet_alpha = 1.0;
};

// Dirichlet probability tables and U(-1, 1) mean tables.
DiscreteSpec random_spec(std::mt19937_64& rng, const RandomSpecOptions& opt);

std::string spec_to_json(const DiscreteSpec& s);
DiscreteSpec spec_from_json(const std::string& text);

}  // namespace netdid
