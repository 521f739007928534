#include "netdid/oracle.hpp"

#include <cmath>
#include <json.hpp>

namespace netdid {

using json = nlohmann::json;

void DiscreteSpec::validate() const {
  const int nx = n_x(), ng = n_g();
  if (nx < 1 || ng < 1 || n_u < 1) throw SpecError("spec: empty support");
  auto fail = [](const std::string& m) { throw SpecError("spec: " + m); };
  double wsum = 0;
  for (double w : x_weight) {
    if (!(w >= 0) || !std::isfinite(w)) fail("negative or non-finite x weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) fail("x weights do not sum to 1");
  if (mean.size() != 2 || p_g.size() != 2 || p_u.size() != 2) fail("tables must have two treatment arms");
  for (int d = 0; d < 2; ++d) {
    if (static_cast<int>(mean[d].size()) != ng || static_cast<int>(p_g[d].size()) != ng ||
        static_cast<int>(p_u[d].size()) != ng) {
      fail("tables must have one entry per exposure level");
    }
    for (int x = 0; x < nx; ++x) {
      double sg = 0;
      for (int g = 0; g < ng; ++g) {
        if (static_cast<int>(p_g[d][g].size()) != nx) fail("P(G|D,x) has the wrong x dimension");
        const double p = p_g[d][g][x];
        if (!(p >= 0) || !std::isfinite(p)) fail("negative probability in P(G|D,x)");
        sg += p;
        if (static_cast<int>(mean[d][g].size()) != n_u || static_cast<int>(p_u[d][g].size()) != n_u) {
          fail("tables must have one entry per U level");
        }
        double su = 0;
        for (int u = 0; u < n_u; ++u) {
          if (static_cast<int>(mean[d][g][u].size()) != nx || static_cast<int>(p_u[d][g][u].size()) != nx) {
            fail("tables have the wrong x dimension");
          }
          if (!std::isfinite(mean[d][g][u][x])) fail("non-finite mean");
          const double q = p_u[d][g][u][x];
          if (!(q >= 0) || !std::isfinite(q)) fail("negative probability in P(U|D,G,x)");
          su += q;
        }
        if (std::abs(su - 1.0) > 1e-9) fail("P(U|D,G,x) does not sum to 1");
      }
      if (std::abs(sg - 1.0) > 1e-9) fail("P(G|D,x) does not sum to 1");
    }
  }
}

double direct_bias(const DiscreteSpec& s) {
  s.validate();
  double total = 0;
  for (int x = 0; x < s.n_x(); ++x) {
    double obs = 0, datt = 0;
    for (int g = 0; g < s.n_g(); ++g) {
      for (int u = 0; u < s.n_u; ++u) {
        const double w1 = s.p_u[1][g][u][x] * s.p_g[1][g][x];
        const double w0 = s.p_u[0][g][u][x] * s.p_g[0][g][x];
        obs += s.mean[1][g][u][x] * w1 - s.mean[0][g][u][x] * w0;
        datt += (s.mean[1][g][u][x] - s.mean[0][g][u][x]) * w1;
      }
    }
    total += s.x_weight[x] * (obs - datt);
  }
  return total;
}

double prop1_bias(const DiscreteSpec& s) { return prop1_bias(s, 0); }

double prop1_bias(const DiscreteSpec& s, int ref_g) {
  s.validate();
  if (s.n_u != 1) throw SpecError("prop1_bias: spec has neighborhood covariates; use prop2_bias");
  if (ref_g < 0 || ref_g >= s.n_g()) throw SpecError("prop1_bias: reference level out of range");
  double total = 0;
  for (int x = 0; x < s.n_x(); ++x) {
    double inner = 0;
    for (int g = 0; g < s.n_g(); ++g) {
      const double dm = s.mean[0][g][0][x] - s.mean[0][ref_g][0][x];
      inner += dm * (s.p_g[1][g][x] - s.p_g[0][g][x]);
    }
    total += s.x_weight[x] * inner;
  }
  return total;
}

double prop2_bias(const DiscreteSpec& s, bool assume_dg_independent) {
  return prop2_bias(s, assume_dg_independent, 0, 0);
}

double prop2_bias(const DiscreteSpec& s, bool assume_dg_independent, int ref_g, int ref_u) {
  s.validate();
  if (ref_g < 0 || ref_g >= s.n_g() || ref_u < 0 || ref_u >= s.n_u) {
    throw SpecError("prop2_bias: reference level out of range");
  }
  double total = 0;
  if (!assume_dg_independent) {
    for (int x = 0; x < s.n_x(); ++x) {
      double inner = 0;
      const double base = s.mean[0][ref_g][ref_u][x];
      for (int g = 0; g < s.n_g(); ++g)
        for (int u = 0; u < s.n_u; ++u) {
          const double w = s.p_u[1][g][u][x] * s.p_g[1][g][x] - s.p_u[0][g][u][x] * s.p_g[0][g][x];
          inner += (s.mean[0][g][u][x] - base) * w;
        }
      total += s.x_weight[x] * inner;
    }
    return total;
  }
  constexpr double tol = 1e-12;
  for (int x = 0; x < s.n_x(); ++x)
    for (int g = 0; g < s.n_g(); ++g) {
      if (std::abs(s.p_g[1][g][x] - s.p_g[0][g][x]) > tol) {
        throw SpecError("prop2_bias: D and G are not conditionally independent given x");
      }
      for (int d = 0; d < 2; ++d)
        for (int u = 0; u < s.n_u; ++u)
          if (std::abs(s.p_u[d][g][u][x] - s.p_u[d][0][u][x]) > tol) {
            throw SpecError("prop2_bias: P(U | D, G, x) depends on G");
          }
    }
  for (int x = 0; x < s.n_x(); ++x) {
    // E[dY | D=0, U=u, x] and P(U=u | D=d, x) after summing out G.
    std::vector<double> m0(s.n_u, 0.0), pu1(s.n_u, 0.0), pu0(s.n_u, 0.0);
    for (int u = 0; u < s.n_u; ++u)
      for (int g = 0; g < s.n_g(); ++g) {
        m0[u] += s.mean[0][g][u][x] * s.p_g[0][g][x];
        pu1[u] += s.p_u[1][g][u][x] * s.p_g[1][g][x];
        pu0[u] += s.p_u[0][g][u][x] * s.p_g[0][g][x];
      }
    double inner = 0;
    for (int u = 0; u < s.n_u; ++u) inner += (m0[u] - m0[ref_u]) * (pu1[u] - pu0[u]);
    total += s.x_weight[x] * inner;
  }
  return total;
}

namespace {

std::vector<double> dirichlet(std::mt19937_64& rng, int k, double alpha) {
  std::gamma_distribution<double> gam(alpha, 1.0);
  std::vector<double> v(k);
  double s = 0;
  for (auto& e : v) {
    e = gam(rng);
    s += e;
  }
  for (auto& e : v) e /= s;
  return v;
}

}  // namespace

DiscreteSpec random_spec(std::mt19937_64& rng, const RandomSpecOptions& opt) {
  DiscreteSpec s;
  const int nx = opt.n_x, ng = opt.n_g, nu = opt.n_u;
  s.x_weight = dirichlet(rng, nx, opt.dirichlet_alpha);
  s.g_levels.resize(ng);
  for (int g = 0; g < ng; ++g) s.g_levels[g] = g;
  s.n_u = nu;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  s.mean.assign(2, std::vector(ng, std::vector(nu, std::vector<double>(nx))));
  s.p_g.assign(2, std::vector(ng, std::vector<double>(nx)));
  s.p_u.assign(2, std::vector(ng, std::vector(nu, std::vector<double>(nx))));
  for (int d = 0; d < 2; ++d)
    for (int g = 0; g < ng; ++g)
      for (int u = 0; u < nu; ++u)
        for (int x = 0; x < nx; ++x) s.mean[d][g][u][x] = unif(rng);
  for (int x = 0; x < nx; ++x) {
    for (int d = 0; d < 2; ++d) {
      const auto pg = opt.dg_independent && d == 1 ? std::vector<double>() : dirichlet(rng, ng, opt.dirichlet_alpha);
      for (int g = 0; g < ng; ++g) s.p_g[d][g][x] = opt.dg_independent && d == 1 ? s.p_g[0][g][x] : pg[g];
      std::vector<double> shared;
      if (opt.dg_independent) shared = dirichlet(rng, nu, opt.dirichlet_alpha);
      for (int g = 0; g < ng; ++g) {
        const auto pu = opt.dg_independent ? shared : dirichlet(rng, nu, opt.dirichlet_alpha);
        for (int u = 0; u < nu; ++u) s.p_u[d][g][u][x] = pu[u];
      }
    }
  }
  return s;
}

std::string spec_to_json(const DiscreteSpec& s) {
  json j;
  j["x_weight"] = s.x_weight;
  j["g_levels"] = s.g_levels;
  j["n_u"] = s.n_u;
  j["mean"] = s.mean;
  j["p_g"] = s.p_g;
  j["p_u"] = s.p_u;
  return j.dump(2);
}

DiscreteSpec spec_from_json(const std::string& text) {
  DiscreteSpec s;
  try {
    const auto j = json::parse(text);
    j.at("x_weight").get_to(s.x_weight);
    j.at("g_levels").get_to(s.g_levels);
    j.at("n_u").get_to(s.n_u);
    j.at("mean").get_to(s.mean);
    j.at("p_g").get_to(s.p_g);
    j.at("p_u").get_to(s.p_u);
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec json: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace netdid
