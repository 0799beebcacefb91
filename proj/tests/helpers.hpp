#pragma once

// Shared fixtures and independent oracles for the test suite.  Everything
// here is deliberately written against first principles (path enumeration,
// covariance algebra, textbook formulas) rather than reusing the library's
// own shortcuts, so the two implementations check each other.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fairlens/errors.hpp"
#include "fairlens/graph.hpp"
#include "fairlens/scm.hpp"

namespace fairlens::testing {

// Runs fn and reports which error code it raised, if any.
template <typename Fn>
std::optional<Errc> code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

struct EdgeDecl {
  std::string parent;
  std::string child;
  EdgeLabel label = EdgeLabel::Unknown;
};

inline GraphSpec make_spec(std::vector<std::string> nodes,
                           std::vector<EdgeDecl> edges,
                           std::optional<std::string> sensitive = std::nullopt,
                           std::optional<std::string> outcome = std::nullopt) {
  GraphSpec spec;
  spec.nodes = std::move(nodes);
  for (EdgeDecl& e : edges) {
    spec.edges.push_back({std::move(e.parent), std::move(e.child), e.label});
  }
  spec.sensitive = std::move(sensitive);
  spec.outcome = std::move(outcome);
  return spec;
}

// Random DAG over nodes V0..V{n-1}; an edge i -> j may exist only for i < j,
// so declaration order is already topological.
inline GraphSpec random_dag(std::mt19937_64& rng, int n, double edge_prob) {
  GraphSpec spec;
  for (int i = 0; i < n; ++i) spec.nodes.push_back("V" + std::to_string(i));
  std::bernoulli_distribution coin(edge_prob);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (coin(rng)) spec.edges.push_back({spec.nodes[i], spec.nodes[j], {}});
    }
  }
  return spec;
}

// Random linear-Gaussian mechanisms over an existing graph: coefficients
// with |c| in [0.5, 2] and random sign, noise_std in [0.5, 1.5].  Keeping
// magnitudes away from zero makes d-connection generically visible.
inline StructuralModel random_linear_model(std::mt19937_64& rng,
                                           const CausalGraph& g) {
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_real_distribution<double> sd(0.5, 1.5);
  std::uniform_real_distribution<double> icpt(-1.0, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::map<std::string, Mechanism> mechs;
  for (int v = 0; v < g.size(); ++v) {
    LinearGaussian lg;
    lg.intercept = icpt(rng);
    lg.noise_std = sd(rng);
    for (int p : g.parents(v)) {
      lg.coefficients[g.name(p)] = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    }
    mechs[g.name(v)] = lg;
  }
  return build_model(g, mechs);
}

// d-separation the slow way: every undirected path must be blocked.
inline bool brute_force_dsep(const CausalGraph& g, int x, int y,
                             const std::set<int>& z) {
  for (const Path& p : enumerate_paths(g, x, y)) {
    if (!is_blocked(g, p, z)) return false;
  }
  return true;
}

// Partial correlation of x and y given z from exact moments, via the Schur
// complement of the conditioning block.  nullopt when a conditional
// variance degenerates.
inline std::optional<double> partial_correlation(const Moments& mom, int x,
                                                 int y,
                                                 const std::set<int>& z) {
  const Eigen::MatrixXd& S = mom.cov;
  Eigen::Matrix2d sxy;
  sxy << S(x, x), S(x, y), S(y, x), S(y, y);
  if (!z.empty()) {
    const std::vector<int> zi(z.begin(), z.end());
    const int k = static_cast<int>(zi.size());
    Eigen::MatrixXd szz(k, k);
    Eigen::MatrixXd sxz(2, k);
    for (int i = 0; i < k; ++i) {
      sxz(0, i) = S(x, zi[static_cast<size_t>(i)]);
      sxz(1, i) = S(y, zi[static_cast<size_t>(i)]);
      for (int j = 0; j < k; ++j) {
        szz(i, j) = S(zi[static_cast<size_t>(i)], zi[static_cast<size_t>(j)]);
      }
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(szz);
    if (!lu.isInvertible()) return std::nullopt;
    sxy -= sxz * lu.solve(sxz.transpose());
  }
  if (sxy(0, 0) < 1e-12 || sxy(1, 1) < 1e-12) return std::nullopt;
  return sxy(0, 1) / std::sqrt(sxy(0, 0) * sxy(1, 1));
}

// Total causal effect in a linear model: sum over directed paths of the
// products of edge coefficients (Wright's rule).
inline double linear_total_effect(const StructuralModel& m, int a, int y) {
  const CausalGraph& g = m.graph();
  double total = 0.0;
  for (const Path& p : enumerate_causal_paths(g, a, y)) {
    double prod = 1.0;
    for (size_t i = 0; i + 1 < p.nodes.size(); ++i) {
      const int child = p.nodes[i + 1];
      const auto* lg = std::get_if<LinearGaussian>(&m.mechanism(child));
      const auto* bl = std::get_if<BernoulliLogistic>(&m.mechanism(child));
      const std::string& parent = g.name(p.nodes[i]);
      if (lg) {
        prod *= lg->coefficients.at(parent);
      } else if (bl) {
        prod *= bl->coefficients.at(parent);
      } else {
        fail(Errc::UnsupportedMechanism, "path oracle needs linear edges");
      }
    }
    total += prod;
  }
  return total;
}

inline Record row_record(const Dataset& d, size_t row) {
  Record rec;
  for (size_t c = 0; c < d.columns.size(); ++c) {
    rec[d.columns[c]] = d.rows[row][c];
  }
  return rec;
}

inline double column_mean(const Dataset& d, const std::string& col) {
  const size_t c = static_cast<size_t>(d.column(col));
  double sum = 0.0;
  for (const auto& row : d.rows) sum += row[c];
  return sum / static_cast<double>(d.rows.size());
}

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Kolmogorov-Smirnov statistic against N(mean, sd^2).
inline double ks_vs_normal(std::vector<double> samples, double mean = 0.0,
                           double sd = 1.0) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = standard_normal_cdf((samples[i] - mean) / sd);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    worst = std::max({worst, std::abs(f - lo), std::abs(f - hi)});
  }
  return worst;
}

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace fairlens::testing
