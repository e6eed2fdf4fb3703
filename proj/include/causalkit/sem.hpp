#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "causalkit/dag.hpp"
#include "causalkit/dataset.hpp"

namespace causalkit {

// Exogenous noise attached to one structural equation.
struct NoiseSpec {
  enum class Kind { kNormal, kBernoulli, kUniform };
  Kind kind = Kind::kNormal;
  double a = 0;  // mean / success probability / lower bound
  double b = 1;  // standard deviation / (unused) / upper bound

  static NoiseSpec normal(double mean, double sd);
  static NoiseSpec bernoulli(double p);
  static NoiseSpec uniform(double lo, double hi);
};

// value = f(intercept + sum coef[p] * parent_p [+ product_weight * prod
// parents], noise_scale * eps).  kLinear adds the noise; kThreshold returns
// the indicator that the noisy sum is positive; kProduct is kLinear plus the
// product term over every parent listed in coef.
struct Equation {
  enum class Kind { kLinear, kThreshold, kProduct };
  Kind kind = Kind::kLinear;
  double intercept = 0;
  std::map<std::string, double> coef;  // keyed by parent node name
  double noise_scale = 1;
  double product_weight = 0;  // kProduct only

  static Equation constant(double value);
  static Equation linear(double intercept, std::map<std::string, double> coef,
                         double noise_scale = 1);
  static Equation threshold(double intercept,
                            std::map<std::string, double> coef,
                            double noise_scale = 1);
};

// A set of structural equations over named nodes.  Parents must be declared
// before the nodes that use them, so the declaration order is a topological
// order and the implied graph is acyclic by construction.
class StructuralModel {
 public:
  void add_node(const std::string& name, Equation eq,
                NoiseSpec noise = NoiseSpec::normal(0, 1));

  int size() const { return static_cast<int>(nodes_.size()); }
  bool has_node(const std::string& name) const;
  const std::vector<std::string>& node_names() const { return names_; }
  const Equation& equation_of(const std::string& name) const;
  const NoiseSpec& noise_of(const std::string& name) const;
  Dag graph() const;

  // n rows, one column per node in declaration order.  Noise draws are keyed
  // by (seed, row, node position), so two models sharing a node layout see
  // identical noises for the same seed.
  Dataset simulate(int n, std::uint64_t seed) const;

  // Copy of the model with the node's equation replaced by the constant
  // value.  The node keeps its position, so downstream noises are unchanged.
  StructuralModel intervene(const std::string& node, double value) const;

 private:
  struct Node {
    std::string name;
    Equation eq;
    NoiseSpec noise;
  };
  int index_of(const std::string& name) const;
  std::vector<Node> nodes_;
  std::vector<std::string> names_;
};

// Outcome of simulating the same exogenous draws under treatment 0, under
// treatment 1, and untouched (natural holds the treatment node's values).
struct CounterfactualDraws {
  std::vector<double> y0;
  std::vector<double> y1;
  std::vector<double> natural;
};

CounterfactualDraws counterfactual_pairs(const StructuralModel& model,
                                         const std::string& treatment,
                                         const std::string& outcome, int n,
                                         std::uint64_t seed);

// A ready-made model plus the roles an analyst would assign to its columns.
struct Scenario {
  std::string name;
  StructuralModel model;
  std::string treatment;
  std::string outcome;
  std::vector<std::string> covariates;
};

// Built-in scenarios: "smoking_bias" (rho, eta1), "heart_transplant" (q),
// "growth_highdim" (alpha, p, s, noise_y, noise_d, rho_w).  params overrides
// the defaults; unknown names are rejected.
Scenario make_scenario(const std::string& name,
                       const std::map<std::string, double>& params = {});

}  // namespace causalkit
