#include "causalkit/sem.hpp"

#include <cmath>
#include <utility>

#include "causalkit/errors.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {
namespace {

void validate_noise(const NoiseSpec& ns) {
  switch (ns.kind) {
    case NoiseSpec::Kind::kNormal:
      if (!(ns.b >= 0)) fail(ErrorCode::kArgument, "sd must be >= 0");
      break;
    case NoiseSpec::Kind::kBernoulli:
      if (!(ns.a >= 0 && ns.a <= 1)) {
        fail(ErrorCode::kArgument, "success probability must lie in [0, 1]");
      }
      break;
    case NoiseSpec::Kind::kUniform:
      if (!(ns.a <= ns.b)) {
        fail(ErrorCode::kArgument, "uniform bounds must satisfy lo <= hi");
      }
      break;
  }
}

double draw_noise(const NoiseSpec& ns, std::uint64_t seed, std::uint64_t row,
                  std::uint64_t node) {
  switch (ns.kind) {
    case NoiseSpec::Kind::kNormal:
      return ns.a + ns.b * keyed_normal(seed, row, node, 0);
    case NoiseSpec::Kind::kBernoulli:
      return keyed_uniform(seed, row, node, 0) < ns.a ? 1.0 : 0.0;
    case NoiseSpec::Kind::kUniform:
      return ns.a + (ns.b - ns.a) * keyed_uniform(seed, row, node, 0);
  }
  fail(ErrorCode::kArgument, "unknown noise kind");
}

// Reads scenario parameters, tracking which names were consumed so leftovers
// can be rejected.
class Params {
 public:
  explicit Params(std::map<std::string, double> values)
      : values_(std::move(values)) {}

  double take(const std::string& name, double fallback) {
    const auto it = values_.find(name);
    if (it == values_.end()) return fallback;
    const double v = it->second;
    values_.erase(it);
    return v;
  }

  int take_int(const std::string& name, int fallback) {
    const double v = take(name, fallback);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      fail(ErrorCode::kArgument, "parameter " + name + " must be an integer");
    }
    return i;
  }

  void finish() const {
    if (!values_.empty()) {
      fail(ErrorCode::kArgument,
           "unknown scenario parameter: " + values_.begin()->first);
    }
  }

 private:
  std::map<std::string, double> values_;
};

Scenario smoking_bias_scenario(Params& params) {
  const double rho = params.take("rho", -0.5);
  const double eta1 = params.take("eta1", 0.0);
  if (!(rho >= -1 && rho <= 1)) {
    fail(ErrorCode::kArgument, "rho must lie in [-1, 1]");
  }
  Scenario sc;
  sc.name = "smoking_bias";
  sc.model.add_node("U", Equation::linear(0, {}));
  sc.model.add_node(
      "D", Equation::threshold(0, {{"U", rho}}, std::sqrt(1 - rho * rho)));
  sc.model.add_node("Y", Equation::linear(0, {{"U", 1}, {"D", eta1}}, 0));
  sc.treatment = "D";
  sc.outcome = "Y";
  return sc;
}

Scenario heart_transplant_scenario(Params& params) {
  const double q = params.take("q", 0.6);
  if (!(q > 0 && q < 1)) {
    fail(ErrorCode::kArgument, "q must lie strictly inside (0, 1)");
  }
  Scenario sc;
  sc.name = "heart_transplant";
  sc.model.add_node("L", Equation::linear(0, {}), NoiseSpec::bernoulli(q));
  sc.model.add_node("A", Equation::threshold(0.5, {{"L", 0.25}}, -1),
                    NoiseSpec::uniform(0, 1));
  sc.model.add_node("Y", Equation::threshold(0.25, {{"L", 5.0 / 12.0}}, -1),
                    NoiseSpec::uniform(0, 1));
  sc.treatment = "A";
  sc.outcome = "Y";
  sc.covariates = {"L"};
  return sc;
}

Scenario growth_highdim_scenario(Params& params) {
  const double alpha = params.take("alpha", -0.045);
  const int p = params.take_int("p", 60);
  const int s = params.take_int("s", 5);
  const double noise_y = params.take("noise_y", 0.17);
  const double noise_d = params.take("noise_d", 1.0);
  const double rho_w = params.take("rho_w", 0.5);
  if (p < 1) fail(ErrorCode::kArgument, "p must be >= 1");
  if (s < 1 || s > p) fail(ErrorCode::kArgument, "s must lie in [1, p]");
  if (!(rho_w > -1 && rho_w < 1)) {
    fail(ErrorCode::kArgument, "rho_w must lie strictly inside (-1, 1)");
  }
  if (!(noise_y >= 0) || !(noise_d >= 0)) {
    fail(ErrorCode::kArgument, "noise scales must be >= 0");
  }

  Scenario sc;
  sc.name = "growth_highdim";
  const double innovation = std::sqrt(1 - rho_w * rho_w);
  for (int j = 1; j <= p; ++j) {
    const std::string name = "W" + std::to_string(j);
    if (j == 1) {
      sc.model.add_node(name, Equation::linear(0, {}));
    } else {
      sc.model.add_node(
          name, Equation::linear(
                    0, {{"W" + std::to_string(j - 1), rho_w}}, innovation));
    }
    sc.covariates.push_back(name);
  }
  std::map<std::string, double> d_coef, y_coef;
  for (int j = 1; j <= s; ++j) {
    d_coef["W" + std::to_string(j)] = 0.6;
    y_coef["W" + std::to_string(j)] = 0.8;
  }
  sc.model.add_node("D", Equation::linear(0, std::move(d_coef), noise_d));
  y_coef["D"] = alpha;
  sc.model.add_node("Y", Equation::linear(0, std::move(y_coef), noise_y));
  sc.treatment = "D";
  sc.outcome = "Y";
  return sc;
}

}  // namespace

NoiseSpec NoiseSpec::normal(double mean, double sd) {
  NoiseSpec ns{Kind::kNormal, mean, sd};
  validate_noise(ns);
  return ns;
}

NoiseSpec NoiseSpec::bernoulli(double p) {
  NoiseSpec ns{Kind::kBernoulli, p, 0};
  validate_noise(ns);
  return ns;
}

NoiseSpec NoiseSpec::uniform(double lo, double hi) {
  NoiseSpec ns{Kind::kUniform, lo, hi};
  validate_noise(ns);
  return ns;
}

Equation Equation::constant(double value) {
  Equation eq;
  eq.intercept = value;
  eq.noise_scale = 0;
  return eq;
}

Equation Equation::linear(double intercept, std::map<std::string, double> coef,
                          double noise_scale) {
  Equation eq;
  eq.intercept = intercept;
  eq.coef = std::move(coef);
  eq.noise_scale = noise_scale;
  return eq;
}

Equation Equation::threshold(double intercept,
                             std::map<std::string, double> coef,
                             double noise_scale) {
  Equation eq;
  eq.kind = Kind::kThreshold;
  eq.intercept = intercept;
  eq.coef = std::move(coef);
  eq.noise_scale = noise_scale;
  return eq;
}

void StructuralModel::add_node(const std::string& name, Equation eq,
                               NoiseSpec noise) {
  if (!valid_node_name(name)) {
    fail(ErrorCode::kArgument, "invalid node name: '" + name + "'");
  }
  if (has_node(name)) {
    fail(ErrorCode::kArgument, "duplicate node: " + name);
  }
  for (const auto& [parent, weight] : eq.coef) {
    (void)weight;
    if (!has_node(parent)) {
      fail(ErrorCode::kName,
           "parent '" + parent + "' of '" + name + "' is not declared yet");
    }
  }
  validate_noise(noise);
  nodes_.push_back(Node{name, std::move(eq), noise});
  names_.push_back(name);
}

bool StructuralModel::has_node(const std::string& name) const {
  for (const auto& node : nodes_) {
    if (node.name == name) return true;
  }
  return false;
}

int StructuralModel::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  fail(ErrorCode::kName, "no such node: " + name);
}

const Equation& StructuralModel::equation_of(const std::string& name) const {
  return nodes_[index_of(name)].eq;
}

const NoiseSpec& StructuralModel::noise_of(const std::string& name) const {
  return nodes_[index_of(name)].noise;
}

Dag StructuralModel::graph() const {
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& node : nodes_) {
    for (const auto& [parent, weight] : node.eq.coef) {
      (void)weight;
      edges.emplace_back(parent, node.name);
    }
  }
  return Dag(names_, edges);
}

Dataset StructuralModel::simulate(int n, std::uint64_t seed) const {
  if (n < 1) fail(ErrorCode::kArgument, "need at least one row");
  if (nodes_.empty()) fail(ErrorCode::kArgument, "model has no nodes");

  // Resolve parent names to positions once.
  std::vector<std::vector<std::pair<int, double>>> terms(nodes_.size());
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    for (const auto& [parent, weight] : nodes_[j].eq.coef) {
      terms[j].emplace_back(index_of(parent), weight);
    }
  }

  std::vector<std::vector<double>> data(nodes_.size(),
                                        std::vector<double>(n));
  std::vector<double> row(nodes_.size());
  for (int r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const Equation& eq = nodes_[j].eq;
      double sum = eq.intercept;
      for (const auto& [pi, w] : terms[j]) sum += w * row[pi];
      if (eq.kind == Equation::Kind::kProduct) {
        double prod = 1;
        for (const auto& [pi, w] : terms[j]) {
          (void)w;
          prod *= row[pi];
        }
        sum += eq.product_weight * prod;
      }
      if (eq.noise_scale != 0) {
        sum += eq.noise_scale *
               draw_noise(nodes_[j].noise, seed, static_cast<std::uint64_t>(r),
                          static_cast<std::uint64_t>(j));
      }
      const double value =
          eq.kind == Equation::Kind::kThreshold ? (sum > 0 ? 1.0 : 0.0) : sum;
      row[j] = value;
      data[j][r] = value;
    }
  }
  return Dataset(names_, std::move(data));
}

StructuralModel StructuralModel::intervene(const std::string& node,
                                           double value) const {
  StructuralModel out = *this;
  out.nodes_[index_of(node)].eq = Equation::constant(value);
  return out;
}

CounterfactualDraws counterfactual_pairs(const StructuralModel& model,
                                         const std::string& treatment,
                                         const std::string& outcome, int n,
                                         std::uint64_t seed) {
  if (!model.has_node(outcome)) {
    fail(ErrorCode::kName, "no such node: " + outcome);
  }
  const Dataset natural = model.simulate(n, seed);
  const Dataset under0 = model.intervene(treatment, 0).simulate(n, seed);
  const Dataset under1 = model.intervene(treatment, 1).simulate(n, seed);
  CounterfactualDraws cf;
  cf.y0 = under0.column(outcome);
  cf.y1 = under1.column(outcome);
  cf.natural = natural.column(treatment);
  return cf;
}

Scenario make_scenario(const std::string& name,
                       const std::map<std::string, double>& params) {
  Params reader(params);
  Scenario sc;
  if (name == "smoking_bias") {
    sc = smoking_bias_scenario(reader);
  } else if (name == "heart_transplant") {
    sc = heart_transplant_scenario(reader);
  } else if (name == "growth_highdim") {
    sc = growth_highdim_scenario(reader);
  } else {
    fail(ErrorCode::kName, "unknown scenario: " + name);
  }
  reader.finish();
  return sc;
}

}  // namespace causalkit
