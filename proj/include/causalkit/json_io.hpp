#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "causalkit/dag.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/estimators.hpp"
#include "causalkit/highdim.hpp"
#include "causalkit/propensity.hpp"

namespace causalkit {

inline constexpr const char* kJsonSchema = "causal-kit/1";

// Serialization with deterministic bytes: object keys in sorted order
// (nlohmann's default map), two-space indentation, and every finite double
// printed with 17 significant digits so a reader recovers the exact bits.
// Non-finite doubles become null.  A trailing newline is appended.
std::string dump_json(const nlohmann::json& value);

// One-line machine-readable payload for stderr:
// {"error":{"code":"POSITIVITY","message":...},"schema":"causal-kit/1"}
std::string error_json(const Error& err);

nlohmann::json effect_json(const EffectReport& report);
nlohmann::json risk_json(const RiskMeasures& measures);
nlohmann::json standardized_json(const StandardizedContrast& contrast);
nlohmann::json cate_json(const CateReport& report);
nlohmann::json propensity_json(const PropensityModel& model,
                               const std::vector<std::string>& covariates);
nlohmann::json balance_json(const BalanceReport& report);
nlohmann::json bootstrap_json(const BootstrapResult& result);

// covariates supplies names for the selected-control index lists.
nlohmann::json dml_json(const DmlReport& report,
                        const std::vector<std::string>& covariates);
nlohmann::json ortho_json(const OrthogonalityReport& report);

nlohmann::json backdoor_json(const BackdoorCheck& check);
nlohmann::json swig_json(const Swig& swig);

}  // namespace causalkit
