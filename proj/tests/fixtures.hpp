#pragma once

#include "srkweak/tableau.hpp"

#include <json.hpp>

#include <string>

namespace testsupport {

/// Two-stage tableau with zero diffusion weights over the two-point model.
/// With `diagonal` set, stage two depends on itself.
inline std::string deterministic_scheme_json(const std::string& a21, const std::string& alpha1,
                                             const std::string& alpha2, bool diagonal = false) {
    using nlohmann::ordered_json;
    ordered_json j = ordered_json::parse(srkw::tableau_to_json(srkw::euler_maruyama()));
    j["name"] = "TwoStage";
    j["stages"] = 2;
    j["alpha"] = {alpha1, alpha2};
    ordered_json second = diagonal ? ordered_json{a21, "1/2"} : ordered_json{a21};
    j["A"] = ordered_json::array({{{"row", "(0,0)"}, {"matrix", ordered_json::array({ordered_json::array(), second})}}});
    j["gamma"] = ordered_json::array();
    return j.dump(2);
}

}  // namespace testsupport
