#pragma once

#include <json.hpp>

#include "bouquet/geometry.hpp"

namespace bouquet {

// Fixed-key JSON round trip for schemes. Key order is stable so sidecar
// hashes do not depend on library internals.
inline nlohmann::ordered_json schemeToJson(const RegionScheme& s) {
    nlohmann::ordered_json j;
    j["p"] = s.p();
    j["lambda"] = s.params.lambda();
    j["sigma"] = s.sigma;
    j["eta"] = s.eta;
    j["tau"] = s.tau;
    j["nu"] = s.nu;
    j["c"] = s.c;
    j["safety"] = s.safety;
    return j;
}

inline RegionScheme schemeFromJson(const nlohmann::json& j) {
    if (!j.contains("p")) throw InvariantError("scheme JSON: missing key 'p'");
    FamilyParams params(j.at("p").get<int>(), j.value("lambda", 1.0));
    SchemeOverrides ov;
    if (j.contains("sigma")) ov.sigma = j.at("sigma").get<double>();
    if (j.contains("eta")) ov.eta = j.at("eta").get<double>();
    if (j.contains("tau")) ov.tau = j.at("tau").get<double>();
    if (j.contains("nu")) ov.nu = j.at("nu").get<double>();
    if (j.contains("c")) ov.c = j.at("c").get<double>();
    if (j.contains("safety")) ov.safety = j.at("safety").get<double>();
    return makeRegionScheme(params, ov);
}

}  // namespace bouquet
