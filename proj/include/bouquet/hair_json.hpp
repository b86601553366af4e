#pragma once

#include <json.hpp>

#include "bouquet/hair.hpp"
#include "bouquet/symbolic.hpp"

namespace bouquet {

// Fixed-key manifest for a traced hair: the address, trace extent and
// tolerance, the calibrated real-part band, and the endpoint. Sample data
// itself travels in the CSV; the manifest is the sidecar that makes a curve
// file self-describing.
inline nlohmann::ordered_json hairManifestToJson(const HairCurve& curve, double tol,
                                                 const HairCalibration& cal) {
    nlohmann::ordered_json j;
    j["itinerary"] = formatItinerary(curve.itinerary);
    j["t_max"] = curve.samples.empty() ? 1.0 : curve.samples.back().t;
    j["tol"] = tol;
    j["n_samples"] = curve.samples.size();
    j["q_hat"] = cal.qHat;
    j["m_hat"] = cal.mHat;
    j["endpoint"] = {curve.endpoint.real(), curve.endpoint.imag()};
    return j;
}

inline nlohmann::ordered_json hairPropertyReportToJson(const HairPropertyReport& rep) {
    nlohmann::ordered_json j;
    j["endpoint_gap"] = rep.endpointGap;
    j["endpoint_ok"] = rep.endpointOk;
    j["digits_available"] = rep.digitsAvailable;
    j["digits_matched"] = rep.digitsMatched;
    j["digits_ok"] = rep.digitsOk;
    j["semiconjugacy_max_rel"] = rep.semiconjugacyMaxRel;
    j["semiconjugacy_checks"] = rep.semiconjugacyChecks;
    j["semiconjugacy_ok"] = rep.semiconjugacyOk;
    j["re_chain_increasing_ok"] = rep.reChainIncreasingOk;
    j["re_at_t_max"] = rep.reAtTMax;
    j["monotone_violations"] = rep.monotoneViolations;
    j["band_ok"] = rep.bandOk;
    j["imag_confinement_ok"] = rep.imagConfinementOk;
    j["containment_ok"] = rep.containmentOk;
    j["orbit_max_modulus"] = rep.orbitMaxModulus;
    j["orbit_max_residual"] = rep.orbitMaxResidual;
    j["orbit_bounded_ok"] = rep.orbitBoundedOk;
    j["pass"] = rep.pass;
    return j;
}

}  // namespace bouquet
