#pragma once

#include <json.hpp>

#include "bouquet/symbolic.hpp"

namespace bouquet {

// Fixed-key JSON for periodic point records; complex values go out as
// [re, im] pairs and the modulus of the multiplier is echoed for quick reads.
inline nlohmann::ordered_json periodicPointToJson(const PeriodicPointRecord& rec) {
    nlohmann::ordered_json j;
    j["itinerary"] = formatItinerary(rec.itinerary);
    j["period"] = rec.period;
    j["z"] = {rec.z.real(), rec.z.imag()};
    j["multiplier"] = {rec.multiplier.real(), rec.multiplier.imag()};
    j["multiplier_abs"] = std::abs(rec.multiplier);
    return j;
}

inline nlohmann::ordered_json coveringReportToJson(const CoveringReport& rep) {
    nlohmann::ordered_json j;
    j["symbol_bound"] = rep.symbolBound;
    j["n_samples"] = rep.nSamples;
    j["c"] = rep.c;
    j["min_horizontal_margin"] = rep.minHorizontalMargin;
    j["max_annulus_ratio"] = rep.maxAnnulusRatio;
    j["min_axis_crossings"] = rep.minAxisCrossings;
    j["horizontal_pass"] = rep.horizontalPass;
    j["crossings_pass"] = rep.crossingsPass;
    return j;
}

}  // namespace bouquet
