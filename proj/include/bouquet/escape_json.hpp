#pragma once

#include <json.hpp>

#include "bouquet/escape.hpp"

namespace bouquet {

// Fixed-key JSON views with stable key order, so sidecar hashes do not
// depend on library internals. Tower magnitudes are emitted as their
// (level, mantissa) pair plus a readable rendering.
inline nlohmann::ordered_json towerToJson(const TowerReal& v) {
    nlohmann::ordered_json j;
    j["level"] = v.level();
    j["mantissa"] = v.mantissa();
    j["repr"] = v.str();
    return j;
}

inline nlohmann::ordered_json mTableToJson(const MGrowthTable& t) {
    nlohmann::ordered_json j;
    j["base"] = t.base;
    nlohmann::ordered_json vals = nlohmann::ordered_json::array();
    for (const TowerReal& v : t.values) vals.push_back(towerToJson(v));
    j["values"] = vals;
    return j;
}

inline nlohmann::ordered_json gridSummaryToJson(const EscapeGrid& g) {
    nlohmann::ordered_json j;
    j["window"] = {{"re_min", g.window.reMin},
                   {"re_max", g.window.reMax},
                   {"im_min", g.window.imMin},
                   {"im_max", g.window.imMax}};
    j["width"] = g.width;
    j["height"] = g.height;
    std::size_t escaped = 0;
    for (const CellClass& c : g.cells)
        if (c.escapeN) ++escaped;
    j["escaped"] = escaped;
    j["bounded"] = g.cells.size() - escaped;
    return j;
}

}  // namespace bouquet
