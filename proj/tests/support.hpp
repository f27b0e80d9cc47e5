#pragma once

#include <vector>

#include "lindods/catalog.hpp"

namespace lindods::testing {

/// The fixed-parameter matrix every catalog-wide check runs over.
inline std::vector<CatalogCase> catalog_matrix() {
    return {{"A2_1", {}, {}},
            {"A2_3", {}, {}},
            {"A3_1", {}, {}},
            {"A3_3", {{"a", -1}}, {}},
            {"A3_3", {{"a", 0.5}}, {}},
            {"A3_3", {{"a", 1}}, {}},
            {"A3_5", {}, {}},
            {"A3_7", {{"b", 0}}, {}},
            {"A3_7", {{"b", 1}}, {}},
            {"A3_13", {}, {}},
            {"A3_14", {{"C2", 0.5}}, {}},
            {"A3_15", {}, {}},
            {"A4_5", {}, {}},
            {"A4_12", {}, {}},
            {"A4_14", {}, {}},
            {"A4_21", {{"C", 0.5}}, {}}};
}

inline std::string label(const CatalogCase& c) {
    std::string s = c.id;
    for (const auto& [k, v] : c.params) s += " " + k + "=" + detail::format_number(v);
    return s;
}

} // namespace lindods::testing
