#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "coolvol/geometry.hpp"

namespace coolvol {

/// Malformed or inconsistent body specification document. The message names
/// the offending field.
class body_spec_error : public std::runtime_error {
public:
    explicit body_spec_error(const std::string& what) : std::runtime_error(what) {}
};

/// Builds a body from a JSON document:
///   {"type": "ball",        "dimension": n, "radius": r}
///   {"type": "box",         "dimension": n, "half_widths": [..] | "half_width": w}
///   {"type": "simplex",     "dimension": n, "scale": s}
///   {"type": "polytope",    "dimension": n, "A": [[..],..], "b": [..],
///                           "outer_radius": number | "inf"}
///   {"type": "intersection","members": [ <body>, .. ]}
/// An "outer_radius" field on closed-form kinds is checked against the exact
/// circumradius. Unit-ball containment is probed on construction; failures
/// surface as body_validation_error.
ConvexBody body_from_json(const nlohmann::json& spec);

/// Reads and parses the file, then delegates to body_from_json.
ConvexBody load_body_spec(const std::string& path);

}  // namespace coolvol
