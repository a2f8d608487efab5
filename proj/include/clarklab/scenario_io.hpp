#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "clarklab/measure.hpp"

namespace clarklab {

struct Scenario {
    std::string name;
    SpectralMeasure measure;
    CMatrix gamma;
    std::string suite = "all";
    std::uint64_t seed = 1;
    double tolerance_scale = 1.0;
    std::map<std::string, double> tolerance_overrides;  // by check_id
};

// Parses a decimal or a rational "p/q"; used for angles and weights.
double parse_real(const nlohmann::json& v, const std::string& what);
// "1", "-0.5+2i", "3i", "1.5-1e-3i"; also accepts plain JSON numbers and [re, im] pairs.
cplx parse_complex(const std::string& s);
cplx parse_complex(const nlohmann::json& v, const std::string& what);

Scenario scenario_from_json(const nlohmann::json& j);
Scenario parse_scenario_string(const std::string& text);
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

// Unit-circle point at a fraction of a full turn; quarter turns are exact.
cplx turn_point(double fraction);

}  // namespace clarklab
