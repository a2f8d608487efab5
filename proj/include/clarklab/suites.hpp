#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "clarklab/scenario_io.hpp"

namespace clarklab {

struct CheckRecord {
    std::string check_id;
    std::string anchor;  // the statement being checked
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

struct Report {
    std::string command;
    std::string scenario;
    std::string suite;
    std::uint64_t seed = 0;
    double tolerance_scale = 1.0;
    std::vector<CheckRecord> checks;
    std::vector<std::string> skipped;  // "<suite>: reason"

    bool pass() const;
    int failures() const;
    // The timestamp is the only field that changes between identical runs.
    nlohmann::json to_json(bool with_timestamp = true) const;
};

// CLARKLAB_TOL, defaulting to 1. Malformed values raise ParseError.
double env_tolerance_scale();

const std::vector<std::string>& suite_names();  // charfn, model, clark, dilation, sio

Report run_validate(const Scenario& s);
// suite is one of suite_names() or "all".
Report run_verify(const Scenario& s, const std::string& suite, std::uint64_t seed);

}  // namespace clarklab
