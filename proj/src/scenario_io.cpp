#include "clarklab/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "clarklab/errors.hpp"
#include "clarklab/perturbation.hpp"

namespace clarklab {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

double parse_decimal(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        bad(what + ": not a number: '" + s + "'");
    }
    if (used != s.size()) bad(what + ": trailing characters in '" + s + "'");
    return v;
}

std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

CMatrix parse_block(const json& v, int rows, int cols, const std::string& what) {
    if (!v.is_array()) bad(what + ": expected an array");
    if (static_cast<int>(v.size()) != rows * cols)
        bad(what + ": expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(v.size()));
    CMatrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) out(i, k) = parse_complex(v[static_cast<std::size_t>(i * cols + k)], what);
    return out;
}

json block_to_json(const CMatrix& a) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k) arr.push_back({a(i, k).real(), a(i, k).imag()});
    return arr;
}

int get_int(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) bad(what + ": missing '" + key + "'");
    if (!j[key].is_number_integer()) bad(what + ": '" + key + "' must be an integer");
    return j[key].get<int>();
}

}  // namespace

cplx turn_point(double fraction) {
    double f = fraction - std::floor(fraction);
    const double q = 4.0 * f;
    if (q == std::round(q)) {
        switch (static_cast<int>(q) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    return std::polar(1.0, 2.0 * std::numbers::pi * f);
}

double parse_real(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (!v.is_string()) bad(what + ": expected a number or a rational string");
    const std::string s = trim(v.get<std::string>());
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_decimal(s, what);
    const double p = parse_decimal(trim(s.substr(0, slash)), what);
    const double q = parse_decimal(trim(s.substr(slash + 1)), what);
    if (q == 0.0) bad(what + ": zero denominator");
    return p / q;
}

cplx parse_complex(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) bad("empty complex literal");
    if (s.back() != 'i' && s.back() != 'j') return {parse_decimal(s, "complex literal"), 0.0};
    const std::string body = s.substr(0, s.size() - 1);
    // split at the last sign that is not part of an exponent
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag_part = [](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_decimal(t, "complex literal");
    };
    if (split == std::string::npos) return {0.0, imag_part(body)};
    return {parse_decimal(body.substr(0, split), "complex literal"), imag_part(body.substr(split))};
}

cplx parse_complex(const json& v, const std::string& what) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_string()) return parse_complex(v.get<std::string>());
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    bad(what + ": expected [re, im], a number, or a complex string");
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) bad("scenario: top level must be an object");
    Scenario s;
    s.name = j.value("name", std::string{});
    if (j.contains("random_seed")) {
        // a seeded random scenario stands in for explicit atoms and Gamma
        if (!j["random_seed"].is_number_unsigned()) bad("scenario: random_seed must be a non-negative integer");
        const auto rs = random_scenario(j["random_seed"].get<std::uint64_t>());
        s.measure = rs.measure;
        s.gamma = rs.gamma;
        s.seed = rs.seed;
        if (s.name.empty()) s.name = "random-" + std::to_string(rs.seed);
        s.suite = j.value("suite", std::string("all"));
        return s;
    }
    const int d = get_int(j, "d", "scenario");
    if (d < 1) bad("scenario: d must be positive");
    s.measure.d = d;
    s.measure.tag = j.value("tag", std::string{});
    if (j.contains("atoms")) {
        const auto& atoms = j["atoms"];
        if (!atoms.is_array()) bad("scenario: 'atoms' must be an array");
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            const auto& a = atoms[k];
            const std::string what = "atoms[" + std::to_string(k) + "]";
            if (!a.is_object()) bad(what + ": expected an object");
            Atom at;
            if (a.contains("angle_over_2pi"))
                at.point = turn_point(parse_real(a["angle_over_2pi"], what + ".angle_over_2pi"));
            else if (a.contains("re") && a.contains("im"))
                at.point = {parse_real(a["re"], what + ".re"), parse_real(a["im"], what + ".im")};
            else
                bad(what + ": needs 'angle_over_2pi' or 're'/'im'");
            if (!a.contains("weight")) bad(what + ": missing 'weight'");
            at.weight = parse_real(a["weight"], what + ".weight");
            at.fiber_dim = a.contains("fiber_dim") ? get_int(a, "fiber_dim", what) : 1;
            if (at.fiber_dim < 1) bad(what + ": fiber_dim must be positive");
            if (!a.contains("b_block")) bad(what + ": missing 'b_block'");
            at.b_block = parse_block(a["b_block"], at.fiber_dim, d, what + ".b_block");
            s.measure.atoms.push_back(std::move(at));
        }
    }
    if (j.contains("ac_density")) {
        const auto& a = j["ac_density"];
        AcDensity dens;
        dens.d = d;
        dens.fiber_dim = get_int(a, "fiber_dim", "ac_density");
        if (!a.contains("terms") || !a["terms"].is_array()) bad("ac_density: 'terms' must be an array");
        for (const auto& t : a["terms"])
            dens.terms.emplace_back(get_int(t, "power", "ac_density.terms"),
                                    parse_block(t.value("beta", json::array()), dens.fiber_dim, d, "ac_density.beta"));
        s.measure.ac = std::move(dens);
    }
    if (s.measure.atoms.empty() && !s.measure.ac) bad("scenario: needs 'atoms' or 'ac_density'");
    s.gamma = j.contains("gamma") ? parse_block(j["gamma"], d, d, "gamma") : CMatrix::Zero(d, d);
    s.suite = j.value("suite", std::string("all"));
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) bad("scenario: seed must be a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tolerance_scale")) s.tolerance_scale = parse_real(j["tolerance_scale"], "tolerance_scale");
    if (j.contains("tolerances")) {
        if (!j["tolerances"].is_object()) bad("scenario: 'tolerances' must map check ids to numbers");
        for (const auto& [k, v] : j["tolerances"].items()) s.tolerance_overrides[k] = parse_real(v, "tolerances." + k);
    }
    return s;
}

Scenario parse_scenario_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports a byte offset; turn it into line and column
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t k = 0; k < end; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        const std::string msg = e.what();
        const auto cut = msg.rfind(": ");
        os << "JSON syntax error at line " << line << ", column " << col << ": "
           << (cut == std::string::npos ? msg : msg.substr(cut + 2));
        bad(os.str());
    }
    return scenario_from_json(j);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    Scenario s = parse_scenario_string(buf.str());
    if (s.name.empty()) s.name = path;
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["d"] = s.measure.d;
    if (!s.measure.tag.empty()) j["tag"] = s.measure.tag;
    j["atoms"] = json::array();
    for (const auto& a : s.measure.atoms)
        j["atoms"].push_back({{"re", a.point.real()},
                              {"im", a.point.imag()},
                              {"weight", a.weight},
                              {"fiber_dim", a.fiber_dim},
                              {"b_block", block_to_json(a.b_block)}});
    if (s.measure.ac) {
        json terms = json::array();
        for (const auto& [k, beta] : s.measure.ac->terms) terms.push_back({{"power", k}, {"beta", block_to_json(beta)}});
        j["ac_density"] = {{"fiber_dim", s.measure.ac->fiber_dim}, {"terms", terms}};
    }
    j["gamma"] = block_to_json(s.gamma);
    j["suite"] = s.suite;
    j["seed"] = s.seed;
    j["tolerance_scale"] = s.tolerance_scale;
    if (!s.tolerance_overrides.empty()) j["tolerances"] = s.tolerance_overrides;
    return j;
}

}  // namespace clarklab
