#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "clarklab/clark.hpp"
#include "clarklab/errors.hpp"
#include "clarklab/scenario_io.hpp"
#include "clarklab/suites.hpp"

using namespace clarklab;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double num(const std::string& s, const char* what) {
    try {
        return parse_real(json(s), what);
    } catch (const Error&) {
        throw Error(ErrorKind::ParseError, std::string("bad ") + what + " in points spec: '" + s + "'");
    }
}

// ray:<turn>:<count>[:<rmax>] | disk:<count>[:<rmax>] | circle:<radius>:<count> | list:<z>;<z>;...
std::vector<cplx> parse_points(const std::string& spec, std::uint64_t seed) {
    const auto parts = split(spec, ':');
    if (parts.empty()) throw Error(ErrorKind::ParseError, "empty points spec");
    const std::string& kind = parts[0];
    std::vector<cplx> pts;
    auto count_at = [&](std::size_t k) {
        if (parts.size() <= k) throw Error(ErrorKind::ParseError, "points spec '" + spec + "' is missing a count");
        const double c = num(parts[k], "count");
        if (c < 1 || c != std::floor(c)) throw Error(ErrorKind::ParseError, "count must be a positive integer");
        return static_cast<int>(c);
    };
    if (kind == "ray") {
        if (parts.size() < 3) throw Error(ErrorKind::ParseError, "ray needs <turn>:<count>");
        const cplx xi = turn_point(num(parts[1], "angle"));
        const int c = count_at(2);
        const double rmax = parts.size() > 3 ? num(parts[3], "rmax") : 0.999;
        for (int k = 0; k <= c; ++k) pts.push_back(rmax * k / c * xi);
    } else if (kind == "disk") {
        const int c = count_at(1);
        const double rmax = parts.size() > 2 ? num(parts[2], "rmax") : 0.95;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < c; ++k) pts.push_back(std::polar(rmax * std::sqrt(u(rng)), 2.0 * M_PI * u(rng)));
    } else if (kind == "circle") {
        if (parts.size() < 3) throw Error(ErrorKind::ParseError, "circle needs <radius>:<count>");
        const double r = num(parts[1], "radius");
        const int c = count_at(2);
        for (int k = 0; k < c; ++k) pts.push_back(r * turn_point(static_cast<double>(k) / c));
    } else if (kind == "list") {
        const auto rest = spec.substr(5);
        for (const auto& z : split(rest, ';'))
            if (!z.empty()) pts.push_back(parse_complex(z));
    } else {
        throw Error(ErrorKind::ParseError, "unknown points spec kind '" + kind + "'");
    }
    for (cplx z : pts)
        if (std::abs(z) > 1.0 + 1e-12) throw Error(ErrorKind::ParseError, "points must lie in the closed unit disk");
    return pts;
}

std::vector<std::vector<cplx>> read_complex_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
    std::vector<std::vector<cplx>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<cplx> row;
        for (auto cell : split(line, ',')) {
            cell.erase(std::remove(cell.begin(), cell.end(), '\r'), cell.end());
            try {
                row.push_back(parse_complex(cell));
            } catch (const Error& e) {
                throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_json(const json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(out);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + out + "'");
    f << j.dump(2) << "\n";
}

void print_summary(const Report& r) {
    for (const auto& c : r.checks)
        if (!c.pass)
            std::cerr << "FAIL " << c.check_id << " residual=" << c.residual << " tol=" << c.tolerance
                      << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
    std::cerr << (r.pass() ? "PASS" : "FAIL") << ": " << r.checks.size() - r.failures() << "/" << r.checks.size()
              << " checks passed";
    if (!r.skipped.empty()) std::cerr << ", " << r.skipped.size() << " skipped";
    std::cerr << "\n";
}

int cmd_charfn(const Scenario& s, const std::string& spec, const std::string& out, std::uint64_t seed) {
    const auto pts = parse_points(spec, seed);
    CharFnEvaluator ev(s.measure, ContractionParam(s.gamma));
    const int d = s.measure.d;
    const bool atomic = s.measure.purely_atomic();
    std::ofstream f(out);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + out + "'");
    f << std::setprecision(17);
    f << "z_re,z_im,method";
    for (const char* name : {"theta", "F"})
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) f << "," << name << i << k << "_re," << name << i << k << "_im";
    f << ",delta_norm,residual,flag\n";
    const std::string nan_cells = [&] {
        std::string c;
        for (int k = 0; k < 4 * d * d + 2; ++k) c += ",nan";
        return c;
    }();
    int flagged = 0;
    for (cplx z : pts) {
        const bool boundary = std::abs(std::abs(z) - 1.0) < 1e-12;
        std::vector<std::pair<std::string, CMatrix>> rows;
        double residual = std::nan("");
        std::string flag = "ok";
        CMatrix F, delta;
        try {
            rows.emplace_back("cauchy", boundary ? ev.theta_boundary(z) : ev.theta(z));
            if (atomic && !boundary) {
                rows.emplace_back("resolvent", ev.theta(z, ThetaMethod::Resolvent));
                residual = op_norm(rows[0].second - rows[1].second);
            }
            F = ev.F(z);
            delta = ev.delta(z);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TooCloseToAtom && e.kind() != ErrorKind::NoConvergence &&
                e.kind() != ErrorKind::SingularCore)
                throw;
            ++flagged;
            f << z.real() << "," << z.imag() << ",cauchy" << nan_cells << "," << error_kind_name(e.kind()) << "\n";
            continue;
        }
        for (const auto& [method, th] : rows) {
            f << z.real() << "," << z.imag() << "," << method;
            for (const CMatrix* m : {&th, static_cast<const CMatrix*>(&F)})
                for (int i = 0; i < d; ++i)
                    for (int k = 0; k < d; ++k) f << "," << (*m)(i, k).real() << "," << (*m)(i, k).imag();
            f << "," << op_norm(delta) << "," << residual << "," << flag << "\n";
        }
    }
    std::cerr << pts.size() << " points written to " << out;
    if (flagged) std::cerr << " (" << flagged << " flagged)";
    std::cerr << "\n";
    return kExitPass;
}

json vec_json(const CVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
    return a;
}

int cmd_clark(const Scenario& s, const std::string& csv, const std::string& direction, const std::string& out) {
    CharFnEvaluator ev(s.measure, ContractionParam(s.gamma));
    const int d = s.measure.d;
    const int n = s.measure.total_dim();
    const auto rows = read_complex_csv(csv);
    std::vector<cplx> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    const int K = build_model_space(ev).theta.K();
    json j;
    j["direction"] = direction;
    j["scenario"] = s.name;
    if (direction == "adjoint") {
        if (static_cast<int>(flat.size()) != n)
            throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(n) + " fiber values, got " +
                                                          std::to_string(flat.size()));
        const TaylorRep h = phi_star_nf(ev, Eigen::Map<const CVector>(flat.data(), n), K);
        int last = 0;
        for (int k = 0; k <= h.K(); ++k)
            if (h.coeffs.col(k).norm() > 1e-13) last = k;
        json coeffs = json::array();
        for (int k = 0; k <= last; ++k) coeffs.push_back(vec_json(h.coeffs.col(k)));
        j["coefficients"] = coeffs;
        j["truncation_degree"] = K;
    } else {
        // one row per Taylor coefficient; for d = 1 a single row of coefficients is accepted too
        TaylorRep h = TaylorRep::zero(d, std::max<int>(K, static_cast<int>(flat.size())));
        if (d == 1) {
            for (std::size_t k = 0; k < flat.size(); ++k) h.coeffs(0, static_cast<Eigen::Index>(k)) = flat[k];
        } else {
            for (std::size_t k = 0; k < rows.size(); ++k) {
                if (static_cast<int>(rows[k].size()) != d)
                    throw Error(ErrorKind::DimensionMismatch, "each coefficient row needs " + std::to_string(d) + " entries");
                for (int i = 0; i < d; ++i) h.coeffs(i, static_cast<Eigen::Index>(k)) = rows[k][i];
            }
        }
        const auto r = phi_direct(ev, h);
        j["atom_values"] = vec_json(r.fiber_values);
        j["estimated_error"] = r.max_est_error;
    }
    write_json(j, out);
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clarklab: characteristic functions, model spaces and Clark operators for finite-rank unitary perturbations"};
    app.require_subcommand(1);

    std::string file, out, points, suite = "all", fcsv, direction;
    std::uint64_t seed = 0;
    bool no_timestamp = false;

    auto* validate_cmd = app.add_subcommand("validate", "validate a scenario file");
    validate_cmd->add_option("file", file, "scenario JSON")->required();
    validate_cmd->add_option("--out", out, "write the report here instead of stdout");
    validate_cmd->add_flag("--no-timestamp", no_timestamp, "omit the timestamp field");

    auto* charfn_cmd = app.add_subcommand("charfn", "evaluate theta_Gamma, F and ||Delta|| at points, CSV output");
    charfn_cmd->add_option("file", file, "scenario JSON")->required();
    charfn_cmd->add_option("--points", points, "ray:<turn>:<count>[:<rmax>] | disk:<count>[:<rmax>] | "
                                               "circle:<radius>:<count> | list:<z>;<z>;...")
        ->required();
    charfn_cmd->add_option("--out", out, "CSV output path")->required();
    charfn_cmd->add_option("--seed", seed, "seed for random point sets");

    auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
    verify_cmd->add_option("file", file, "scenario JSON")->required();
    verify_cmd->add_option("--suite", suite, "all, charfn, model, clark, dilation or sio")
        ->check(CLI::IsMember({"all", "charfn", "model", "clark", "dilation", "sio"}));
    auto* seed_opt = verify_cmd->add_option("--seed", seed, "seed (defaults to the scenario seed)");
    verify_cmd->add_option("--out", out, "write the report here instead of stdout");
    verify_cmd->add_flag("--no-timestamp", no_timestamp, "omit the timestamp field");

    auto* clark_cmd = app.add_subcommand("clark", "apply the Clark operator or its adjoint");
    clark_cmd->add_option("file", file, "scenario JSON")->required();
    clark_cmd->add_option("--f", fcsv, "CSV of fiber values (adjoint) or Taylor coefficients (direct)")->required();
    clark_cmd->add_option("--direction", direction, "adjoint or direct")
        ->required()
        ->check(CLI::IsMember({"adjoint", "direct"}));
    clark_cmd->add_option("--out", out, "write the result here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitInput;
    }

    try {
        const Scenario s = load_scenario(file);
        if (validate_cmd->parsed()) {
            const Report r = run_validate(s);
            write_json(r.to_json(!no_timestamp), out);
            print_summary(r);
            return r.pass() ? kExitPass : kExitFail;
        }
        // the remaining commands need a valid scenario
        const Report v = run_validate(s);
        if (!v.pass()) {
            print_summary(v);
            std::cerr << "scenario failed validation\n";
            return kExitInput;
        }
        if (charfn_cmd->parsed()) return cmd_charfn(s, points, out, seed);
        if (clark_cmd->parsed()) return cmd_clark(s, fcsv, direction, out);
        const Report r = run_verify(s, suite, seed_opt->count() ? seed : s.seed);
        write_json(r.to_json(!no_timestamp), out);
        print_summary(r);
        return r.pass() ? kExitPass : kExitFail;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::ParseError:
            case ErrorKind::DimensionMismatch:
            case ErrorKind::NotInner:
            case ErrorKind::GammaNotStrict:
            case ErrorKind::OutsideDisk:
                return kExitInput;
            default:
                return kExitFail;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
}
