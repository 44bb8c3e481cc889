#include "saddlelab/report_io.hpp"

#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "saddlelab/errors.hpp"

namespace saddlelab {

using nlohmann::json;

json to_json(const Point& x) {
    json a = json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x(i));
    return a;
}

json to_json(const CriticalPointInfo& info) {
    json j;
    j["location"] = to_json(info.location);
    j["eigenvalues"] = to_json(info.eigenvalues);
    j["classification"] = std::string(to_string(info.classification));
    j["kappa"] = info.kappa ? json(*info.kappa) : json(nullptr);
    j["abs_min"] = info.abs_min;
    j["abs_max"] = info.abs_max;
    return j;
}

json to_json(const RadiusEstimate& est) {
    return {{"C", est.C}, {"C_hat", est.C_hat}, {"lambda_max", est.lambda_max},
            {"kappa", est.kappa}, {"r_bar", est.r_bar}};
}

json to_json(const EscapeTimeReport& rep) {
    json per = json::array();
    for (const auto& rec : rep.per_ic)
        per.push_back({{"initial", to_json(rec.initial)},
                       {"occupancy", rec.occupancy},
                       {"termination", std::string(to_string(rec.termination))},
                       {"terminal_state", to_json(rec.terminal_state)},
                       {"converged_to_saddle", rec.converged_to_saddle}});
    json j;
    j["report_type"] = "escape_time";
    j["inputs"] = {{"saddle", to_json(rep.saddle)}, {"r", rep.r}, {"C", rep.C}, {"seed", rep.seed},
                   {"n_ic", rep.per_ic.size()}};
    j["per_ic"] = std::move(per);
    j["bound"] = rep.bound;
    j["max_occupancy"] = rep.max_occupancy;
    j["argmax"] = rep.argmax ? json(*rep.argmax) : json(nullptr);
    j["slack"] = rep.slack;
    j["pass"] = rep.pass;
    return j;
}

json to_json(const TaylorCheckReport& rep) {
    json viol = json::array();
    for (const auto& v : rep.violations)
        viol.push_back({{"x", to_json(v.x)},
                        {"inequality", std::string(to_string(v.which))},
                        {"lhs", v.lhs},
                        {"rhs", v.rhs}});
    json j;
    j["report_type"] = "taylor_check";
    j["inputs"] = {{"C1", rep.C1}, {"C2", rep.C2}, {"r_hat", rep.r_hat},
                   {"n_samples", rep.n_samples}, {"seed", rep.seed}};
    j["implied_C"] = rep.implied_C;
    j["violation_count"] = rep.violation_count;
    j["violations"] = std::move(viol);
    j["pass"] = rep.violation_count == 0;
    return j;
}

json to_json(const StableManifoldReport& rep) {
    json per = json::array();
    for (const auto& rec : rep.per_ic)
        per.push_back({{"initial", to_json(rec.initial)},
                       {"termination", std::string(to_string(rec.termination))},
                       {"terminal_state", to_json(rec.terminal_state)},
                       {"reached_saddle", rec.reached_saddle}});
    json j;
    j["report_type"] = "stable_manifold";
    j["inputs"] = {{"saddle", to_json(rep.saddle)}, {"r", rep.r}, {"seed", rep.seed},
                   {"n_ic", rep.per_ic.size()}};
    j["capture_radius"] = rep.capture_radius;
    j["per_ic"] = std::move(per);
    j["reached"] = rep.reached;
    j["fraction"] = rep.fraction;
    j["pass"] = rep.reached == 0;
    return j;
}

json to_json(const OrbitComparison& cmp) {
    json j;
    j["report_type"] = "orbit_comparison";
    j["inputs"] = {{"initial", to_json(cmp.initial)}, {"s_max", cmp.s_max}};
    j["common_length"] = cmp.common_length;
    j["sup_error"] = cmp.sup_error;
    j["ngd_arc_deviation"] = cmp.ngd_arc_deviation;
    j["gd_termination"] = std::string(to_string(cmp.gd_termination));
    j["ngd_termination"] = std::string(to_string(cmp.ngd_termination));
    return j;
}

json to_json(const GlobalBoundReport& rep) {
    json per = json::array();
    for (const auto& rec : rep.measured)
        per.push_back({{"initial", to_json(rec.initial)},
                       {"time", rec.time},
                       {"termination", std::string(to_string(rec.termination))},
                       {"terminal_state", to_json(rec.terminal_state)},
                       {"terminal_kind", std::string(to_string(rec.terminal_kind))},
                       {"converged_to_minimum", rec.converged_to_minimum}});
    json j;
    j["report_type"] = "global_bound";
    j["inputs"] = {{"R", rep.R}, {"r", rep.r}, {"d", rep.d}, {"C", rep.C}, {"seed", rep.seed},
                   {"n_ic", rep.measured.size()}};
    j["M"] = rep.M;
    j["nu"] = rep.nu;
    j["nu_estimated"] = rep.nu_estimated;
    j["lambda_min"] = rep.lambda_min;
    j["lambda_max"] = rep.lambda_max;
    j["kappa"] = rep.kappa;
    j["critical_points"] = rep.critical_points;
    j["min_separation"] = rep.min_separation;
    j["grid_points"] = rep.grid_points;
    j["per_ic"] = std::move(per);
    j["bound"] = rep.bound;
    j["trajectory_length_form"] = rep.trajectory_length_form;
    j["max_time"] = rep.max_time;
    j["exceeds_length_form"] = rep.exceeds_length_form;
    j["pass"] = rep.pass;
    return j;
}

json to_json(const BallOccupancy& occ) {
    json iv = json::array();
    for (const auto& i : occ.intervals) iv.push_back({i.t_in, i.t_out});
    return {{"center", to_json(occ.center)}, {"radius", occ.radius}, {"intervals", iv},
            {"total_time", occ.total_time}, {"tangency_warning", occ.tangency_warning},
            {"warnings", occ.warnings}};
}

std::string dump_payload(const json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw IOError("SHA-256 digest failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

}  // namespace saddlelab
