#include "saddlelab/lab.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "saddlelab/analysis.hpp"
#include "saddlelab/errors.hpp"
#include "saddlelab/function_spec.hpp"
#include "saddlelab/parallel.hpp"
#include "saddlelab/report_io.hpp"

namespace saddlelab::lab {

using nlohmann::json;

namespace {

// Verdict tolerances for compare-orbits.
constexpr double kOrbitTol = 1e-5;
constexpr double kArcTol = 1e-6;

constexpr std::array<std::pair<Experiment, std::string_view>, 7> kNames{{
    {Experiment::Simulate, "simulate"},
    {Experiment::EscapeSweep, "escape-sweep"},
    {Experiment::GdStall, "gd-stall"},
    {Experiment::CompareOrbits, "compare-orbits"},
    {Experiment::StableManifold, "stable-manifold"},
    {Experiment::TaylorCheck, "taylor-check"},
    {Experiment::GlobalBound, "global-bound"},
}};

enum class Kind { Number, Count, Text, List };

struct Key {
    std::string_view name;
    Kind kind;
    std::string_view help;
};

// Keys shared by every experiment, then per-experiment ones.
constexpr std::array kCommonKeys{
    Key{"function", Kind::Text, "catalog function spec"},
    Key{"seed", Kind::Count, "64-bit RNG seed"},
    Key{"out", Kind::Text, "results directory"},
    Key{"r", Kind::Number, "ball radius"},
    Key{"C", Kind::Number, "escape constant (> 4)"},
    Key{"n-ic", Kind::Count, "number of initial conditions"},
    Key{"saddle", Kind::List, "critical point, comma separated"},
    Key{"x0", Kind::List, "initial point, comma separated"},
    Key{"t-max", Kind::Number, "integration horizon"},
    Key{"abs-tol", Kind::Number, "absolute tolerance"},
    Key{"rel-tol", Kind::Number, "relative tolerance"},
    Key{"max-step", Kind::Number, "largest integrator step"},
    Key{"grad-stop", Kind::Number, "gradient norm treated as critical"},
    Key{"event-tol", Kind::Number, "event time tolerance"},
};

std::vector<Key> experiment_keys(Experiment e) {
    switch (e) {
        case Experiment::Simulate:
            return {{"flow", Kind::Text, "gd, ngd, discrete-gd or discrete-ngd"},
                    {"alpha", Kind::Number, "discrete step size"},
                    {"steps", Kind::Count, "discrete step count"}};
        case Experiment::GdStall:
            return {{"eps", Kind::List, "inner radii, comma separated"},
                    {"theta", Kind::Number, "angle off the stable axis"}};
        case Experiment::CompareOrbits:
            return {{"s-max", Kind::Number, "arc length to compare over"}};
        case Experiment::TaylorCheck:
            return {{"C1", Kind::Number, "value-growth constant"},
                    {"C2", Kind::Number, "gradient constant"},
                    {"r-hat", Kind::Number, "sampling radius"},
                    {"n-samples", Kind::Count, "number of samples"}};
        case Experiment::GlobalBound:
            return {{"R", Kind::Number, "outer radius"},
                    {"nu", Kind::Number, "gradient lower bound away from critical points"}};
        default:
            return {};
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fmt_point(const Point& x, char sep = ',') {
    std::string s;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) s += sep;
        s += fmt(x(i));
    }
    return s;
}

std::string utc_now(const char* pattern) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, pattern, &tm);
    return buf;
}

double parse_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("--" + std::string(key) + ": invalid number '" + std::string(text) + "'");
    return v;
}

std::uint64_t parse_count(std::string_view key, std::string_view text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("--" + std::string(key) + ": invalid unsigned integer '" + std::string(text) + "'");
    return v;
}

json parse_flag(const Key& key, const std::string& text) {
    switch (key.kind) {
        case Kind::Number: return parse_double(key.name, text);
        case Kind::Count: return parse_count(key.name, text);
        case Kind::Text: return text;
        case Kind::List: {
            json a = json::array();
            std::string_view rest = text;
            while (true) {
                const auto pos = rest.find(',');
                a.push_back(parse_double(key.name, rest.substr(0, pos)));
                if (pos == std::string_view::npos) break;
                rest.remove_prefix(pos + 1);
            }
            return a;
        }
    }
    return nullptr;
}

// Typed accessors for the flat config object.
double get_number(const json& j, const char* key) {
    if (!j.is_number()) throw ConfigError(std::string(key) + ": expected a number");
    return j.get<double>();
}

std::uint64_t get_count(const json& j, const char* key) {
    if (!j.is_number_unsigned()) {
        if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
        throw ConfigError(std::string(key) + ": expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::string get_text(const json& j, const char* key) {
    if (!j.is_string()) throw ConfigError(std::string(key) + ": expected a string");
    return j.get<std::string>();
}

std::vector<double> get_list(const json& j, const char* key) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(key) + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(get_number(v, key));
    return out;
}

Point to_point(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Point point_or(const std::optional<std::vector<double>>& v, int d, const char* what) {
    if (!v) return Point::Zero(d);
    if (static_cast<int>(v->size()) != d)
        throw ConfigError(std::string(what) + " has " + std::to_string(v->size()) +
                          " coordinates, function dimension is " + std::to_string(d));
    return to_point(*v);
}

IntegratorConfig integrator_config(const ExperimentConfig& c) {
    IntegratorConfig cfg;
    cfg.t_max = c.t_max;
    cfg.abs_tol = c.abs_tol;
    cfg.rel_tol = c.rel_tol;
    cfg.max_step = c.max_step;
    cfg.grad_stop = c.grad_stop;
    cfg.event_time_tol = c.event_tol;
    cfg.validate();
    return cfg;
}

json report_json(const json& body, const CatalogEntry& entry) {
    json j = body;
    j["inputs"]["function"] = entry.name;
    return j;
}

// ---------------------------------------------------------------------------

ExperimentResult simulate(const ExperimentConfig& c, const CatalogEntry& entry,
                          const IntegratorConfig& cfg) {
    const auto& f = entry.function;
    const int d = f->dimension();
    if (!c.x0) throw ConfigError("simulate needs --x0");
    const Point x0 = point_or(c.x0, d, "x0");

    ExperimentResult res;
    json summary{{"report_type", "simulation"},
                 {"inputs", {{"function", entry.name}, {"flow", c.flow}, {"x0", to_json(x0)}}}};

    if (c.flow == "gd" || c.flow == "ngd") {
        const auto kind = c.flow == "gd" ? FlowKind::gradient_descent()
                                         : FlowKind::normalized_gradient_descent();
        const auto traj = integrate(f, kind, x0, cfg);
        std::ostringstream csv;
        traj.write_csv(csv);
        std::ostringstream dat;
        dat.precision(17);
        for (std::size_t i = 0; i < traj.times().size(); ++i)
            dat << traj.times()[i] << ' ' << traj.f_values()[i] << '\n';
        summary["inputs"]["t_max"] = c.t_max;
        summary["termination"] = {{"cause", std::string(to_string(traj.termination().cause))},
                                  {"time", traj.termination().time},
                                  {"state", to_json(traj.termination().state)}};
        summary["arc_length"] = traj.total_arc_length();
        summary["nodes"] = traj.times().size();
        res.payloads.push_back({"trajectory.csv", csv.str()});
        res.payloads.push_back({"f_vs_t.dat", dat.str()});
    } else if (c.flow == "discrete-gd" || c.flow == "discrete-ngd") {
        std::vector<double> steps(c.steps, c.alpha);
        const auto kind = c.flow == "discrete-gd" ? FlowKind::discrete_gd(std::move(steps))
                                                  : FlowKind::discrete_ngd(std::move(steps));
        const auto iterates = run_discrete(*f, kind, x0, c.grad_stop);
        std::ostringstream csv, dat;
        csv << "n";
        for (int i = 0; i < d; ++i) csv << ",x_" << i;
        csv << ",f\n";
        for (std::size_t n = 0; n < iterates.size(); ++n) {
            const double fv = f->value(iterates[n]);
            csv << n << ',' << fmt_point(iterates[n]) << ',' << fmt(fv) << '\n';
            dat << n << ' ' << fmt(fv) << '\n';
        }
        summary["inputs"]["alpha"] = c.alpha;
        summary["inputs"]["steps"] = c.steps;
        summary["iterations"] = iterates.size() - 1;
        summary["final_state"] = to_json(iterates.back());
        res.payloads.push_back({"iterates.csv", csv.str()});
        res.payloads.push_back({"f_vs_n.dat", dat.str()});
    } else {
        throw ConfigError("unknown flow '" + c.flow + "'");
    }
    res.payloads.push_back({"summary.json", dump_payload(summary)});
    return res;
}

ExperimentResult escape(const ExperimentConfig& c, const CatalogEntry& entry,
                        const IntegratorConfig& cfg) {
    const auto& f = entry.function;
    const Point saddle = point_or(c.saddle, f->dimension(), "saddle");
    const auto info = classify_critical_point(*f, saddle, 1e-8);
    const double r = c.r.value_or(0.5);
    const auto rep = run_escape_sweep(f, info, r, c.n_ic, *c.seed, c.C, cfg);

    std::ostringstream csv, dat;
    csv << "index,initial,occupancy,termination,converged_to_saddle\n";
    std::vector<std::pair<double, double>> curve;
    for (std::size_t i = 0; i < rep.per_ic.size(); ++i) {
        const auto& rec = rep.per_ic[i];
        csv << i << ",\"" << fmt_point(rec.initial, ' ') << "\"," << fmt(rec.occupancy) << ','
            << to_string(rec.termination) << ',' << (rec.converged_to_saddle ? 1 : 0) << '\n';
        const Vector u = rec.initial - saddle;
        const double abscissa = u.size() == 2 ? std::atan2(u(1), u(0)) : static_cast<double>(i);
        curve.emplace_back(abscissa, rec.occupancy);
    }
    std::sort(curve.begin(), curve.end());
    for (const auto& [a, occ] : curve) dat << fmt(a) << ' ' << fmt(occ) << '\n';

    ExperimentResult res;
    res.payloads.push_back({"report.json", dump_payload(report_json(to_json(rep), entry))});
    res.payloads.push_back({"per_ic.csv", csv.str()});
    res.payloads.push_back({f->dimension() == 2 ? "occupancy_vs_theta.dat" : "occupancy_vs_index.dat",
                            dat.str()});
    res.verdicts.push_back({"max occupancy <= C sqrt(kappa) r", rep.pass,
                            "max " + fmt(rep.max_occupancy) + " bound " + fmt(rep.bound)});
    return res;
}

ExperimentResult stall(const ExperimentConfig& c, const CatalogEntry& entry,
                       const IntegratorConfig& cfg) {
    const auto& f = entry.function;
    const int d = f->dimension();
    if (d < 2) throw ConfigError("gd-stall needs dimension >= 2");
    const Point saddle = point_or(c.saddle, d, "saddle");
    const auto info = classify_critical_point(*f, saddle, 1e-8);
    if (info.classification != CriticalKind::Saddle) throw ConfigError("gd-stall needs a saddle");
    const double r = c.r.value_or(1.0);
    const double theta = c.theta.value_or(1e-6);

    // Start at angle theta from the most stable eigendirection, towards the
    // most unstable one.
    const auto spec = symmetric_eigen(f->hessian(saddle));
    const Vector stable = spec.vectors.col(0);
    const Vector unstable = spec.vectors.col(d - 1);
    const Point ic = saddle + r * (std::cos(theta) * stable + std::sin(theta) * unstable);

    ExperimentResult res;
    std::ostringstream csv, dat;
    csv << "eps,time,scaled_bound,direct_bound,status\n";
    json rows = json::array();
    for (double eps : c.eps) {
        const auto lb = stall_lower_bounds(r, eps);
        json row{{"eps", eps}, {"scaled_bound", lb.scaled}, {"direct_bound", lb.direct}};
        try {
            const double t = gd_stall_time(f, saddle, r, eps, ic, cfg);
            row["time"] = t;
            row["status"] = "entered";
            csv << fmt(eps) << ',' << fmt(t) << ',' << fmt(lb.scaled) << ',' << fmt(lb.direct) << ",entered\n";
            dat << fmt(std::log(eps)) << ' ' << fmt(t) << '\n';
            res.verdicts.push_back({"entered B_eps for eps=" + fmt(eps), true, "time " + fmt(t)});
        } catch (const NeverEntered& e) {
            row["time"] = nullptr;
            row["status"] = "never_entered";
            csv << fmt(eps) << ",," << fmt(lb.scaled) << ',' << fmt(lb.direct) << ",never_entered\n";
            res.verdicts.push_back({"entered B_eps for eps=" + fmt(eps), false, e.what()});
        }
        rows.push_back(std::move(row));
    }
    json rep{{"report_type", "gd_stall"},
             {"inputs", {{"function", entry.name}, {"saddle", to_json(saddle)}, {"r", r},
                         {"theta", theta}, {"initial", to_json(ic)}}},
             {"per_eps", rows},
             {"closest_approach", r * std::sqrt(std::sin(2.0 * theta))}};
    res.payloads.push_back({"report.json", dump_payload(rep)});
    res.payloads.push_back({"stall.csv", csv.str()});
    res.payloads.push_back({"stall_vs_log_eps.dat", dat.str()});
    return res;
}

ExperimentResult orbits(const ExperimentConfig& c, const CatalogEntry& entry,
                        const IntegratorConfig& cfg) {
    const auto& f = entry.function;
    const int d = f->dimension();
    const Point center = point_or(c.saddle, d, "saddle");
    const auto ics = c.x0 ? std::vector<Point>{point_or(c.x0, d, "x0")}
                          : sample_ball(center, c.r.value_or(1.0), c.n_ic, *c.seed);

    std::vector<OrbitComparison> cmp(ics.size());
    parallel_for(ics.size(), [&](std::size_t i) { cmp[i] = compare_orbits(f, ics[i], c.s_max, cfg); });

    double sup = 0.0, arc = 0.0;
    json per = json::array();
    std::ostringstream dat;
    for (const auto& o : cmp) {
        sup = std::max(sup, o.sup_error);
        arc = std::max(arc, o.ngd_arc_deviation);
        per.push_back(to_json(o));
        for (std::size_t j = 0; j < o.s_grid.size(); ++j)
            dat << fmt(o.s_grid[j]) << ' ' << fmt(o.errors[j]) << '\n';
        dat << "\n\n";
    }
    json rep{{"report_type", "orbit_comparison"},
             {"inputs", {{"function", entry.name}, {"s_max", c.s_max}, {"n_ic", ics.size()}}},
             {"per_ic", per},
             {"max_sup_error", sup},
             {"max_arc_deviation", arc}};
    ExperimentResult res;
    res.payloads.push_back({"report.json", dump_payload(rep)});
    res.payloads.push_back({"orbit_error_vs_s.dat", dat.str()});
    res.verdicts.push_back({"sup_s |x~_GD(s) - x_NGD(s)| <= 1e-5", sup <= kOrbitTol, fmt(sup)});
    res.verdicts.push_back({"|L(t) - t| <= 1e-6", arc <= kArcTol, fmt(arc)});
    return res;
}

ExperimentResult manifold(const ExperimentConfig& c, const CatalogEntry& entry,
                          const IntegratorConfig& cfg) {
    const auto& f = entry.function;
    const Point saddle = point_or(c.saddle, f->dimension(), "saddle");
    const auto rep = run_stable_manifold_sample(f, saddle, c.r.value_or(0.5), c.n_ic, *c.seed, cfg);

    std::ostringstream csv;
    csv << "index,initial,termination,reached_saddle\n";
    for (std::size_t i = 0; i < rep.per_ic.size(); ++i) {
        const auto& rec = rep.per_ic[i];
        csv << i << ",\"" << fmt_point(rec.initial, ' ') << "\"," << to_string(rec.termination) << ','
            << (rec.reached_saddle ? 1 : 0) << '\n';
    }
    ExperimentResult res;
    res.payloads.push_back({"report.json", dump_payload(report_json(to_json(rep), entry))});
    res.payloads.push_back({"per_ic.csv", csv.str()});
    res.verdicts.push_back({"no trajectory terminates at the saddle", rep.reached == 0,
                            std::to_string(rep.reached) + " of " + std::to_string(rep.per_ic.size())});
    return res;
}

ExperimentResult taylor(const ExperimentConfig& c, const CatalogEntry& entry,
                        const IntegratorConfig& cfg) {
    const auto& f = entry.function;
    const int d = f->dimension();
    const Point x_star = point_or(c.saddle, d, "saddle");
    auto rep = taylor_estimate_check(*f, x_star, c.C1, c.C2, c.r_hat.value_or(0.1), c.n_samples, *c.seed);

    ExperimentResult res;
    if (c.x0) {
        StopRules stop;
        stop.exit_region = Ball{x_star, rep.r_hat};
        const auto traj = integrate(f, FlowKind::normalized_gradient_descent(), point_or(c.x0, d, "x0"), cfg, stop);
        rep.tilde_trace = modified_distance_trace(traj, x_star, f->hessian(x_star));
        std::ostringstream dat;
        for (const auto& [t, dt] : rep.tilde_trace) dat << fmt(t) << ' ' << fmt(dt) << '\n';
        res.payloads.push_back({"modified_distance_vs_t.dat", dat.str()});
    }
    std::ostringstream csv;
    csv << "x,inequality,lhs,rhs\n";
    for (const auto& v : rep.violations)
        csv << '"' << fmt_point(v.x, ' ') << "\"," << to_string(v.which) << ',' << fmt(v.lhs) << ','
            << fmt(v.rhs) << '\n';
    res.payloads.insert(res.payloads.begin(),
                        {{"report.json", dump_payload(report_json(to_json(rep), entry))},
                         {"violations.csv", csv.str()}});
    res.verdicts.push_back({"zero Taylor-estimate violations", rep.violation_count == 0,
                            std::to_string(rep.violation_count) + " of " + std::to_string(rep.n_samples)});
    return res;
}

ExperimentResult global(const ExperimentConfig& c, const CatalogEntry& entry,
                        const IntegratorConfig& cfg) {
    const auto rep = global_convergence_experiment(entry, c.R, c.nu, c.r.value_or(0.3), c.C, c.n_ic,
                                                   *c.seed, cfg);
    std::ostringstream csv, dat;
    csv << "index,initial,time,termination,terminal_kind\n";
    for (std::size_t i = 0; i < rep.measured.size(); ++i) {
        const auto& rec = rep.measured[i];
        csv << i << ",\"" << fmt_point(rec.initial, ' ') << "\"," << fmt(rec.time) << ','
            << to_string(rec.termination) << ',' << to_string(rec.terminal_kind) << '\n';
        dat << i << ' ' << fmt(rec.time) << '\n';
    }
    ExperimentResult res;
    res.payloads.push_back({"report.json", dump_payload(report_json(to_json(rep), entry))});
    res.payloads.push_back({"per_ic.csv", csv.str()});
    res.payloads.push_back({"time_vs_index.dat", dat.str()});
    res.verdicts.push_back({"every run reaches a minimum within the bound", rep.pass,
                            "max time " + fmt(rep.max_time) + " bound " + fmt(rep.bound)});
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Experiment e) {
    for (const auto& [k, name] : kNames)
        if (k == e) return name;
    return "unknown";
}

std::optional<Experiment> experiment_from_string(std::string_view name) {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    return std::nullopt;
}

bool is_randomized(Experiment e) {
    return e != Experiment::Simulate && e != Experiment::GdStall;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    if (!j.contains("experiment")) throw ConfigError("missing experiment");
    const auto exp = experiment_from_string(get_text(j.at("experiment"), "experiment"));
    if (!exp) throw ConfigError("unknown experiment '" + j.at("experiment").get<std::string>() + "'");
    c.experiment = *exp;

    std::map<std::string, bool> allowed{{"experiment", true}};
    for (const auto& k : kCommonKeys) allowed[std::string(k.name)] = true;
    for (const auto& k : experiment_keys(c.experiment)) allowed[std::string(k.name)] = true;
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' for " + std::string(to_string(c.experiment)));

    auto has = [&](const char* k) { return j.contains(k) && !j.at(k).is_null(); };
    if (has("function")) c.function_spec = get_text(j.at("function"), "function");
    if (has("seed")) c.seed = get_count(j.at("seed"), "seed");
    if (has("out")) c.output_dir = get_text(j.at("out"), "out");
    if (has("r")) c.r = get_number(j.at("r"), "r");
    if (has("C")) c.C = get_number(j.at("C"), "C");
    if (has("n-ic")) c.n_ic = get_count(j.at("n-ic"), "n-ic");
    if (has("saddle")) c.saddle = get_list(j.at("saddle"), "saddle");
    if (has("x0")) c.x0 = get_list(j.at("x0"), "x0");
    if (has("t-max")) c.t_max = get_number(j.at("t-max"), "t-max");
    if (has("abs-tol")) c.abs_tol = get_number(j.at("abs-tol"), "abs-tol");
    if (has("rel-tol")) c.rel_tol = get_number(j.at("rel-tol"), "rel-tol");
    if (has("max-step")) c.max_step = get_number(j.at("max-step"), "max-step");
    if (has("grad-stop")) c.grad_stop = get_number(j.at("grad-stop"), "grad-stop");
    if (has("event-tol")) c.event_tol = get_number(j.at("event-tol"), "event-tol");
    if (has("flow")) c.flow = get_text(j.at("flow"), "flow");
    if (has("alpha")) c.alpha = get_number(j.at("alpha"), "alpha");
    if (has("steps")) c.steps = get_count(j.at("steps"), "steps");
    if (has("eps")) c.eps = get_list(j.at("eps"), "eps");
    if (has("theta")) c.theta = get_number(j.at("theta"), "theta");
    if (has("s-max")) c.s_max = get_number(j.at("s-max"), "s-max");
    if (has("C1")) c.C1 = get_number(j.at("C1"), "C1");
    if (has("C2")) c.C2 = get_number(j.at("C2"), "C2");
    if (has("r-hat")) c.r_hat = get_number(j.at("r-hat"), "r-hat");
    if (has("n-samples")) c.n_samples = get_count(j.at("n-samples"), "n-samples");
    if (has("R")) c.R = get_number(j.at("R"), "R");
    if (has("nu")) c.nu = get_number(j.at("nu"), "nu");

    if (c.function_spec.empty()) throw ConfigError("missing function");
    if (is_randomized(c.experiment) && !c.seed)
        throw ConfigError(std::string(to_string(c.experiment)) + " is randomized and needs --seed");
    for (const auto& [name, v] : {std::pair{"t-max", c.t_max}, {"abs-tol", c.abs_tol},
                                  {"rel-tol", c.rel_tol}, {"max-step", c.max_step},
                                  {"grad-stop", c.grad_stop}, {"event-tol", c.event_tol}})
        if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    if (c.r && !(*c.r > 0.0)) throw ConfigError("r must be positive");
    if (!(c.C > 4.0)) throw ConfigError("C must exceed 4");
    for (double e : c.eps)
        if (!(e > 0.0)) throw ConfigError("eps values must be positive");
    return c;
}

json ExperimentConfig::to_json() const {
    json j{{"experiment", std::string(lab::to_string(experiment))},
           {"function", function_spec},
           {"out", output_dir.string()},
           {"C", C},
           {"n-ic", n_ic},
           {"t-max", t_max},
           {"abs-tol", abs_tol},
           {"rel-tol", rel_tol},
           {"max-step", max_step},
           {"grad-stop", grad_stop},
           {"event-tol", event_tol}};
    if (seed) j["seed"] = *seed;
    if (r) j["r"] = *r;
    if (saddle) j["saddle"] = *saddle;
    if (x0) j["x0"] = *x0;
    switch (experiment) {
        case Experiment::Simulate:
            j["flow"] = flow;
            j["alpha"] = alpha;
            j["steps"] = steps;
            break;
        case Experiment::GdStall:
            j["eps"] = eps;
            if (theta) j["theta"] = *theta;
            break;
        case Experiment::CompareOrbits: j["s-max"] = s_max; break;
        case Experiment::TaylorCheck:
            j["C1"] = C1;
            j["C2"] = C2;
            if (r_hat) j["r-hat"] = *r_hat;
            j["n-samples"] = n_samples;
            break;
        case Experiment::GlobalBound:
            j["R"] = R;
            if (nu) j["nu"] = *nu;
            break;
        default: break;
    }
    return j;
}

json RunManifest::to_json() const {
    json files_j = json::array();
    for (const auto& f : files) files_j.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    json verdicts_j = json::array();
    for (const auto& v : verdicts) verdicts_j.push_back({{"check", v.check}, {"pass", v.pass}, {"detail", v.detail}});
    json j{{"tool_version", tool_version},
           {"config", config},
           {"started_at", started_at},
           {"finished_at", finished_at},
           {"run_dir", run_dir.string()},
           {"files", files_j},
           {"verdicts", verdicts_j},
           {"exit_code", exit_code}};
    if (error_kind) j["error"] = {{"kind", *error_kind}, {"message", error_message.value_or("")}};
    return j;
}

ExperimentResult execute(const ExperimentConfig& config) {
    const auto entry = parse_function_spec(config.function_spec);
    try {
        const auto cfg = integrator_config(config);
        switch (config.experiment) {
            case Experiment::Simulate: return simulate(config, entry, cfg);
            case Experiment::EscapeSweep: return escape(config, entry, cfg);
            case Experiment::GdStall: return stall(config, entry, cfg);
            case Experiment::CompareOrbits: return orbits(config, entry, cfg);
            case Experiment::StableManifold: return manifold(config, entry, cfg);
            case Experiment::TaylorCheck: return taylor(config, entry, cfg);
            case Experiment::GlobalBound: return global(config, entry, cfg);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unhandled experiment");
}

RunManifest run(const ExperimentConfig& config) {
    RunManifest m;
    m.config = config.to_json();
    m.started_at = utc_now("%Y-%m-%dT%H:%M:%SZ");

    ExperimentResult result;
    try {
        result = execute(config);
    } catch (const BoundViolated& e) {
        m.exit_code = 2;
        m.error_kind = e.kind();
        m.error_message = e.what();
    } catch (const AssumptionViolated& e) {
        m.exit_code = 2;
        m.error_kind = e.kind();
        m.error_message = e.what();
    }
    m.verdicts = result.verdicts;
    for (const auto& v : m.verdicts) {
        if (!v.pass && m.exit_code == 0) {
            m.exit_code = 2;
            m.error_kind = "BoundViolated";
            m.error_message = v.check + " failed: " + v.detail;
        }
    }

    // Single writer: everything lands on disk after the experiment finished.
    namespace fs = std::filesystem;
    const std::string seed = config.seed ? std::to_string(*config.seed) : "none";
    const std::string stem =
        std::string(to_string(config.experiment)) + "-" + seed + "-" + utc_now("%Y%m%dT%H%M%SZ");
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw IOError("cannot create " + config.output_dir.string() + ": " + ec.message());
    fs::path dir = config.output_dir / stem;
    for (int k = 1; fs::exists(dir); ++k) dir = config.output_dir / (stem + "-" + std::to_string(k));
    if (!fs::create_directory(dir, ec) || ec)
        throw IOError("cannot create " + dir.string() + ": " + ec.message());
    m.run_dir = dir;

    auto write = [&](const std::string& name, const std::string& contents) {
        std::ofstream out(dir / name, std::ios::binary);
        out << contents;
        if (!out) throw IOError("cannot write " + (dir / name).string());
    };
    for (const auto& p : result.payloads) {
        write(p.name, p.contents);
        m.files.push_back({p.name, sha256_hex(p.contents), p.contents.size()});
    }
    m.finished_at = utc_now("%Y-%m-%dT%H:%M:%SZ");
    write("manifest.json", m.to_json().dump(2) + "\n");
    return m;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Saddle-escape lab for gradient and normalized gradient flows", "saddlelab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    std::map<std::string, std::string> values;
    std::vector<std::pair<CLI::Option*, Key>> options;
    std::map<CLI::App*, Experiment> subs;
    std::map<CLI::App*, std::string> config_paths;

    for (const auto& [exp, name] : kNames) {
        auto* sub = app.add_subcommand(std::string(name));
        subs[sub] = exp;
        sub->add_option("--config", config_paths[sub], "flat JSON config; flags override it");
        auto keys = std::vector<Key>(kCommonKeys.begin(), kCommonKeys.end());
        for (const auto& k : experiment_keys(exp)) keys.push_back(k);
        for (const auto& k : keys) {
            auto* opt = sub->add_option("--" + std::string(k.name), values[std::string(k.name)],
                                        std::string(k.help));
            options.emplace_back(opt, k);
        }
    }
    auto* list = app.add_subcommand("list-functions", "print the function spec grammar");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: ConfigError: " << e.what() << '\n';
        return 1;
    }

    if (list->parsed()) {
        std::cout << function_spec_grammar();
        return 0;
    }

    try {
        CLI::App* sub = nullptr;
        for (const auto& [s, _] : subs)
            if (s->parsed()) sub = s;

        json merged = json::object();
        if (const auto& path = config_paths[sub]; !path.empty()) {
            std::ifstream in(path);
            if (!in) throw IOError("cannot read config " + path);
            try {
                merged = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config ") + path + ": " + e.what(), e.byte);
            }
            if (!merged.is_object()) throw ConfigError("config must be a JSON object");
        }
        for (const auto& [opt, key] : options)
            if (opt->count() > 0) merged[std::string(key.name)] = parse_flag(key, values[std::string(key.name)]);
        merged["experiment"] = std::string(to_string(subs[sub]));

        const auto config = ExperimentConfig::from_json(merged);
        const auto manifest = run(config);
        std::cout << manifest.run_dir.string() << '\n';
        for (const auto& v : manifest.verdicts)
            std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.check << " (" << v.detail << ")\n";
        if (manifest.exit_code != 0)
            std::cerr << "error: " << manifest.error_kind.value_or("Error") << ": "
                      << manifest.error_message.value_or("") << '\n';
        return manifest.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace saddlelab::lab
