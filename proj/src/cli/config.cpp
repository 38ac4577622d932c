#include "darkspace/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace darkspace::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ValidationError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(where + ": not finite");
    return v;
}

std::vector<double> numbers(const json& j, const std::string& where) {
    std::vector<double> out;
    if (j.is_number()) {
        out.push_back(number(j, where));
    } else if (j.is_array()) {
        for (const auto& e : j) out.push_back(number(e, where));
    } else {
        throw ValidationError(where + ": expected a number or an array of numbers");
    }
    return out;
}

Complex complex_entry(const json& e) {
    if (e.is_number()) return {number(e, "matrix entry"), 0.0};
    if (e.is_array() && e.size() == 2) {
        return {number(e[0], "matrix entry"), number(e[1], "matrix entry")};
    }
    throw ValidationError("matrix entry: expected a number or [re, im]");
}

GaugeProfile profile_from_string(const std::string& s) {
    if (s == "static") return GaugeProfile::Static;
    if (s == "cyclic") return GaugeProfile::Cyclic;
    throw ValidationError("gauge.profile: expected 'static' or 'cyclic', got '" + s + "'");
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::Spin32Purity: return "spin32-purity";
        case Experiment::Sweep: return "sweep";
        case Experiment::GaugeCheck: return "gauge-check";
        case Experiment::EffectiveVsFull: return "effective-vs-full";
        case Experiment::Custom: return "custom";
    }
    return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
    for (Experiment e : {Experiment::Spin32Purity, Experiment::Sweep, Experiment::GaugeCheck,
                         Experiment::EffectiveVsFull, Experiment::Custom}) {
        if (to_string(e) == name) return e;
    }
    throw ValidationError("unknown experiment '" + name + "'");
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ValidationError("cannot parse number '" + item + "'");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size() || !std::isfinite(v)) {
            throw ValidationError("cannot parse number '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("empty number list");
    return out;
}

ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("matrix: expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw ValidationError("matrix: rows must be arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    ComplexMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ValidationError("matrix: ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_entry(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

AnglePath angle_from_json(const json& j) {
    reject_unknown(j, {"family", "offset", "winding", "sin", "cos"}, "angle");
    AnglePath a;
    if (j.contains("family")) {
        if (!j["family"].is_string()) throw ValidationError("angle.family: expected a string");
        a.family = angle_family_from_string(j["family"].get<std::string>());
    }
    if (j.contains("offset")) a.offset = number(j["offset"], "angle.offset");
    if (j.contains("winding")) {
        if (!j["winding"].is_number_integer()) throw ValidationError("angle.winding: expected an integer");
        a.winding = j["winding"].get<int>();
    }
    if (j.contains("sin")) a.sin_coeffs = numbers(j["sin"], "angle.sin");
    if (j.contains("cos")) a.cos_coeffs = numbers(j["cos"], "angle.cos");
    return a;
}

RunConfig parse_config(const json& j, RunConfig cfg) {
    reject_unknown(j,
                   {"experiment", "gammaT", "protocol", "initial", "tolerances", "output", "seed",
                    "checkpoints", "gauge", "custom"},
                   "config");
    if (j.contains("experiment")) {
        if (!j["experiment"].is_string()) throw ValidationError("experiment: expected a string");
        cfg.experiment = experiment_from_string(j["experiment"].get<std::string>());
    }
    if (j.contains("gammaT")) cfg.gamma_t = numbers(j["gammaT"], "gammaT");
    if (j.contains("protocol")) {
        const json& p = j["protocol"];
        reject_unknown(p, {"theta", "phi"}, "protocol");
        if (p.contains("theta")) cfg.path.theta = angle_from_json(p["theta"]);
        if (p.contains("phi")) cfg.path.phi = angle_from_json(p["phi"]);
    }
    if (j.contains("initial")) {
        const json& init = j["initial"];
        reject_unknown(init, {"bloch", "density"}, "initial");
        if (init.contains("bloch")) cfg.n0 = BlochVector::from(numbers(init["bloch"], "initial.bloch"));
        if (init.contains("density")) cfg.rho0 = matrix_from_json(init["density"]);
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        reject_unknown(t, {"rtol", "atol", "kernel_tol"}, "tolerances");
        if (t.contains("rtol")) cfg.rtol = number(t["rtol"], "tolerances.rtol");
        if (t.contains("atol")) cfg.atol = number(t["atol"], "tolerances.atol");
        if (t.contains("kernel_tol")) cfg.kernel_tol = number(t["kernel_tol"], "tolerances.kernel_tol");
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        reject_unknown(o, {"dir", "prefix", "gnuplot"}, "output");
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw ValidationError("output.dir: expected a string");
            cfg.output_dir = o["dir"].get<std::string>();
        }
        if (o.contains("prefix")) {
            if (!o["prefix"].is_string()) throw ValidationError("output.prefix: expected a string");
            cfg.prefix = o["prefix"].get<std::string>();
        }
        if (o.contains("gnuplot")) {
            if (!o["gnuplot"].is_boolean()) throw ValidationError("output.gnuplot: expected a boolean");
            cfg.gnuplot = o["gnuplot"].get<bool>();
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ValidationError("seed: expected a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("checkpoints")) {
        if (!j["checkpoints"].is_number_integer()) throw ValidationError("checkpoints: expected an integer");
        cfg.checkpoints = j["checkpoints"].get<int>();
    }
    if (j.contains("gauge")) {
        const json& g = j["gauge"];
        reject_unknown(g, {"chi", "profile", "random"}, "gauge");
        if (g.contains("chi")) cfg.gauge.chi = number(g["chi"], "gauge.chi");
        if (g.contains("profile")) {
            if (!g["profile"].is_string()) throw ValidationError("gauge.profile: expected a string");
            cfg.gauge.profile = profile_from_string(g["profile"].get<std::string>());
        }
        if (g.contains("random")) {
            if (!g["random"].is_boolean()) throw ValidationError("gauge.random: expected a boolean");
            cfg.gauge.random = g["random"].get<bool>();
        }
    }
    if (j.contains("custom")) {
        const json& c = j["custom"];
        reject_unknown(c, {"jump", "generators", "angles"}, "custom");
        if (!c.contains("jump") || !c.contains("generators") || !c.contains("angles")) {
            throw ValidationError("custom: requires jump, generators and angles");
        }
        CustomSpec spec;
        spec.jump = matrix_from_json(c["jump"]);
        if (!c["generators"].is_array() || !c["angles"].is_array()) {
            throw ValidationError("custom: generators and angles must be arrays");
        }
        for (const auto& g : c["generators"]) spec.generators.push_back(matrix_from_json(g));
        for (const auto& a : c["angles"]) spec.angles.push_back(angle_from_json(a));
        cfg.custom = std::move(spec);
    }
    return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j, std::move(base));
}

void validate(RunConfig& cfg) {
    if (cfg.gamma_t.empty()) throw ValidationError("gammaT: at least one value required");
    for (double gt : cfg.gamma_t) {
        if (!(gt > 0.0) || !std::isfinite(gt)) throw ValidationError("gammaT must be positive");
        if (gt < 10.0) {
            std::ostringstream msg;
            msg << "gammaT = " << gt << " < 10: the adiabatic expansion assumes gammaT >> 1";
            cfg.warnings.push_back(msg.str());
        }
    }
    if (cfg.experiment == Experiment::Sweep) {
        if (cfg.gamma_t.size() < 3) throw ValidationError("sweep: need at least three gammaT values");
        for (std::size_t i = 1; i < cfg.gamma_t.size(); ++i) {
            if (!(cfg.gamma_t[i] > cfg.gamma_t[i - 1])) {
                throw ValidationError("sweep: gammaT values must be strictly increasing");
            }
        }
        if (cfg.gamma_t.back() < 4.0 * cfg.gamma_t.front()) {
            throw ValidationError("sweep: gammaT values must span at least a factor of 4");
        }
    } else if (cfg.gamma_t.size() != 1) {
        throw ValidationError(to_string(cfg.experiment) + ": expects a single gammaT");
    }
    for (auto [name, v] : {std::pair{"rtol", cfg.rtol}, std::pair{"atol", cfg.atol},
                           std::pair{"kernel_tol", cfg.kernel_tol}}) {
        if (!(v > 0.0)) throw ValidationError(std::string("tolerance ") + name + " must be positive");
    }
    if (!(cfg.kernel_tol < 1.0)) throw ValidationError("tolerance kernel_tol must be below 1");
    if (cfg.checkpoints < 1) throw ValidationError("checkpoints must be at least 1");
    cfg.path.validate();
    if (cfg.rho0) DensityMatrix check(*cfg.rho0);
    if (cfg.experiment == Experiment::Custom) {
        if (!cfg.custom) throw ValidationError("custom: the config needs a 'custom' section");
        const auto& c = *cfg.custom;
        if (c.generators.empty() || c.generators.size() != c.angles.size()) {
            throw ValidationError("custom: need one angle per generator");
        }
        require_square(c.jump, "custom.jump");
        for (const auto& g : c.generators) {
            if (g.rows() != c.jump.rows() || g.cols() != c.jump.cols()) {
                throw ValidationError("custom: generator and jump dimensions differ");
            }
            if (hermiticity_error(g) > 1e-12 * std::max(1.0, g.norm())) {
                throw ValidationError("custom: generators must be Hermitian");
            }
        }
        for (const auto& a : c.angles) PathSpec{a, AnglePath::constant(0.0)}.validate();
    } else if (cfg.custom) {
        throw ValidationError("'custom' section is only valid for the custom experiment");
    }
    if (cfg.prefix.empty()) cfg.prefix = to_string(cfg.experiment);
    if (cfg.prefix.find('/') != std::string::npos || cfg.prefix.find('\\') != std::string::npos ||
        cfg.prefix == "." || cfg.prefix == "..") {
        throw ValidationError("output prefix must be a plain file name stem");
    }
    if (cfg.output_dir.empty()) throw ValidationError("output directory must not be empty");
}

AcceptanceFixture load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open fixture file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("fixture '" + path + "' is not valid JSON: " + e.what());
    }
    AcceptanceFixture fx;
    const std::vector<std::pair<const char*, double*>> fields = {
        {"purity_law_rel_tol", &fx.purity_law_rel_tol},
        {"runtime_limit_seconds", &fx.runtime_limit_seconds},
        {"loss_slope_min", &fx.loss_slope_min},
        {"loss_slope_max", &fx.loss_slope_max},
        {"loss_fit_min_r2", &fx.loss_fit_min_r2},
        {"second_order_slope_min", &fx.second_order_slope_min},
        {"second_order_slope_max", &fx.second_order_slope_max},
        {"first_order_slope_min", &fx.first_order_slope_min},
        {"first_order_slope_max", &fx.first_order_slope_max},
        {"holonomy_tol", &fx.holonomy_tol},
        {"ell_tol", &fx.ell_tol},
        {"defect_ratio_max", &fx.defect_ratio_max},
        {"gauge_purity_coefficient", &fx.gauge_purity_coefficient},
        {"c_tau_residual_tol", &fx.c_tau_residual_tol},
        {"idempotence_tol", &fx.idempotence_tol},
        {"completeness_tol", &fx.completeness_tol},
        {"kraus_block_tol", &fx.kraus_block_tol},
        {"trace_tol", &fx.trace_tol},
        {"hermiticity_tol", &fx.hermiticity_tol},
        {"positivity_floor", &fx.positivity_floor},
        {"refinement_tol", &fx.refinement_tol},
        {"prediction_coefficient", &fx.prediction_coefficient},
        {"prediction_residual_exponent_max", &fx.prediction_residual_exponent_max},
    };
    if (!j.is_object()) throw ValidationError("fixture: expected an object");
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const auto& [name, target] : fields) {
            if (key == name) {
                *target = number(value, std::string("fixture.") + key);
                found = true;
            }
        }
        if (!found) throw ValidationError("fixture: unknown key '" + key + "'");
    }
    return fx;
}

}  // namespace darkspace::cli
