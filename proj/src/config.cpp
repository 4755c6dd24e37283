/**
 * @file config.cpp
 * @brief INI configuration parsing, serialization and the per-benchmark defaults.
 */
#include "blayer/config.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace blayer {

namespace pt = boost::property_tree;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream is(text);
    try {
        pt::read_ini(is, c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::serialize() const {
    std::ostringstream os;
    pt::write_ini(os, tree_);
    return os.str();
}

void Config::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config " + path);
    out << serialize();
}

bool Config::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::string Config::get_string(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ConfigError("config: missing key '" + key + "'");
    return *v;
}

double Config::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' is not a number: " + s);
    }
}

int Config::get_int(const std::string& key) const {
    const std::string s = get_string(key);
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' is not an integer: " + s);
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config: '" + key + "' is not a boolean: " + s);
}

std::vector<double> Config::get_list(const std::string& key) const {
    const std::string s = get_string(key);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a == std::string::npos) continue;
        try {
            out.push_back(std::stod(item.substr(a, b - a + 1)));
        } catch (const std::exception&) {
            throw ConfigError("config: '" + key + "' has a non-numeric entry: " + item);
        }
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }
void Config::set(const std::string& key, double value) { tree_.put(key, format_double(value)); }
void Config::set(const std::string& key, int value) { tree_.put(key, std::to_string(value)); }
void Config::set(const std::string& key, bool value) { tree_.put(key, value ? "true" : "false"); }
void Config::set(const std::string& key, const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + format_double(values[i]);
    tree_.put(key, s);
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || assignment.find('.') > eq)
        throw ConfigError("config override must look like section.key=value: " + assignment);
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

const std::vector<std::string>& benchmark_ids() {
    static const std::vector<std::string> ids = {"offset-validate", "patch-test",      "bending-beam",
                                                 "convergence-block", "hertz",         "hertz-selective"};
    return ids;
}

Config default_config(const std::string& id) {
    Config c;
    c.set("config.benchmark", id);
    c.set("config.version", kConfigVersion);
    if (id == "offset-validate") {
        c.set("geometry.cases", "curve,surface,arc");
        c.set("geometry.patch_file", "");
        c.set("geometry.distance", 0.1);
        c.set("curve.distances", std::vector<double>{0.1, 0.15, 0.2, 0.25});
        c.set("surface.distance", 3.0);
        c.set("surface.normal_sign", 1.0);
        c.set("arc.distance", 0.25);
        c.set("offset.samples_per_span", 200);
        c.set("offset.curve_optimizer_samples", 100);
        c.set("offset.surface_optimizer_samples", 20);
        c.set("offset.max_iterations", 2000);
        c.set("offset.gradient_tolerance", 1e-10);
    } else if (id == "patch-test") {
        c.set("geometry.a", 3.0);
        c.set("geometry.variant", "all");
        c.set("geometry.thickness", 0.5);
        c.set("material.E", 1.0);
        c.set("material.nu", 0.3);
        c.set("material.kinematics", "finite");
        c.set("load.p", -0.01);
        c.set("mesh.h", 1.0);
        c.set("mesh.background", "quad4");
        c.set("mesh.layer_spans", 3);
        c.set("mesh.thickness_elements", 1);
        c.set("coupling.epsilon", 1000.0);
        c.set("coupling.polyline_density", 4);
        c.set("coupling.triangle_order", 2);
        c.set("coupling.prune_threshold", 0.0);
        c.set("solver.load_steps", 1);
    } else if (id == "bending-beam") {
        c.set("geometry.length", 1.5);
        c.set("geometry.height", 1.0);
        c.set("geometry.interface_x", 0.625);
        c.set("geometry.mesh_file", "beam_crosshatch.mesh");
        c.set("material.nu", 0.0);
        c.set("material.kinematics", "linear");
        c.set("load.slope", 0.2);
        c.set("coupling.epsilon", 1e6);
        c.set("coupling.polyline_density", 4);
        c.set("coupling.triangle_order", 2);
        c.set("study.configs", "1,2,3");
        c.set("config1.layer_spans", 10);
        c.set("config1.thickness_elements", 9);
        c.set("config1.E_layer", 50.0);
        c.set("config1.E_background", 50.0);
        c.set("config2.layer_spans", 36);
        c.set("config2.thickness_elements", 31);
        c.set("config2.E_layer", 50.0);
        c.set("config2.E_background", 50.0);
        c.set("config3.layer_spans", 36);
        c.set("config3.thickness_elements", 31);
        c.set("config3.E_layer", 50000.0);
        c.set("config3.E_background", 50.0);
    } else if (id == "convergence-block") {
        c.set("geometry.width", 3.0);
        c.set("geometry.height", 3.0);
        c.set("geometry.interface", std::vector<double>{-1.5, 0.4, -0.5, 0.8, 0.5, 0.2, 1.5, 0.5});
        c.set("material.E", 1.0);
        c.set("material.nu", 0.0);
        c.set("material.kinematics", "linear");
        c.set("load.coefficient", 0.1);
        c.set("load.exponent", 4.0);
        c.set("coupling.epsilon", 1e4);
        c.set("coupling.polyline_density", 8);
        c.set("contact.c_n_factor", 10.0);
        c.set("study.divisions", std::vector<double>{4, 8, 16, 32});
        c.set("study.reference_divisions", 128);
        c.set("study.backgrounds", "quad4,quad8");
        c.set("study.first_divisions", 4);
        c.set("study.reference_background", "quad8");
        c.set("coupling.triangle_order", 4);
        c.set("solver.load_steps", 1);
    } else if (id == "hertz" || id == "hertz-selective") {
        c.set("geometry.R", 10.0);
        c.set("geometry.thickness", 0.1);
        c.set("material.E", 250.0);
        c.set("material.nu", 0.0);
        c.set("material.kinematics", "linear");
        c.set("coupling.epsilon", 1e4);
        c.set("coupling.polyline_density", 4);
        c.set("coupling.triangle_order", 2);
        c.set("geometry.offset_method", "interpolation");
        c.set("mesh.thickness_elements", 1);
        c.set("contact.c_n_factor", 10.0);
        c.set("solver.load_steps", 10);
        if (id == "hertz") {
            c.set("load.pressures", std::vector<double>{0.3, 0.5});
            c.set("study.layer_spans", std::vector<double>{8, 16, 32, 64});
            c.set("study.background_cells", std::vector<double>{10, 20, 40, 80});
        } else {
            c.set("load.pressures", std::vector<double>{0.3});
            c.set("selective.central_spans", 126);
            c.set("selective.side_spans", 20);
            c.set("selective.background_cells", 18);
            c.set("selective.compare_layer_spans", 64);
            c.set("selective.compare_background_cells", 80);
        }
    } else {
        throw ConfigError("unknown benchmark '" + id + "'");
    }
    return c;
}

namespace {

void require_positive(const Config& c, const std::string& key) {
    if (!(c.get_double(key) > 0.0)) throw ConfigError("config: '" + key + "' must be positive");
}

void require_material(const Config& c, const std::string& prefix_E, const std::string& nu_key) {
    require_positive(c, prefix_E);
    const double nu = c.get_double(nu_key);
    if (!(nu > -1.0 && nu < 0.5)) throw ConfigError("config: Poisson ratio must lie in (-1, 0.5)");
}

}  // namespace

void validate_config(const Config& c) {
    const std::string id = c.benchmark();
    const auto& ids = benchmark_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw ConfigError("unknown benchmark '" + id + "'");
    if (c.has("config.version") && c.get_int("config.version") > kConfigVersion)
        throw ConfigError("config: schema version " + c.get_string("config.version") + " is newer than supported");
    if (id == "offset-validate") {
        for (double d : c.get_list("curve.distances"))
            if (!(d > 0.0)) throw ConfigError("config: offset distances must be positive");
        require_positive(c, "surface.distance");
        require_positive(c, "arc.distance");
        if (c.get_int("offset.samples_per_span") < 2) throw ConfigError("config: samples_per_span must be >= 2");
    } else if (id == "patch-test") {
        require_positive(c, "geometry.a");
        require_positive(c, "geometry.thickness");
        if (c.get_double("geometry.thickness") >= c.get_double("geometry.a"))
            throw ConfigError("config: layer thickness must be below the block size");
        const std::set<std::string> variants = {"all", "straight", "inclined", "curved"};
        if (!variants.count(c.get_string("geometry.variant"))) throw ConfigError("config: unknown patch-test variant");
        require_material(c, "material.E", "material.nu");
        require_positive(c, "mesh.h");
        require_positive(c, "coupling.epsilon");
        if (c.get_int("mesh.layer_spans") < 1 || c.get_int("mesh.thickness_elements") < 1)
            throw ConfigError("config: layer spans and thickness elements must be >= 1");
    } else if (id == "bending-beam") {
        require_positive(c, "geometry.length");
        require_positive(c, "geometry.height");
        require_positive(c, "coupling.epsilon");
        for (double k : c.get_list("study.configs")) {
            const std::string s = "config" + std::to_string(static_cast<int>(k));
            require_material(c, s + ".E_layer", "material.nu");
            require_positive(c, s + ".E_background");
            if (c.get_int(s + ".layer_spans") < 1 || c.get_int(s + ".thickness_elements") < 1)
                throw ConfigError("config: " + s + " needs positive element counts");
        }
    } else if (id == "convergence-block") {
        require_material(c, "material.E", "material.nu");
        require_positive(c, "coupling.epsilon");
        if (c.get_list("geometry.interface").size() < 6 || c.get_list("geometry.interface").size() % 2)
            throw ConfigError("config: interface needs at least three control points");
        if (c.get_list("study.divisions").size() < 3) throw ConfigError("config: at least three refinement levels");
    } else {
        require_positive(c, "geometry.R");
        require_positive(c, "geometry.thickness");
        require_material(c, "material.E", "material.nu");
        require_positive(c, "coupling.epsilon");
        for (double p : c.get_list("load.pressures"))
            if (!(p > 0.0)) throw ConfigError("config: pressures must be positive");
        if (c.get_int("solver.load_steps") < 1) throw ConfigError("config: load_steps must be >= 1");
    }
}

}  // namespace blayer
