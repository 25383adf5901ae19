#include "levlab/config.hpp"

#include <set>

#include <json.hpp>

#include "levlab/errors.hpp"

namespace levlab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ConfigError(origin + ": " + what);
}

void check_keys(const std::string& origin, const json& j, const std::string& block,
                const std::set<std::string>& allowed) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) fail(origin, "unknown key '" + block + key + "'");
}

double need_number(const std::string& origin, const json& j, const std::string& key) {
    if (!j.contains(key)) fail(origin, "missing key '" + key + "'");
    if (!j[key].is_number()) fail(origin, "key '" + key + "' must be a number");
    return j[key].get<double>();
}

double opt_number(const std::string& origin, const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(origin, "key '" + key + "' must be a number");
    return j[key].get<double>();
}

}  // namespace

std::vector<double> GridConfig::make() const {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = omega_min + (omega_max - omega_min) * i / (points - 1);
    return g;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(origin, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(origin, "config must be a JSON object");
    check_keys(origin, j, "", {"experiment", "model", "grid", "campaign", "loop", "retrieval", "output"});

    RunConfig c;
    if (!j.contains("experiment")) fail(origin, "missing key 'experiment'");
    c.experiment = j["experiment"].get<std::string>();
    if (c.experiment != "two-level-berry" && c.experiment != "ssh-tzm" && c.experiment != "custom")
        fail(origin, "experiment must be one of two-level-berry, ssh-tzm, custom");

    const json model = j.value("model", json::object());
    if (c.experiment == "two-level-berry") {
        check_keys(origin, model, "model.", {"omega0_rad_s", "gamma0_rad_s", "gamma1_rad_s", "gamma2_rad_s"});
        c.two_level.omega0 = opt_number(origin, model, "omega0_rad_s", c.two_level.omega0);
        c.two_level.gamma0 = opt_number(origin, model, "gamma0_rad_s", c.two_level.gamma0);
        c.two_level.gamma1 = opt_number(origin, model, "gamma1_rad_s", c.two_level.gamma1);
        c.two_level.gamma2 = opt_number(origin, model, "gamma2_rad_s", c.two_level.gamma2);
    } else if (c.experiment == "ssh-tzm") {
        check_keys(origin, model, "model.",
                   {"v_rad_s", "w_rad_s", "delta_rad_s", "m_cells", "onsite_rad_s", "gamma0_rad_s"});
        c.ssh.v = opt_number(origin, model, "v_rad_s", c.ssh.v);
        c.ssh.w = opt_number(origin, model, "w_rad_s", c.ssh.w);
        c.ssh.delta = opt_number(origin, model, "delta_rad_s", c.ssh.delta);
        c.ssh.m_cells = static_cast<int>(opt_number(origin, model, "m_cells", c.ssh.m_cells));
        if (c.ssh.m_cells < 2) fail(origin, "model.m_cells must be >= 2");
        c.ssh.onsite = opt_number(origin, model, "onsite_rad_s", c.ssh.onsite);
        c.ssh.gamma0 = opt_number(origin, model, "gamma0_rad_s", c.ssh.gamma0);
    } else {
        check_keys(origin, model, "model.", {"hamiltonian_file"});
        if (!model.contains("hamiltonian_file")) fail(origin, "missing key 'model.hamiltonian_file'");
        c.hamiltonian_file = model["hamiltonian_file"].get<std::string>();
    }

    if (!j.contains("grid")) fail(origin, "missing key 'grid'");
    const json grid = j["grid"];
    check_keys(origin, grid, "grid.", {"omega_min_rad_s", "omega_max_rad_s", "points"});
    c.grid.omega_min = need_number(origin, grid, "omega_min_rad_s");
    c.grid.omega_max = need_number(origin, grid, "omega_max_rad_s");
    c.grid.points = static_cast<int>(need_number(origin, grid, "points"));
    if (!(c.grid.omega_max > c.grid.omega_min)) fail(origin, "grid.omega_max_rad_s must exceed grid.omega_min_rad_s");
    if (c.grid.points < 3) fail(origin, "grid.points must be >= 3");

    const json camp = j.value("campaign", json::object());
    check_keys(origin, camp, "campaign.", {"fixed_site", "noise_sigma_rel", "seed", "a0"});
    c.campaign.fixed_site = static_cast<int>(opt_number(origin, camp, "fixed_site", 1));
    if (c.campaign.fixed_site < 1) fail(origin, "campaign.fixed_site must be >= 1");
    c.campaign.noise_sigma_rel = opt_number(origin, camp, "noise_sigma_rel", 0.0);
    if (c.campaign.noise_sigma_rel < 0.0) fail(origin, "campaign.noise_sigma_rel must be >= 0");
    c.campaign.seed = static_cast<std::uint64_t>(opt_number(origin, camp, "seed", 1.0));
    if (camp.contains("a0")) {
        const json a0 = camp["a0"];
        if (!a0.is_array() || a0.size() != 2 || !a0[0].is_number() || !a0[1].is_number())
            fail(origin, "campaign.a0 must be [re, im]");
        c.campaign.a0 = {a0[0].get<double>(), a0[1].get<double>()};
    }

    const json loop = j.value("loop", json::object());
    check_keys(origin, loop, "loop.",
               {"center_phi_x_rad_s", "center_phi_y_rad_s", "radius_x_rad_s", "radius_y_rad_s", "steps",
                "cycles", "orientation"});
    if (loop.contains("center_phi_x_rad_s")) c.loop.center_x = need_number(origin, loop, "center_phi_x_rad_s");
    if (loop.contains("center_phi_y_rad_s")) c.loop.center_y = need_number(origin, loop, "center_phi_y_rad_s");
    if (loop.contains("radius_x_rad_s")) c.loop.radius_x = need_number(origin, loop, "radius_x_rad_s");
    if (loop.contains("radius_y_rad_s")) c.loop.radius_y = need_number(origin, loop, "radius_y_rad_s");
    c.loop.steps = static_cast<int>(opt_number(origin, loop, "steps", 200));
    c.loop.cycles = static_cast<int>(opt_number(origin, loop, "cycles", 1));
    if (c.loop.steps < 8) fail(origin, "loop.steps must be >= 8");
    if (c.loop.cycles < 1) fail(origin, "loop.cycles must be >= 1");
    if (loop.contains("orientation")) {
        const std::string o = loop["orientation"].get<std::string>();
        if (o == "ccw") c.loop.orientation = Orientation::Ccw;
        else if (o == "cw") c.loop.orientation = Orientation::Cw;
        else fail(origin, "loop.orientation must be 'ccw' or 'cw'");
    }

    const json retr = j.value("retrieval", json::object());
    check_keys(origin, retr, "retrieval.", {"source", "method", "n_modes", "target_omega_rad_s", "band"});
    if (retr.contains("source")) {
        const std::string s = retr["source"].get<std::string>();
        if (s == "exact") c.retrieval.source = RetrievalConfig::Source::Exact;
        else if (s == "retrieved") c.retrieval.source = RetrievalConfig::Source::Retrieved;
        else fail(origin, "retrieval.source must be 'exact' or 'retrieved'");
    }
    if (retr.contains("method")) {
        const std::string m = retr["method"].get<std::string>();
        if (m == "auto") c.retrieval.method = RetrieveOptions::Method::Auto;
        else if (m == "peak") c.retrieval.method = RetrieveOptions::Method::PeakOnly;
        else if (m == "fit") c.retrieval.method = RetrieveOptions::Method::FitOnly;
        else fail(origin, "retrieval.method must be auto, peak, or fit");
    }
    c.retrieval.n_modes = static_cast<int>(opt_number(origin, retr, "n_modes", 0));
    if (retr.contains("target_omega_rad_s")) c.retrieval.target_omega = need_number(origin, retr, "target_omega_rad_s");
    c.retrieval.band = static_cast<int>(opt_number(origin, retr, "band", 0));
    if (c.retrieval.band < 0) fail(origin, "retrieval.band must be >= 0");

    const json out = j.value("output", json::object());
    check_keys(origin, out, "output.", {"directory", "formats"});
    if (out.contains("directory")) c.output.directory = out["directory"].get<std::string>();
    if (out.contains("formats")) {
        if (!out["formats"].is_array()) fail(origin, "output.formats must be an array");
        c.output.json = c.output.csv = c.output.svg = false;
        for (const auto& f : out["formats"]) {
            const std::string name = f.get<std::string>();
            if (name == "json") c.output.json = true;
            else if (name == "csv") c.output.csv = true;
            else if (name == "svg") c.output.svg = true;
            else fail(origin, "output.formats entries must be json, csv, or svg");
        }
        if (!c.output.json) fail(origin, "output.formats must include 'json'");
    }
    return c;
}

std::string effective_config_json(const RunConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    json model;
    if (c.experiment == "two-level-berry") {
        model["omega0_rad_s"] = c.two_level.omega0;
        model["gamma0_rad_s"] = c.two_level.gamma0;
        model["gamma1_rad_s"] = c.two_level.gamma1;
        model["gamma2_rad_s"] = c.two_level.gamma2;
    } else if (c.experiment == "ssh-tzm") {
        model["v_rad_s"] = c.ssh.v;
        model["w_rad_s"] = c.ssh.w;
        model["delta_rad_s"] = c.ssh.delta;
        model["m_cells"] = c.ssh.m_cells;
        model["onsite_rad_s"] = c.ssh.onsite;
        model["gamma0_rad_s"] = c.ssh.gamma0;
    } else {
        model["hamiltonian_file"] = c.hamiltonian_file;
    }
    j["model"] = model;
    j["grid"] = {{"omega_min_rad_s", c.grid.omega_min},
                 {"omega_max_rad_s", c.grid.omega_max},
                 {"points", c.grid.points}};
    j["campaign"] = {{"fixed_site", c.campaign.fixed_site},
                     {"noise_sigma_rel", c.campaign.noise_sigma_rel},
                     {"seed", c.campaign.seed},
                     {"a0", {c.campaign.a0.real(), c.campaign.a0.imag()}}};
    json loop;
    if (c.loop.center_x) loop["center_phi_x_rad_s"] = *c.loop.center_x;
    if (c.loop.center_y) loop["center_phi_y_rad_s"] = *c.loop.center_y;
    if (c.loop.radius_x) loop["radius_x_rad_s"] = *c.loop.radius_x;
    if (c.loop.radius_y) loop["radius_y_rad_s"] = *c.loop.radius_y;
    loop["steps"] = c.loop.steps;
    loop["cycles"] = c.loop.cycles;
    loop["orientation"] = c.loop.orientation == Orientation::Ccw ? "ccw" : "cw";
    j["loop"] = loop;
    json retr;
    retr["source"] = c.retrieval.source == RetrievalConfig::Source::Exact ? "exact" : "retrieved";
    retr["method"] = c.retrieval.method == RetrieveOptions::Method::Auto      ? "auto"
                     : c.retrieval.method == RetrieveOptions::Method::PeakOnly ? "peak"
                                                                               : "fit";
    retr["n_modes"] = c.retrieval.n_modes;
    if (c.retrieval.target_omega) retr["target_omega_rad_s"] = *c.retrieval.target_omega;
    retr["band"] = c.retrieval.band;
    j["retrieval"] = retr;
    json formats = json::array();
    if (c.output.json) formats.push_back("json");
    if (c.output.csv) formats.push_back("csv");
    if (c.output.svg) formats.push_back("svg");
    j["output"] = {{"directory", c.output.directory}, {"formats", formats}};
    return j.dump(2);
}

}  // namespace levlab
