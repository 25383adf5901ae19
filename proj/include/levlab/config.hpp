#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levlab/geometry.hpp"
#include "levlab/models.hpp"
#include "levlab/retrieval.hpp"
#include "levlab/types.hpp"

namespace levlab {

struct GridConfig {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int points = 0;

    std::vector<double> make() const;
};

struct CampaignConfig {
    int fixed_site = 1;
    double noise_sigma_rel = 0.0;
    std::uint64_t seed = 1;
    cplx a0{1.0, 0.0};
};

struct LoopConfig {
    std::optional<double> center_x, center_y, radius_x, radius_y;
    int steps = 200;
    int cycles = 1;
    Orientation orientation = Orientation::Ccw;
};

struct RetrievalConfig {
    enum class Source { Exact, Retrieved } source = Source::Exact;
    RetrieveOptions::Method method = RetrieveOptions::Method::Auto;
    int n_modes = 0;
    std::optional<double> target_omega;
    int band = 0;
};

struct OutputConfig {
    std::string directory = "out";
    bool json = true, csv = true, svg = true;
};

/// Parsed run configuration; exactly one experiment, unknown keys rejected.
struct RunConfig {
    std::string experiment;  // "two-level-berry" | "ssh-tzm" | "custom"
    TwoLevelParams two_level{9016.0, -41.2, -19.7, -40.8, 0.0, 0.0};
    SshParams ssh{-76.0, -149.8, -73.8, 6, 9016.0, -41.2};
    std::string hamiltonian_file;  // custom experiment: path to a Hamiltonian JSON
    GridConfig grid;
    CampaignConfig campaign;
    LoopConfig loop;
    RetrievalConfig retrieval;
    OutputConfig output;
};

/// Parse a config document; throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Full configuration echo with every defaulted value filled in.
std::string effective_config_json(const RunConfig& c);

}  // namespace levlab
