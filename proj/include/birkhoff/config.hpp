#pragma once

#include "birkhoff/order_geometry.hpp"
#include "birkhoff/scenario.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace birkhoff {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioBlock {
    std::string name = "lv_cycle";
    std::map<std::string, double> params;
    std::vector<double> domain_lo;   // empty: scenario default
    std::vector<double> domain_hi;
};

struct ConeBlock {
    std::string matrix = "identity";   // "identity" or rows "a,b;c,d"
    double eta = 1e-9;
};

struct PipelineBlock {
    std::vector<int> depths{3, 4, 5, 6};
    double map_time = 1.0;
    int samples_per_box = 8;
    std::string padding_mode = "lipschitz";
    double padding = 0.0;
    double padding_factor = 1.0;
    double theta = 0.0;             // <= 0: 0.05 x attractor diameter
    double window = 60.0;           // close-return search window
    double horizon = 1e4;           // recurrent-time and A.1 horizon
    int ip_generators = 10;
    double backward_time = 50.0;
    std::string cell_target = "origin";   // origin | nearest | plus_infinity | minus_infinity
    std::vector<double> cell_point;       // for cell_target = nearest
    std::string cell_side = "upper";
    std::string compare_target = "none";
    std::string compare_side = "lower";
    std::vector<int> cell_nodes{21, 21};
    std::vector<double> cell_half_width{0.25, 0.25};
    std::vector<double> cell_center{0.0, 0.0};
    double cell_tol = 1e-4;
    double cell_flow_time = 2.0;    // invariance audit flows for T/2 and T
    std::vector<double> entropy_horizons{20.0, 40.0, 80.0};
    std::vector<double> entropy_epsilons{0.05, 0.1};
    double entropy_threshold = 0.05;
    double margin = 1e-6;
    double shell = 1e-3;
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
};

struct RunBlock {
    std::uint64_t seed = 1;
};

struct RunConfig {
    ScenarioBlock scenario;
    ConeBlock cone;
    PipelineBlock pipeline;
    RunBlock run;

    bool operator==(const RunConfig&) const;
};

/// Parses the four-block INI text; unknown blocks or keys and malformed or
/// out-of-range values throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

/// Builds the configured scenario and cone; errors become ConfigError.
Scenario build_scenario(const RunConfig& cfg);
ConeSpec build_cone(const RunConfig& cfg, int dimension);

}  // namespace birkhoff
