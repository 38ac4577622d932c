#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "darkspace/acceptance.hpp"
#include "darkspace/analysis.hpp"

namespace darkspace::cli {

enum class Experiment { Spin32Purity, Sweep, GaugeCheck, EffectiveVsFull, Custom };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Config-driven protocol: U(s) = prod_k exp(i alpha_k(s) G_k), jump L_rot.
struct CustomSpec {
    ComplexMatrix jump;
    std::vector<ComplexMatrix> generators;
    std::vector<AnglePath> angles;
};

struct GaugeOptions {
    double chi = 0.44879895051282759;  // pi / 7
    GaugeProfile profile = GaugeProfile::Cyclic;
    /// Draw the dark-block generator from the seed instead of chi sigma_z.
    bool random = false;
};

struct RunConfig {
    Experiment experiment = Experiment::Spin32Purity;
    PathSpec path{AnglePath::linear(1), AnglePath::constant(0.0)};
    std::vector<double> gamma_t{200.0};
    BlochVector n0{0.0, 0.0, 1.0};
    /// Explicit dark-block initial state; overrides n0.
    std::optional<ComplexMatrix> rho0;
    double rtol = 1e-9;
    double atol = 1e-12;
    double kernel_tol = 1e-10;
    int checkpoints = 64;
    std::uint64_t seed = 0;
    GaugeOptions gauge;
    std::optional<CustomSpec> custom;
    std::string output_dir = "darkspace-out";
    std::string prefix;  ///< defaults to the experiment name
    bool gnuplot = false;

    std::vector<std::string> warnings;
};

/// Reads a JSON config. Unknown keys are rejected. Throws ValidationError.
RunConfig parse_config(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Checks every invariant and collects warnings (gammaT < 10). Throws
/// ValidationError.
void validate(RunConfig& config);

/// "1,2,3" -> {1, 2, 3}. Throws ValidationError.
std::vector<double> parse_number_list(const std::string& text);

ComplexMatrix matrix_from_json(const nlohmann::json& j);
AnglePath angle_from_json(const nlohmann::json& j);

/// Overrides from a fixture file; unknown keys are rejected.
AcceptanceFixture load_fixture(const std::string& path);

}  // namespace darkspace::cli
