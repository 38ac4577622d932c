#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "darkspace/acceptance.hpp"
#include "darkspace/cli/config.hpp"

namespace darkspace::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitNumerical = 2,
    kExitCheckFailed = 3,
};

/// Full command line entry point. `out` receives reports, `err` diagnostics.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs one validated experiment and writes its artifacts.
int run_experiment(const RunConfig& config, std::ostream& out, std::ostream& err);

nlohmann::json acceptance_json(const std::vector<CriterionResult>& results);
void print_acceptance_table(const std::vector<CriterionResult>& results, std::ostream& out);

}  // namespace darkspace::cli
