#pragma once

#include "coniso/config.hpp"

#include <string>
#include <vector>

namespace coniso {

// One row of the bundled verification suite.
struct VerifyCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;   // worst observed value
    double threshold = 0.0;  // bound it is held against
    std::string note;
};

// Runs every module invariant at desk scale: the config's link and metric
// where applicable, canonical fixtures otherwise. Solver-backed checks fall
// back to a built-in perturbed metric when the config link lacks the spectral
// gap, so the suite stays meaningful for borderline inputs.
std::vector<VerifyCheck> run_verification(const RunConfig& cfg);

// Subcommand dispatch. Returns the process exit code:
//   0 success, 1 solver/eigensolver failure, 2 config parse error,
//   3 hypothesis violation.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace coniso
