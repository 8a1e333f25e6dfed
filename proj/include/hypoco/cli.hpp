#pragma once

namespace hypoco::cli {

// argv-style entry point. Exit codes: 0 success (feasible certificate or
// passing checks), 2 infeasible rate or failed validation, 1 usage and
// config errors.
int run_cli(int argc, const char* const* argv);

}  // namespace hypoco::cli
