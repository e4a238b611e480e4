#pragma once

#include <CLI11.hpp>

namespace pseudoqe::cli {

// Registers every subcommand on the app. Each handler throws ValidationError
// for bad input (exit 1); sampler failures and divergence escape as their
// own types (exit 2).
void register_data_commands(CLI::App& app);
void register_model_commands(CLI::App& app);
void register_eval_commands(CLI::App& app);

}  // namespace pseudoqe::cli
