#pragma once

#include <filesystem>
#include <ostream>

#include "config.hpp"

namespace widthflow::cli {

// Exit codes shared by every subcommand.
enum ExitCode { kOk = 0, kViolation = 1, kUsage = 2 };

struct RunContext {
  int jobs = 1;
  std::ostream& out;
  std::ostream& err;
};

int cmd_check_speed(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_flow(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_width(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_verify(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_report(const std::filesystem::path& dir, const RunContext& ctx);

// Parses argv and dispatches; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace widthflow::cli
