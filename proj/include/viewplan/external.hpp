#pragma once

#include "viewplan/geometry.hpp"
#include "viewplan/metrics.hpp"

#include <chrono>
#include <filesystem>
#include <string>

namespace viewplan {

// Runs an external reconstruction tool on a plan.
//
// The adapter writes `plan.json` into the work directory, runs `command`
// through /bin/sh with the work directory as cwd and expects exit status 0
// and a `recon.ply` file there. The reward is -chamfer(reference, recon), or
// worst_case_reward when the reconstruction is empty.
struct AdapterConfig {
  std::string command;
  std::filesystem::path reference_ply;
  std::chrono::seconds timeout{600};
  double worst_case_reward = -10.0;
  ChamferVariant chamfer = ChamferVariant::kEuclidean;
};

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
};

// Runs `command` via /bin/sh -c in `workdir`, killing it after `timeout`.
ProcessResult run_command(const std::string& command, const std::filesystem::path& workdir,
                          std::chrono::milliseconds timeout);

double reward_external_plan(const ViewPlan& plan, const AdapterConfig& config,
                            const std::filesystem::path& workdir);

double reward_external(const Vector& theta, const SearchSpace& space, const AdapterConfig& config,
                       const std::filesystem::path& workdir);

}  // namespace viewplan
