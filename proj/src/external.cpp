#include "viewplan/external.hpp"

#include "viewplan/errors.hpp"
#include "viewplan/io.hpp"

#include <csignal>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <sys/wait.h>
#include <unistd.h>

namespace viewplan {

namespace fs = std::filesystem;

namespace {

// Invocations sharing a work directory are serialized.
std::mutex& workdir_mutex(const fs::path& workdir) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_mutex);
  auto& slot = registry[fs::weakly_canonical(workdir).string()];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

}  // namespace

ProcessResult run_command(const std::string& command, const fs::path& workdir,
                          std::chrono::milliseconds timeout) {
  const std::string dir = workdir.string();
  const pid_t pid = ::fork();
  if (pid < 0) throw AdapterError("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(dir.c_str()) != 0) ::_exit(126);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto wait = std::chrono::milliseconds(1);
  while (true) {
    int status = 0;
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      ProcessResult res;
      res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      return res;
    }
    if (r < 0) throw AdapterError("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return {-1, true};
    }
    std::this_thread::sleep_for(wait);
    wait = std::min(wait * 2, std::chrono::milliseconds(50));
  }
}

double reward_external_plan(const ViewPlan& plan, const AdapterConfig& config, const fs::path& workdir) {
  if (config.command.empty()) throw AdapterError("adapter command is empty");
  const PointCloud reference = read_ply(config.reference_ply);
  fs::create_directories(workdir);
  std::lock_guard lock(workdir_mutex(workdir));

  const fs::path recon_path = workdir / "recon.ply";
  fs::remove(recon_path);
  write_plan(plan, workdir / "plan.json");
  const auto result = run_command(config.command, workdir, config.timeout);
  if (result.timed_out) throw AdapterError("adapter command timed out");
  if (result.exit_code != 0)
    throw AdapterError("adapter command exited with status " + std::to_string(result.exit_code));
  if (!fs::exists(recon_path)) throw AdapterError("adapter command did not produce recon.ply");
  PointCloud recon;
  try {
    recon = read_ply(recon_path);
  } catch (const FormatError& e) {
    throw AdapterError(std::string("unparsable recon.ply: ") + e.what());
  }
  if (recon.empty()) return config.worst_case_reward;
  return -chamfer_distance(reference, recon, config.chamfer);
}

double reward_external(const Vector& theta, const SearchSpace& space, const AdapterConfig& config,
                       const fs::path& workdir) {
  return reward_external_plan(decode_plan(theta, space), config, workdir);
}

}  // namespace viewplan
