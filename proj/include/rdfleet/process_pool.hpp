#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rdfleet/storage.hpp"

namespace rdfleet {

struct PoolOptions {
  /// Worker processes. 0 runs tasks inline in the calling process.
  std::size_t workers = 1;
  /// Attempts per task: the first run plus one retry.
  int max_attempts = 2;
  /// Fault injection: the worker running this task index on its first attempt exits
  /// abruptly, as if it had crashed.
  std::optional<std::uint64_t> crash_on_first_attempt;
};

struct TaskOutcome {
  std::uint64_t index = 0;
  bool ok = false;
  Bytes payload;      ///< result bytes when ok
  std::string error;  ///< last failure message otherwise
  int attempts = 0;
};

/// Task body: index in, bytes out. Exceptions mark the attempt failed. In worker mode
/// the function runs in a forked child, so it must not rely on state written by
/// other tasks.
using TaskFunction = std::function<Bytes(std::uint64_t index)>;

/// Run one task per index on a pool of forked worker processes. Tasks are handed out
/// in index order to whichever worker is idle; a failed or crashed attempt is retried
/// once on a fresh worker. Outcomes come back in the order of `indices`, independent
/// of completion order.
std::vector<TaskOutcome> run_tasks(const std::vector<std::uint64_t>& indices, const TaskFunction& fn,
                                   const PoolOptions& options);

}  // namespace rdfleet
