#include "rdfleet/process_pool.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <deque>

namespace rdfleet {
namespace {

// Frames: task   = u64 slot | u32 attempt
//         result = u64 slot | u8 ok | u64 length | bytes

bool write_all(int fd, const void* data, std::size_t n) {
  const auto* p = static_cast<const char*>(data);
  while (n > 0) {
    const ssize_t w = ::write(fd, p, n);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    p += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, void* data, std::size_t n) {
  auto* p = static_cast<char*>(data);
  while (n > 0) {
    const ssize_t r = ::read(fd, p, n);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

[[noreturn]] void worker_main(int task_fd, int result_fd, const std::vector<std::uint64_t>& indices,
                              const TaskFunction& fn, const PoolOptions& options) {
  while (true) {
    std::uint64_t slot = 0;
    std::uint32_t attempt = 0;
    if (!read_all(task_fd, &slot, sizeof slot) || !read_all(task_fd, &attempt, sizeof attempt)) _exit(0);
    const auto index = indices[slot];
    if (attempt == 0 && options.crash_on_first_attempt == index) _exit(70);
    std::uint8_t ok = 1;
    Bytes out;
    try {
      out = fn(index);
    } catch (const std::exception& e) {
      ok = 0;
      const std::string msg = e.what();
      out.assign(msg.begin(), msg.end());
    } catch (...) {
      ok = 0;
      const std::string msg = "unknown exception";
      out.assign(msg.begin(), msg.end());
    }
    const std::uint64_t len = out.size();
    if (!write_all(result_fd, &slot, sizeof slot) || !write_all(result_fd, &ok, 1) ||
        !write_all(result_fd, &len, sizeof len) || !write_all(result_fd, out.data(), out.size())) {
      _exit(1);
    }
  }
}

struct Worker {
  pid_t pid = -1;
  int task_fd = -1;
  int result_fd = -1;
  std::optional<std::uint64_t> busy_slot;
};

class Pool {
 public:
  Pool(const std::vector<std::uint64_t>& indices, const TaskFunction& fn, const PoolOptions& options)
      : indices_(indices), fn_(fn), options_(options), outcomes_(indices.size()) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
      outcomes_[i].index = indices[i];
      pending_.push_back(i);
    }
  }

  ~Pool() {
    for (auto& w : workers_) {
      if (w.pid > 0) {
        ::kill(w.pid, SIGKILL);
        retire(w);
      }
    }
  }

  std::vector<TaskOutcome> run() {
    const std::size_t n_workers = std::min(options_.workers, indices_.size());
    workers_.resize(n_workers);
    for (auto& w : workers_) spawn(w);
    std::size_t remaining = indices_.size();
    while (remaining > 0) {
      for (auto& w : workers_) {
        if (!w.busy_slot && !pending_.empty()) dispatch(w);
      }
      std::vector<pollfd> fds;
      for (auto& w : workers_) fds.push_back({w.result_fd, POLLIN, 0});
      if (::poll(fds.data(), fds.size(), -1) < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("poll failed: ") + std::strerror(errno));
      }
      for (std::size_t i = 0; i < workers_.size(); ++i) {
        if (fds[i].revents == 0) continue;
        auto& w = workers_[i];
        if (collect(w)) --remaining;
      }
    }
    for (auto& w : workers_) retire(w);
    return std::move(outcomes_);
  }

 private:
  void spawn(Worker& w) {
    int task_pipe[2];
    int result_pipe[2];
    if (::pipe(task_pipe) != 0 || ::pipe(result_pipe) != 0) {
      throw Error(std::string("pipe failed: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw Error(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
      ::close(task_pipe[1]);
      ::close(result_pipe[0]);
      for (auto& other : workers_) {
        if (other.task_fd >= 0) ::close(other.task_fd);
        if (other.result_fd >= 0) ::close(other.result_fd);
      }
      worker_main(task_pipe[0], result_pipe[1], indices_, fn_, options_);
    }
    ::close(task_pipe[0]);
    ::close(result_pipe[1]);
    w = Worker{pid, task_pipe[1], result_pipe[0], std::nullopt};
  }

  void retire(Worker& w) {
    if (w.task_fd >= 0) ::close(w.task_fd);
    if (w.result_fd >= 0) ::close(w.result_fd);
    int status = 0;
    while (::waitpid(w.pid, &status, 0) < 0 && errno == EINTR) {
    }
    w = Worker{};
  }

  void dispatch(Worker& w) {
    const std::uint64_t slot = pending_.front();
    pending_.pop_front();
    const std::uint32_t attempt = static_cast<std::uint32_t>(outcomes_[slot].attempts);
    ++outcomes_[slot].attempts;
    w.busy_slot = slot;
    if (!write_all(w.task_fd, &slot, sizeof slot) || !write_all(w.task_fd, &attempt, sizeof attempt)) {
      // The worker is gone; its result pipe reports EOF and collect() handles it.
    }
  }

  // Returns true when a task reached a final outcome.
  bool collect(Worker& w) {
    std::uint64_t slot = 0;
    std::uint8_t ok = 0;
    std::uint64_t len = 0;
    Bytes payload;
    bool intact = read_all(w.result_fd, &slot, sizeof slot) && read_all(w.result_fd, &ok, 1) &&
                  read_all(w.result_fd, &len, sizeof len);
    if (intact) {
      payload.resize(len);
      intact = read_all(w.result_fd, payload.data(), len);
    }
    if (!intact) {
      const auto lost = w.busy_slot;
      retire(w);
      spawn(w);
      if (!lost) return false;
      return fail(*lost, "worker process exited while running the task");
    }
    w.busy_slot.reset();
    if (ok) {
      outcomes_[slot].ok = true;
      outcomes_[slot].payload = std::move(payload);
      outcomes_[slot].error.clear();
      return true;
    }
    return fail(slot, std::string(payload.begin(), payload.end()));
  }

  bool fail(std::uint64_t slot, std::string message) {
    auto& o = outcomes_[slot];
    o.error = std::move(message);
    if (o.attempts < options_.max_attempts) {
      pending_.push_front(slot);
      return false;
    }
    return true;
  }

  const std::vector<std::uint64_t>& indices_;
  const TaskFunction& fn_;
  const PoolOptions& options_;
  std::vector<TaskOutcome> outcomes_;
  std::deque<std::uint64_t> pending_;
  std::vector<Worker> workers_;
};

std::vector<TaskOutcome> run_inline(const std::vector<std::uint64_t>& indices, const TaskFunction& fn,
                                    const PoolOptions& options) {
  std::vector<TaskOutcome> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto& o = out[i];
    o.index = indices[i];
    while (o.attempts < options.max_attempts && !o.ok) {
      const bool crash = o.attempts == 0 && options.crash_on_first_attempt == o.index;
      ++o.attempts;
      try {
        if (crash) throw Error("injected crash");
        o.payload = fn(o.index);
        o.ok = true;
        o.error.clear();
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  }
  return out;
}

}  // namespace

std::vector<TaskOutcome> run_tasks(const std::vector<std::uint64_t>& indices, const TaskFunction& fn,
                                   const PoolOptions& options) {
  if (indices.empty()) return {};
  if (options.workers == 0) return run_inline(indices, fn, options);
  struct sigaction ignore {};
  struct sigaction previous {};
  ignore.sa_handler = SIG_IGN;
  sigemptyset(&ignore.sa_mask);
  ::sigaction(SIGPIPE, &ignore, &previous);
  try {
    auto out = Pool(indices, fn, options).run();
    ::sigaction(SIGPIPE, &previous, nullptr);
    return out;
  } catch (...) {
    ::sigaction(SIGPIPE, &previous, nullptr);
    throw;
  }
}

}  // namespace rdfleet
