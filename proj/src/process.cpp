#include "ompfuzz/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <thread>

extern char** environ;

namespace ompfuzz {

namespace {

using Clock = std::chrono::steady_clock;

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    for (int f : fd)
      if (f >= 0) ::close(f);
  }
  void close_end(int k) {
    if (fd[k] >= 0) ::close(fd[k]);
    fd[k] = -1;
  }
};

std::vector<std::string> build_env(const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos && overrides.contains(entry.substr(0, eq))) continue;
    out.push_back(std::move(entry));
  }
  for (const auto& [k, v] : overrides) out.push_back(k + "=" + v);
  return out;
}

std::vector<char*> c_strings(std::vector<std::string>& items) {
  std::vector<char*> out;
  for (auto& s : items) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

bool reap(pid_t pid, int& status, bool block) {
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, block ? 0 : WNOHANG);
    if (r == pid) return true;
    if (r == 0) return false;
    if (errno != EINTR) return true;
  }
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
  if (argv.empty()) throw SpawnError("empty command line");
  Pipe out_pipe;
  Pipe err_pipe;

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe.fd[1], 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe.fd[1], 2);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);
  posix_spawnattr_setpgroup(&attr, 0);
  sigset_t none;
  sigemptyset(&none);
  posix_spawnattr_setsigmask(&attr, &none);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGINT);
  sigaddset(&defaults, SIGPIPE);
  posix_spawnattr_setsigdefault(&attr, &defaults);

  std::vector<std::string> args = argv;
  std::vector<std::string> env = build_env(options.env);
  auto c_args = c_strings(args);
  auto c_env = c_strings(env);

  const auto start = Clock::now();
  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, c_args[0], &actions, &attr, c_args.data(), c_env.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw SpawnError("cannot execute '" + argv[0] + "': " + std::strerror(rc));
  out_pipe.close_end(1);
  err_pipe.close_end(1);

  ProcessResult result;
  const auto deadline = start + options.timeout;
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  std::array<Pipe*, 2> pipes{&out_pipe, &err_pipe};
  int status = 0;
  bool reaped = false;

  while (!result.timed_out) {
    std::array<pollfd, 2> fds{};
    nfds_t n = 0;
    std::array<int, 2> which{};
    for (int k = 0; k < 2; ++k) {
      if (pipes[k]->fd[0] >= 0) {
        fds[n] = {pipes[k]->fd[0], POLLIN, 0};
        which[n++] = k;
      }
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    if (n == 0) {
      // Both streams closed; wait for exit without overshooting the deadline.
      if (reap(pid, status, false)) {
        reaped = true;
        break;
      }
      std::this_thread::sleep_for(std::min(left, std::chrono::milliseconds(5)));
      continue;
    }
    const int ready = ::poll(fds.data(), n, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (ready < 0 && errno != EINTR) break;
    for (nfds_t k = 0; k < n; ++k) {
      if (!(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      char buf[8192];
      const ssize_t got = ::read(fds[k].fd, buf, sizeof buf);
      Pipe* p = pipes[which[k]];
      if (got <= 0) {
        if (got < 0 && errno == EINTR) continue;
        p->close_end(0);
      } else {
        std::string* sink = sinks[which[k]];
        const auto room = options.output_limit > sink->size() ? options.output_limit - sink->size() : 0;
        sink->append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(got)));
      }
    }
  }

  if (result.timed_out) {
    ::kill(-pid, SIGINT);
    const auto hard = Clock::now() + options.grace;
    while (!(reaped = reap(pid, status, false)) && Clock::now() < hard)
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    if (!reaped) {
      ::kill(-pid, SIGKILL);
      reap(pid, status, true);
    }
  } else if (!reaped) {
    reap(pid, status, true);
  }
  // Stragglers in the group (grandchildren) must not outlive the run.
  ::kill(-pid, SIGKILL);
  result.wall = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start);

  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

std::string describe_exit(const ProcessResult& r) {
  if (r.timed_out) return "timeout";
  if (r.term_signal != 0) return std::string("signal ") + std::to_string(r.term_signal) + " (" + ::strsignal(r.term_signal) + ")";
  return "exit " + std::to_string(r.exit_code);
}

}  // namespace ompfuzz
