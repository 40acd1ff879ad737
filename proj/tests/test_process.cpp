#include <doctest.h>

#include <csignal>

#include "ompfuzz/process.hpp"
#include "support.hpp"

using namespace ompfuzz;
using namespace std::chrono_literals;

TEST_CASE("captures stdout, stderr and exit code") {
  ProcessOptions o;
  o.timeout = 10s;
  const auto r = run_process({"sh", "-c", "echo out; echo err >&2; exit 3"}, o);
  CHECK(r.out == "out\n");
  CHECK(r.err == "err\n");
  CHECK(r.exit_code == 3);
  CHECK(r.term_signal == 0);
  CHECK_FALSE(r.timed_out);
  CHECK(describe_exit(r) == "exit 3");
}

TEST_CASE("environment overrides reach the child") {
  ProcessOptions o;
  o.env = {{"OMPFUZZ_PROBE", "forty-two"}};
  CHECK(run_process({"sh", "-c", "printf %s \"$OMPFUZZ_PROBE\""}, o).out == "forty-two");
}

TEST_CASE("signals are reported") {
  const auto r = run_process({support::fixture("segv").string()}, {});
  CHECK(r.term_signal == SIGSEGV);
}

TEST_CASE("timeout interrupts then kills the process group") {
  ProcessOptions o;
  o.timeout = 500ms;
  o.grace = 300ms;
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_process({support::fixture("hang").string()}, o);
  const auto took = std::chrono::steady_clock::now() - start;
  CHECK(r.timed_out);
  CHECK(r.wall >= 500ms);
  CHECK(took < 5s);
  CHECK(r.term_signal == SIGINT);

  // A child that ignores SIGINT is killed after the grace period.
  const auto stubborn = run_process({"sh", "-c", "trap '' INT; while :; do sleep 1; done"}, o);
  CHECK(stubborn.timed_out);
  CHECK(stubborn.term_signal == SIGKILL);
  CHECK(stubborn.wall < 5s);
}

TEST_CASE("missing executables raise SpawnError") {
  CHECK_THROWS_AS(run_process({"/nonexistent/compiler-xyz"}, {}), SpawnError);
  CHECK_THROWS_AS(run_process({}, {}), SpawnError);
}

TEST_CASE("large output is capped, not deadlocked") {
  ProcessOptions o;
  o.output_limit = 1000;
  const auto r = run_process({"sh", "-c", "head -c 5000000 /dev/zero"}, o);
  CHECK(r.exit_code == 0);
  CHECK(r.out.size() == 1000);
}
