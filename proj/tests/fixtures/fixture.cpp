// Stand-in for a generated test binary. The mode is fixed at build time.
#include <csignal>
#include <cstdio>
#include <thread>

int main() {
#if defined(FIXTURE_MODE_ok)
  std::printf("comp=1.5\ntime_us=1234\n");
#elif defined(FIXTURE_MODE_short)
  std::printf("comp=1.5\ntime_us=500\n");
#elif defined(FIXTURE_MODE_badout)
  std::printf("result: 1.5\n");
#elif defined(FIXTURE_MODE_segv)
  std::fflush(stdout);
  std::raise(SIGSEGV);
#elif defined(FIXTURE_MODE_hang)
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(1));
#endif
  return 0;
}
