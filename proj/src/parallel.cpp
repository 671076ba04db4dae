#include "riskswitch/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace riskswitch {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("RISKSWITCH_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& threads_setting() {
  static std::atomic<int> value{initial_threads()};
  return value;
}

}  // namespace

int thread_count() noexcept { return threads_setting().load(); }

void set_thread_count(int n) noexcept { threads_setting().store(n > 0 ? n : initial_threads()); }

}  // namespace riskswitch
