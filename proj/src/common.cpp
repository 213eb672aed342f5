#include "mafem/common.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace mafem {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("MAXWELL_AFEM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return 1;
}

std::atomic<int> g_threads{initial_threads()};

} // namespace

int num_threads() { return g_threads.load(); }

void set_num_threads(int n) {
  if (n < 1) throw ArgumentError("thread count must be >= 1");
  g_threads.store(n);
}

} // namespace mafem
