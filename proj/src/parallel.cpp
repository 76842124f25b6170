#include "treecycles/parallel.hpp"

namespace treecycles {

namespace {
std::atomic<int> g_workers{0};
}

int default_workers() {
  int w = g_workers.load();
  if (w > 0) return w;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_workers(int workers) { g_workers.store(workers); }

}  // namespace treecycles
