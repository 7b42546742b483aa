#include "lsw/common.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace lsw {

std::size_t worker_count() {
  if (const char* env = std::getenv("LSW_THREADS")) {
    try {
      auto v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace lsw
