#include "toposforge/errors.hpp"

#include <atomic>
#include <cstdlib>

namespace tf {

namespace {

std::size_t initial_cap() {
  if (const char* env = std::getenv("TOPOSFORGE_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1000000;
}

std::atomic<std::size_t>& cap_slot() {
  static std::atomic<std::size_t> cap{initial_cap()};
  return cap;
}

}  // namespace

std::size_t size_cap() { return cap_slot().load(); }

void set_size_cap(std::size_t cap) { cap_slot().store(cap == 0 ? 1 : cap); }

void guard_size(std::size_t n, const std::string& what) {
  if (n > size_cap()) throw CapExceeded(what, n, size_cap());
}

}  // namespace tf
