#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A category, functor, presheaf or topology violates one of its laws.
struct LawViolation : Error {
  using Error::Error;
};

// Malformed or inconsistent input description.
struct InputError : Error {
  using Error::Error;
};

// An enumeration would exceed the global size cap.
struct CapExceeded : Error {
  CapExceeded(const std::string& what, std::size_t needed, std::size_t cap)
      : Error(what + ": needs " + std::to_string(needed) + " elements, cap is " +
              std::to_string(cap)),
        needed(needed),
        cap(cap) {}
  std::size_t needed;
  std::size_t cap;
};

// A family has a fiber too large for the universe bound.
struct BoundOverflow : Error {
  BoundOverflow(const std::string& what, int required)
      : Error(what + " (requires bound >= " + std::to_string(required) + ")"),
        required(required) {}
  int required;
};

// Global element cap; TOPOSFORGE_CAP overrides the default of 10^6.
std::size_t size_cap();
void set_size_cap(std::size_t cap);
void guard_size(std::size_t n, const std::string& what);

}  // namespace tf
