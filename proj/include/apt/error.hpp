#pragma once

#include <stdexcept>
#include <string>

namespace apt {

// Mirrors apt_status in apt.h; values are part of the C ABI.
enum class Errc : int {
  invalid_argument = 1,
  io = 2,
  parse = 3,
  empty_graph = 4,
  format = 5,
  version = 6,
  numerical = 7,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(Errc::invalid_argument, what);
}

}  // namespace apt
