#include "atomcav/errors.hpp"

#include <iostream>
#include <mutex>

namespace atomcav {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}

}  // namespace

void set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  handler() = h ? std::move(h) : [](const std::string&) {};
}

void warn(const std::string& message) {
  std::lock_guard lock(handler_mutex());
  handler()(message);
}

}  // namespace atomcav
