// SPDX-License-Identifier: Apache-2.0
#include "mtm/log.hpp"

#include <atomic>
#include <iostream>

namespace mtm::log {
namespace {

std::atomic<Level> g_level{Level::kInfo};

void emit(Level lvl, const char* tag, std::string_view message) {
  if (lvl < g_level.load(std::memory_order_relaxed)) return;
  std::clog << '[' << tag << "] " << message << '\n';
}

}  // namespace

void set_level(Level level) { g_level.store(level, std::memory_order_relaxed); }
Level level() { return g_level.load(std::memory_order_relaxed); }

void debug(std::string_view message) { emit(Level::kDebug, "debug", message); }
void info(std::string_view message) { emit(Level::kInfo, "info", message); }
void warning(std::string_view message) { emit(Level::kWarning, "warn", message); }

}  // namespace mtm::log
