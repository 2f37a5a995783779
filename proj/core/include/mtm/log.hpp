// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace mtm::log {

enum class Level { kDebug = 0, kInfo = 1, kWarning = 2, kQuiet = 3 };

/// Messages below the threshold are dropped. Default: kInfo.
void set_level(Level level);
Level level();

void debug(std::string_view message);
void info(std::string_view message);
void warning(std::string_view message);

}  // namespace mtm::log
