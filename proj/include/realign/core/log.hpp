#pragma once

#include <cstdio>
#include <mutex>
#include <string>

namespace realign::logging {

enum class Level { Debug = 0, Info = 1, Warn = 2, Quiet = 3 };

Level level();
void set_level(Level lvl);

void emit(Level lvl, const std::string& msg);

inline void debug(const std::string& msg) { emit(Level::Debug, msg); }
inline void info(const std::string& msg) { emit(Level::Info, msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, msg); }

}  // namespace realign::logging
