#include "realign/core/log.hpp"

#include <atomic>
#include <cstdlib>

namespace realign::logging {

namespace {

Level initial_level() {
  const char* env = std::getenv("REALIGNFIT_LOG");
  if (!env) return Level::Warn;
  std::string v(env);
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  if (v == "warn") return Level::Warn;
  if (v == "quiet") return Level::Quiet;
  return Level::Warn;
}

std::atomic<Level>& level_ref() {
  static std::atomic<Level> lvl{initial_level()};
  return lvl;
}

std::mutex& io_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level level() { return level_ref().load(); }

void set_level(Level lvl) { level_ref().store(lvl); }

void emit(Level lvl, const std::string& msg) {
  if (lvl < level()) return;
  const char* tag = lvl == Level::Debug ? "debug" : lvl == Level::Info ? "info" : "warn";
  std::lock_guard<std::mutex> lock(io_mutex());
  std::fprintf(stderr, "[realignfit %s] %s\n", tag, msg.c_str());
}

}  // namespace realign::logging
