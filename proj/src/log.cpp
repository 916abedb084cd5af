#include "strobo/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

namespace strobo {

spdlog::logger& log() {
  static auto logger = [] {
    auto l = spdlog::stderr_logger_mt("strobo");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *logger;
}

}  // namespace strobo
