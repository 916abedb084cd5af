#pragma once

#include <spdlog/spdlog.h>

namespace strobo {

/// Library diagnostics go to stderr so CLI reports on stdout stay clean.
spdlog::logger& log();

}  // namespace strobo
