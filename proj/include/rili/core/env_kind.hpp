#pragma once

#include <string>
#include <string_view>

#include "rili/core/errors.hpp"

namespace rili {

enum class EnvKind { kCircle, kDriving, kRobot, kTower };

inline std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kCircle: return "circle";
    case EnvKind::kDriving: return "driving";
    case EnvKind::kRobot: return "robot";
    case EnvKind::kTower: return "tower";
  }
  return "unknown";
}

inline EnvKind parse_env_kind(std::string_view name) {
  if (name == "circle") return EnvKind::kCircle;
  if (name == "driving") return EnvKind::kDriving;
  if (name == "robot") return EnvKind::kRobot;
  if (name == "tower") return EnvKind::kTower;
  throw ConfigError("unknown environment '" + std::string(name) + "'");
}

}  // namespace rili
