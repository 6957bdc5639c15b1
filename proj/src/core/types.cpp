#include "rili/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rili/core/errors.hpp"

namespace rili {

double InteractionExperience::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

InteractionTrajectory InteractionExperience::trajectory() const {
  InteractionTrajectory traj;
  traj.points.reserve(steps.size());
  for (const auto& s : steps) traj.points.push_back({s.state, s.action});
  return traj;
}

void InteractionExperience::check_shape(const ExperienceShape& shape) const {
  if (static_cast<int>(steps.size()) != shape.horizon) {
    throw StructuralError("experience has " + std::to_string(steps.size()) +
                          " steps, expected " + std::to_string(shape.horizon));
  }
  for (const auto& s : steps) {
    if (s.state.size() != shape.state_dim || s.action.size() != shape.action_dim) {
      throw StructuralError("step dimensions do not match the environment");
    }
  }
}

InteractionExperience zero_experience(const ExperienceShape& shape) {
  InteractionExperience exp;
  exp.index = -1;
  exp.padding = true;
  exp.steps.assign(static_cast<std::size_t>(shape.horizon),
                   StepRecord{Vector::Zero(shape.state_dim), Vector::Zero(shape.action_dim), 0.0});
  return exp;
}

Vector flatten_experience(const InteractionExperience& exp, const ExperienceShape& shape) {
  exp.check_shape(shape);
  Vector flat(shape.flat_size());
  Eigen::Index k = 0;
  for (const auto& s : exp.steps) {
    flat.segment(k, shape.state_dim) = s.state;
    k += shape.state_dim;
    flat.segment(k, shape.action_dim) = s.action;
    k += shape.action_dim;
    flat[k++] = s.reward;
  }
  return flat;
}

InteractionExperience unflatten_experience(const Vector& flat, const ExperienceShape& shape,
                                           std::int64_t index) {
  if (flat.size() != shape.flat_size()) {
    throw StructuralError("flattened experience has wrong length");
  }
  InteractionExperience exp;
  exp.index = index;
  exp.steps.reserve(static_cast<std::size_t>(shape.horizon));
  Eigen::Index k = 0;
  for (int t = 0; t < shape.horizon; ++t) {
    StepRecord s;
    s.state = flat.segment(k, shape.state_dim);
    k += shape.state_dim;
    s.action = flat.segment(k, shape.action_dim);
    k += shape.action_dim;
    s.reward = flat[k++];
    exp.steps.push_back(std::move(s));
  }
  return exp;
}

InferredStrategy::InferredStrategy(const Storage& value) : value_(value) {
  if (!value_.allFinite()) throw StructuralError("inferred strategy has non-finite entries");
}

InferredStrategy InferredStrategy::from_vector(const Vector& v) {
  if (v.size() != kLatentDim) {
    throw StructuralError("inferred strategy must have " + std::to_string(kLatentDim) +
                          " entries, got " + std::to_string(v.size()));
  }
  return InferredStrategy(Storage(v));
}

bool is_permutation(const TowerOrder& order) {
  std::array<int, 4> sorted = order.order;
  std::sort(sorted.begin(), sorted.end());
  return sorted == std::array<int, 4>{0, 1, 2, 3};
}

namespace {

const char* variant_name(TowerVariant v) {
  switch (v) {
    case TowerVariant::kBottomUp: return "bottom_up";
    case TowerVariant::kTopDown: return "top_down";
    case TowerVariant::kMiddleOutA: return "middle_out_a";
    case TowerVariant::kMiddleOutB: return "middle_out_b";
    case TowerVariant::kEndsIn: return "ends_in";
  }
  return "?";
}

}  // namespace

std::string describe(const TrueStrategy& strategy) {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CircleAngle>) {
          out << "angle:" << s.radians;
        } else if constexpr (std::is_same_v<S, LaneIndex>) {
          out << "lane:" << s.lane;
        } else if constexpr (std::is_same_v<S, GoalIndex>) {
          out << "goal:" << s.goal;
        } else if constexpr (std::is_same_v<S, TowerOrder>) {
          out << "tower:" << s.order[0] << s.order[1] << s.order[2] << s.order[3];
        } else {
          out << "rule:" << variant_name(s.variant);
        }
      },
      strategy);
  return out.str();
}

}  // namespace rili
