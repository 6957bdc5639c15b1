#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rili::harness {

struct GradReport {
  std::string network;
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  int instances = 0;
};

// Finite-difference checks of every trained network (GRU encoder, decoder,
// actor, critics) on small random instances, in double precision.
std::vector<GradReport> run_gradient_checks(int instances, std::uint64_t seed);

}  // namespace rili::harness
