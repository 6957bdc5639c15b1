#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rili/core/errors.hpp"

namespace rili::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Named dense parameters of one network. Shapes are fixed at add() time; the
// version counter is bumped by every optimizer step.
template <typename T>
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Matrix<T> value;
  };

  std::size_t add(std::string name, Matrix<T> value) {
    entries_.push_back({std::move(name), std::move(value)});
    return entries_.size() - 1;
  }

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_.at(i).name; }
  Matrix<T>& value(std::size_t i) { return entries_.at(i).value; }
  const Matrix<T>& value(std::size_t i) const { return entries_.at(i).value; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }

  std::size_t num_scalars() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += static_cast<std::size_t>(e.value.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& e : entries_) {
      if (!e.value.allFinite()) return false;
    }
    return true;
  }

  bool same_shapes(const ParamSet& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (value(i).rows() != other.value(i).rows() || value(i).cols() != other.value(i).cols()) {
        return false;
      }
    }
    return true;
  }

  std::vector<T> flatten() const {
    std::vector<T> flat;
    flat.reserve(num_scalars());
    for (const auto& e : entries_) flat.insert(flat.end(), e.value.data(), e.value.data() + e.value.size());
    return flat;
  }

  void assign_flat(std::span<const T> flat) {
    if (flat.size() != num_scalars()) throw StructuralError("flat parameter vector has wrong size");
    std::size_t k = 0;
    for (auto& e : entries_) {
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), e.value.size(), e.value.data());
      k += static_cast<std::size_t>(e.value.size());
    }
  }

  void copy_values_from(const ParamSet& other) {
    if (!same_shapes(other)) throw StructuralError("parameter shapes differ");
    for (std::size_t i = 0; i < size(); ++i) value(i) = other.value(i);
    bump_version();
  }

  // this <- (1 - tau) * this + tau * source
  void soft_update_from(const ParamSet& source, T tau) {
    if (!same_shapes(source)) throw StructuralError("parameter shapes differ");
    for (std::size_t i = 0; i < size(); ++i) {
      value(i) = (T(1) - tau) * value(i) + tau * source.value(i);
    }
    bump_version();
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<U>());
    return out;
  }

  // FNV-1a over the raw parameter bytes; equal fingerprints mean bit-equal
  // parameters for all practical purposes.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& e : entries_) {
      const auto* bytes = reinterpret_cast<const unsigned char*>(e.value.data());
      for (std::size_t i = 0; i < static_cast<std::size_t>(e.value.size()) * sizeof(T); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
      }
    }
    return h;
  }

 private:
  std::vector<Entry> entries_;
  std::uint64_t version_ = 0;
};

template <typename T>
using Gradients = std::vector<Matrix<T>>;

}  // namespace rili::nn
