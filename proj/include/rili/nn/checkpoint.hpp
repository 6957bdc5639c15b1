#pragma once

// Versioned binary container for parameters and optimizer state.
//
// Layout (little-endian):
//   "RILICKPT" | u32 version | u32 record_count | records...
//   record: u8 kind | u32 name_len | name bytes | payload
//     kind 1 (f32 tensor) / 2 (f64 tensor): u64 rows | u64 cols | column-major data
//     kind 3 (text): u64 length | bytes
// Records keep insertion order; reload is bit-exact.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "rili/nn/adam.hpp"
#include "rili/nn/param_set.hpp"

namespace rili::nn {

class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void put_tensor(const std::string& name, const Matrix<float>& m);
  void put_tensor(const std::string& name, const Matrix<double>& m);
  void put_text(const std::string& name, std::string text);
  void put_int(const std::string& name, std::int64_t v) { put_text(name, std::to_string(v)); }

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  std::vector<std::string> names() const;

  template <typename T>
  Matrix<T> tensor(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  std::int64_t integer(const std::string& name) const { return std::stoll(text(name)); }

  template <typename T>
  void put_params(const std::string& prefix, const ParamSet<T>& params) {
    for (const auto& e : params.entries()) put_tensor(prefix + "/" + e.name, e.value);
  }

  // Loads into an already-shaped parameter set; shapes must match.
  template <typename T>
  void get_params(const std::string& prefix, ParamSet<T>& params) const {
    for (std::size_t i = 0; i < params.size(); ++i) {
      Matrix<T> m = tensor<T>(prefix + "/" + params.name(i));
      if (m.rows() != params.value(i).rows() || m.cols() != params.value(i).cols()) {
        throw StructuralError("checkpoint: shape mismatch for " + prefix + "/" + params.name(i));
      }
      params.value(i) = std::move(m);
    }
    params.bump_version();
  }

  template <typename T>
  void put_adam(const std::string& prefix, const Adam<T>& opt) {
    put_int(prefix + "/steps", opt.steps());
    const auto& c = opt.config();
    Matrix<double> hyper(4, 1);
    hyper << c.learning_rate, c.beta1, c.beta2, c.epsilon;
    put_tensor(prefix + "/hyper", hyper);
    for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
      put_tensor(prefix + "/m" + std::to_string(i), opt.first_moments()[i]);
      put_tensor(prefix + "/v" + std::to_string(i), opt.second_moments()[i]);
    }
  }

  template <typename T>
  void get_adam(const std::string& prefix, Adam<T>& opt) const {
    Gradients<T> m, v;
    for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
      m.push_back(tensor<T>(prefix + "/m" + std::to_string(i)));
      v.push_back(tensor<T>(prefix + "/v" + std::to_string(i)));
    }
    const Matrix<double> hyper = tensor<double>(prefix + "/hyper");
    opt.config() = AdamConfig{hyper(0, 0), hyper(1, 0), hyper(2, 0), hyper(3, 0)};
    opt.restore(integer(prefix + "/steps"), std::move(m), std::move(v));
  }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  bool operator==(const Checkpoint& other) const;

 private:
  using Payload = std::variant<Matrix<float>, Matrix<double>, std::string>;
  struct Record {
    std::string name;
    Payload payload;
  };
  void put(const std::string& name, Payload payload);

  std::vector<Record> records_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace rili::nn
