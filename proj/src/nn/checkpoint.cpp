#include "rili/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rili::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'R', 'I', 'L', 'I', 'C', 'K', 'P', 'T'};

template <typename V>
void write_pod(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V read_pod(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw StructuralError("checkpoint: truncated file");
  return v;
}

template <typename T>
void write_matrix(std::ostream& out, const Matrix<T>& m) {
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(T)));
}

template <typename T>
Matrix<T> read_matrix(std::istream& in) {
  const auto rows = read_pod<std::uint64_t>(in);
  const auto cols = read_pod<std::uint64_t>(in);
  if (rows > (1u << 26) || cols > (1u << 26)) throw StructuralError("checkpoint: implausible tensor shape");
  Matrix<T> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(T)));
  if (!in) throw StructuralError("checkpoint: truncated tensor");
  return m;
}

}  // namespace

void Checkpoint::put(const std::string& name, Payload payload) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    records_[it->second].payload = std::move(payload);
    return;
  }
  index_[name] = records_.size();
  records_.push_back({name, std::move(payload)});
}

void Checkpoint::put_tensor(const std::string& name, const Matrix<float>& m) { put(name, m); }
void Checkpoint::put_tensor(const std::string& name, const Matrix<double>& m) { put(name, m); }
void Checkpoint::put_text(const std::string& name, std::string text) { put(name, std::move(text)); }

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  for (const auto& r : records_) out.push_back(r.name);
  return out;
}

template <typename T>
Matrix<T> Checkpoint::tensor(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("checkpoint: missing record " + name);
  const auto& payload = records_[it->second].payload;
  if (const auto* m = std::get_if<Matrix<T>>(&payload)) return *m;
  throw StructuralError("checkpoint: record " + name + " has a different type");
}

template Matrix<float> Checkpoint::tensor<float>(const std::string&) const;
template Matrix<double> Checkpoint::tensor<double>(const std::string&) const;

const std::string& Checkpoint::text(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("checkpoint: missing record " + name);
  if (const auto* s = std::get_if<std::string>(&records_[it->second].payload)) return *s;
  throw StructuralError("checkpoint: record " + name + " is not text");
}

void Checkpoint::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("checkpoint: cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(records_.size()));
  for (const auto& r : records_) {
    std::uint8_t kind = 3;
    if (std::holds_alternative<Matrix<float>>(r.payload)) kind = 1;
    if (std::holds_alternative<Matrix<double>>(r.payload)) kind = 2;
    write_pod<std::uint8_t>(out, kind);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    if (kind == 1) {
      write_matrix(out, std::get<Matrix<float>>(r.payload));
    } else if (kind == 2) {
      write_matrix(out, std::get<Matrix<double>>(r.payload));
    } else {
      const auto& s = std::get<std::string>(r.payload);
      write_pod<std::uint64_t>(out, s.size());
      out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
  }
  if (!out) throw ConfigError("checkpoint: write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw StructuralError("checkpoint: bad magic");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) throw StructuralError("checkpoint: unsupported version " + std::to_string(version));
  const auto count = read_pod<std::uint32_t>(in);
  Checkpoint ckpt;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto kind = read_pod<std::uint8_t>(in);
    const auto len = read_pod<std::uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (kind == 1) {
      ckpt.put(name, read_matrix<float>(in));
    } else if (kind == 2) {
      ckpt.put(name, read_matrix<double>(in));
    } else if (kind == 3) {
      const auto n = read_pod<std::uint64_t>(in);
      std::string s(n, '\0');
      in.read(s.data(), static_cast<std::streamsize>(n));
      if (!in) throw StructuralError("checkpoint: truncated text");
      ckpt.put(name, std::move(s));
    } else {
      throw StructuralError("checkpoint: unknown record kind");
    }
  }
  return ckpt;
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (records_.size() != other.records_.size()) return false;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].name != other.records_[i].name) return false;
    if (records_[i].payload.index() != other.records_[i].payload.index()) return false;
    const bool same = std::visit(
        [&](const auto& a) {
          using P = std::decay_t<decltype(a)>;
          const auto& b = std::get<P>(other.records_[i].payload);
          if constexpr (std::is_same_v<P, std::string>) {
            return a == b;
          } else {
            return a.rows() == b.rows() && a.cols() == b.cols() &&
                   std::memcmp(a.data(), b.data(), a.size() * sizeof(typename P::Scalar)) == 0;
          }
        },
        records_[i].payload);
    if (!same) return false;
  }
  return true;
}

}  // namespace rili::nn
