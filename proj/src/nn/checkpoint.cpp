// SPDX-License-Identifier: Apache-2.0
#include "handact/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace handact::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little endian");

namespace {

constexpr char kMagic[8] = {'H', 'N', 'D', 'A', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (n > s_.size() - pos_) throw NnError(NnError::Kind::CheckpointError, "checkpoint truncated");
    const char* p = s_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_parameters(const ParameterList& params) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) put<std::uint64_t>(out, d);
    out.append(reinterpret_cast<const char*>(p->value.data()), p->value.size() * sizeof(double));
  }
  return out;
}

void deserialize_parameters(const std::string& blob, const ParameterList& params) {
  Reader in(blob);
  if (std::memcmp(in.take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0) {
    throw NnError(NnError::Kind::CheckpointError, "not a checkpoint (bad magic)");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw NnError(NnError::Kind::CheckpointError,
                  "unsupported checkpoint version " + std::to_string(version));
  }
  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;

  const auto count = in.get<std::uint32_t>();
  std::size_t loaded = 0;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = in.get<std::uint32_t>();
    const std::string name(in.take(name_len), name_len);
    const auto rank = in.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(in.get<std::uint64_t>());
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw NnError(NnError::Kind::CheckpointError, "unexpected tensor '" + name + "' in checkpoint");
    }
    Tensor& dst = it->second->value;
    if (dst.shape() != shape) {
      throw NnError(NnError::Kind::CheckpointError, "tensor '" + name + "' has shape " +
                                                        shape_string(shape) + ", expected " +
                                                        shape_string(dst.shape()));
    }
    std::memcpy(dst.data(), in.take(dst.size() * sizeof(double)), dst.size() * sizeof(double));
    ++loaded;
  }
  if (!in.done()) throw NnError(NnError::Kind::CheckpointError, "trailing bytes in checkpoint");
  if (loaded != by_name.size()) {
    throw NnError(NnError::Kind::CheckpointError,
                  "checkpoint holds " + std::to_string(loaded) + " of " +
                      std::to_string(by_name.size()) + " expected tensors");
  }
}

void save_checkpoint(const std::filesystem::path& path, const ParameterList& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NnError(NnError::Kind::CheckpointError, "cannot write " + path.string());
  const std::string blob = serialize_parameters(params);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw NnError(NnError::Kind::CheckpointError, "write failed for " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, const ParameterList& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NnError(NnError::Kind::CheckpointError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  deserialize_parameters(ss.str(), params);
}

}  // namespace handact::nn
