// Copyright 2026 The sghmer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sghmer/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sghmer {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string text(std::uint32_t n) {
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  size_t pos() const { return pos_; }

 private:
  void need(size_t n) const {
    if (bytes_.size() - pos_ < n) throw std::runtime_error("checkpoint truncated");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string Checkpoint::serialize() const {
  std::string payload;
  put_u32(payload, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    if (static_cast<Index>(r.values.size()) != shape_size(r.shape)) {
      throw std::invalid_argument("record '" + r.name + "' has " + std::to_string(r.values.size()) +
                                  " values for shape " + shape_string(r.shape));
    }
    put_u32(payload, static_cast<std::uint32_t>(r.name.size()));
    payload += r.name;
    put_u32(payload, static_cast<std::uint32_t>(r.shape.size()));
    for (Index d : r.shape) put_u32(payload, static_cast<std::uint32_t>(d));
    for (float v : r.values) put_u32(payload, std::bit_cast<std::uint32_t>(v));
  }
  put_u32(payload, static_cast<std::uint32_t>(config.size()));
  payload += config;
  put_u32(payload, static_cast<std::uint32_t>(vocab.size()));
  payload += vocab;
  std::string out(kCheckpointMagic);
  out += payload;
  put_u32(out, crc32_of(payload));
  return out;
}

Checkpoint Checkpoint::parse(std::string_view bytes) {
  if (bytes.size() < kCheckpointMagic.size() + 4 || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw std::runtime_error("not a checkpoint (bad magic)");
  }
  const std::string_view payload = bytes.substr(kCheckpointMagic.size(), bytes.size() - kCheckpointMagic.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  if (tail.u32() != crc32_of(payload)) throw std::runtime_error("checkpoint checksum mismatch");

  Reader in(payload);
  Checkpoint ckpt;
  const std::uint32_t count = in.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    TensorRecord r;
    r.name = in.text(in.u32());
    const std::uint32_t rank = in.u32();
    for (std::uint32_t i = 0; i < rank; ++i) r.shape.push_back(in.u32());
    const Index n = shape_size(r.shape);
    r.values.resize(static_cast<size_t>(n));
    for (auto& v : r.values) v = in.f32();
    ckpt.records.push_back(std::move(r));
  }
  ckpt.config = in.text(in.u32());
  ckpt.vocab = in.text(in.u32());
  if (in.pos() != payload.size()) throw std::runtime_error("checkpoint has trailing bytes");
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const TensorRecord* Checkpoint::find(const std::string& name) const {
  for (const auto& r : records) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

size_t Checkpoint::erase_prefix(const std::string& prefix) {
  const size_t before = records.size();
  std::erase_if(records, [&](const TensorRecord& r) { return r.name.compare(0, prefix.size(), prefix) == 0; });
  return before - records.size();
}

template <typename S>
Checkpoint Checkpoint::from_params(const ParamSet<S>& params) {
  Checkpoint ckpt;
  for (const auto& [name, t] : params.entries()) {
    TensorRecord r{name, t.shape(), {}};
    r.values.reserve(static_cast<size_t>(t.size()));
    for (Index i = 0; i < t.size(); ++i) r.values.push_back(static_cast<float>(t.values()[i]));
    ckpt.records.push_back(std::move(r));
  }
  return ckpt;
}

template <typename S>
void load_into(ParamSet<S>& params, const Checkpoint& checkpoint) {
  for (auto& [name, t] : params.entries()) {
    const TensorRecord* r = checkpoint.find(name);
    if (!r) throw std::runtime_error("checkpoint lacks parameter '" + name + "'");
    if (r->shape != t.shape()) {
      throw std::runtime_error("parameter '" + name + "' has shape " + shape_string(t.shape()) +
                               " but checkpoint stores " + shape_string(r->shape));
    }
    Tensor<S> target = t;
    for (Index i = 0; i < target.size(); ++i) target.values()[i] = static_cast<S>(r->values[static_cast<size_t>(i)]);
  }
}

template <typename S>
ParamSet<S> params_from(const Checkpoint& checkpoint) {
  ParamSet<S> params;
  for (const auto& r : checkpoint.records) {
    typename Tensor<S>::Vector v(static_cast<Index>(r.values.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<S>(r.values[static_cast<size_t>(i)]);
    params.add(r.name, Tensor<S>(r.shape, std::move(v)));
  }
  return params;
}

template Checkpoint Checkpoint::from_params<float>(const ParamSet<float>&);
template Checkpoint Checkpoint::from_params<double>(const ParamSet<double>&);
template void load_into<float>(ParamSet<float>&, const Checkpoint&);
template void load_into<double>(ParamSet<double>&, const Checkpoint&);
template ParamSet<float> params_from<float>(const Checkpoint&);
template ParamSet<double> params_from<double>(const Checkpoint&);

}  // namespace sghmer
