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

#include "sghmer/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sghmer {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw std::invalid_argument("config: bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size()) bad_value(key, value);
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::string format_real(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct Field {
  std::string key;
  std::function<void(TrainConfig&, std::string_view)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field int_field(std::string key, T TrainConfig::*member, T min_value) {
  return {key,
          [=](TrainConfig& c, std::string_view v) {
            const T parsed = parse_number<T>(key, v);
            if (parsed < min_value) bad_value(key, v);
            c.*member = parsed;
          },
          [=](const TrainConfig& c) { return std::to_string(c.*member); }};
}

template <typename Sub>
Field sub_int_field(std::string key, Sub TrainConfig::*group, int Sub::*member, int min_value) {
  return {key,
          [=](TrainConfig& c, std::string_view v) {
            const int parsed = parse_number<int>(key, v);
            if (parsed < min_value) bad_value(key, v);
            (c.*group).*member = parsed;
          },
          [=](const TrainConfig& c) { return std::to_string((c.*group).*member); }};
}

Field real_field(std::string key, double TrainConfig::*member) {
  return {key,
          [=](TrainConfig& c, std::string_view v) {
            const double parsed = parse_real(key, v);
            if (!(parsed > 0)) bad_value(key, v);
            c.*member = parsed;
          },
          [=](const TrainConfig& c) { return format_real(c.*member); }};
}

Field string_field(std::string key, std::string TrainConfig::*member) {
  return {key, [=](TrainConfig& c, std::string_view v) { c.*member = std::string(v); },
          [=](const TrainConfig& c) { return c.*member; }};
}

Field bool_field(std::string key, std::function<bool&(TrainConfig&)> ref) {
  return {key, [=](TrainConfig& c, std::string_view v) { ref(c) = parse_bool(key, v); },
          [=](const TrainConfig& c) { return ref(const_cast<TrainConfig&>(c)) ? "true" : "false"; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      int_field<std::uint64_t>("seed", &TrainConfig::seed, 0),
      string_field("data.train_manifest", &TrainConfig::train_manifest),
      string_field("data.val_manifest", &TrainConfig::val_manifest),
      int_field<int>("data.train_synth", &TrainConfig::train_synth, 0),
      int_field<int>("data.val_synth", &TrainConfig::val_synth, 0),
      int_field<std::uint64_t>("data.synth_seed", &TrainConfig::synth_seed, 0),
      bool_field("data.val_is_train", [](TrainConfig& c) -> bool& { return c.val_is_train; }),
      string_field("graph", &TrainConfig::graph),
      string_field("out_dir", &TrainConfig::out_dir),
      int_field<int>("train.epochs", &TrainConfig::epochs, 1),
      int_field<int>("train.batch_size", &TrainConfig::batch_size, 1),
      real_field("train.rho", &TrainConfig::rho),
      real_field("train.eps", &TrainConfig::eps),
      real_field("train.clip_norm", &TrainConfig::clip_norm),
      int_field<int>("train.max_decode_len", &TrainConfig::max_decode_len, 1),
      bool_field("train.monitor_sam_gap", [](TrainConfig& c) -> bool& { return c.monitor_sam_gap; }),
      sub_int_field("encoder.stem_channels", &TrainConfig::encoder, &EncoderConfig::stem_channels, 1),
      sub_int_field("encoder.growth", &TrainConfig::encoder, &EncoderConfig::growth, 1),
      sub_int_field("encoder.layers_per_block", &TrainConfig::encoder, &EncoderConfig::layers_per_block, 1),
      sub_int_field("encoder.out_channels", &TrainConfig::encoder, &EncoderConfig::out_channels, 1),
      sub_int_field("decoder.embed_dim", &TrainConfig::decoder, &DecoderConfig::embed_dim, 1),
      sub_int_field("decoder.hidden_dim", &TrainConfig::decoder, &DecoderConfig::hidden_dim, 1),
      sub_int_field("decoder.attention_dim", &TrainConfig::decoder, &DecoderConfig::attention_dim, 1),
      sub_int_field("decoder.cls_dim", &TrainConfig::decoder, &DecoderConfig::cls_dim, 1),
      sub_int_field("decoder.coverage_kernel", &TrainConfig::decoder, &DecoderConfig::coverage_kernel, 1),
      bool_field("sam.enable_vis", [](TrainConfig& c) -> bool& { return c.sam.enable_vis; }),
      bool_field("sam.enable_cls", [](TrainConfig& c) -> bool& { return c.sam.enable_cls; }),
      sub_int_field("sam.hidden", &TrainConfig::sam, &SamConfig::hidden, 1),
      sub_int_field("sam.dim", &TrainConfig::sam, &SamConfig::dim, 1),
      {"sam.loss_reduction",
       [](TrainConfig& c, std::string_view v) {
         if (v == "mean") {
           c.sam.reduction = LossReduction::kMean;
         } else if (v == "sum") {
           c.sam.reduction = LossReduction::kSum;
         } else {
           bad_value("sam.loss_reduction", v);
         }
       },
       [](const TrainConfig& c) { return std::string(c.sam.reduction == LossReduction::kMean ? "mean" : "sum"); }},
  };
  return all;
}

}  // namespace

void TrainConfig::set(std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, trim(value));
      if (key == "decoder.coverage_kernel" && decoder.coverage_kernel % 2 == 0) bad_value(key, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

TrainConfig TrainConfig::parse(std::string_view text) {
  TrainConfig config;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace sghmer
