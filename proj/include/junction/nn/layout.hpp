#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace junction::nn {

enum class Mode : std::uint32_t { kCTDE = 0, kCTCE = 1 };

const char* mode_name(Mode m);
/// Parses "ctde" / "ctce" (case-insensitive); throws std::invalid_argument otherwise.
Mode parse_mode(const char* text);

enum class LayerRole : std::uint32_t { kHidden = 0, kMeanHead = 1, kLogStd = 2, kValueHead = 3 };

/// One parameter block. Dense blocks hold W (out x in, row-major) followed by
/// the bias; the log-std block has in = 0 and holds `out` values.
struct LayerDesc {
  int in = 0;
  int out = 0;
  LayerRole role = LayerRole::kHidden;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(in) * out + out; }
  bool operator==(const LayerDesc&) const = default;
};

struct NetworkConfig {
  std::vector<int> hidden{256, 256};
  Mode mode = Mode::kCTDE;
  /// Width of the pooled vector in CTCE mode; 0 means hidden[0]. Mean pooling
  /// keeps the width, so any other value is rejected.
  int pooled_width = 0;
  int obs_dim = 83;
  int action_dim = 2;
  /// CTCE pooling neighborhood in meters; 0 pools over all active agents.
  double pooling_radius = 0.0;

  int effective_pooled_width() const { return pooled_width > 0 ? pooled_width : hidden.at(0); }
  void validate() const;
};

std::vector<LayerDesc> make_layout(const NetworkConfig& config);
std::size_t layout_size(const std::vector<LayerDesc>& layout);

struct ModelParameters {
  std::vector<float> values;
  std::vector<LayerDesc> layout;
  std::uint64_t version = 0;

  /// Throws std::invalid_argument if the values do not match the layout.
  void check() const;
};

/// Weights and biases uniform in +-sqrt(1/fan_in); the mean head is scaled by
/// 0.01 and log-std starts at -0.5. Deterministic per seed.
ModelParameters init_params(const NetworkConfig& config, std::uint64_t seed);

}  // namespace junction::nn
