#include "junction/nn/layout.hpp"

#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace junction::nn {

const char* mode_name(Mode m) { return m == Mode::kCTCE ? "ctce" : "ctde"; }

Mode parse_mode(const char* text) {
  std::string s(text);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "ctde") return Mode::kCTDE;
  if (s == "ctce") return Mode::kCTCE;
  throw std::invalid_argument("network.mode: expected ctde or ctce, got '" + std::string(text) + "'");
}

void NetworkConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("network.hidden: must list at least one layer");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("network.hidden: sizes must be >= 1");
  }
  if (obs_dim < 1) throw std::invalid_argument("network.obs_dim: must be >= 1");
  if (action_dim != 2) throw std::invalid_argument("network.action_dim: must be 2");
  if (mode == Mode::kCTCE) {
    if (pooled_width < 0) throw std::invalid_argument("network.pooled_width: must be > 0");
    if (effective_pooled_width() != hidden[0]) {
      throw std::invalid_argument("network.pooled_width: mean pooling requires pooled_width == hidden[0]");
    }
  }
  if (!(pooling_radius >= 0.0)) throw std::invalid_argument("network.pooling_radius: must be >= 0");
}

std::vector<LayerDesc> make_layout(const NetworkConfig& c) {
  c.validate();
  std::vector<LayerDesc> out;
  std::size_t offset = 0;
  auto add = [&](int in, int n, LayerRole role) {
    LayerDesc d{in, n, role, offset};
    offset += d.size();
    out.push_back(d);
  };
  int width = c.obs_dim;
  for (std::size_t k = 0; k < c.hidden.size(); ++k) {
    if (k == 1 && c.mode == Mode::kCTCE) width += c.effective_pooled_width();
    add(width, c.hidden[k], LayerRole::kHidden);
    width = c.hidden[k];
  }
  if (c.hidden.size() == 1 && c.mode == Mode::kCTCE) width += c.effective_pooled_width();
  add(width, c.action_dim, LayerRole::kMeanHead);
  add(0, c.action_dim, LayerRole::kLogStd);
  add(width, 1, LayerRole::kValueHead);
  return out;
}

std::size_t layout_size(const std::vector<LayerDesc>& layout) {
  std::size_t n = 0;
  for (const auto& d : layout) n += d.size();
  return n;
}

void ModelParameters::check() const {
  std::size_t offset = 0;
  for (const auto& d : layout) {
    if (d.offset != offset) throw std::invalid_argument("parameter layout offsets are not contiguous");
    offset += d.size();
  }
  if (values.size() != offset) {
    throw std::invalid_argument("parameter count " + std::to_string(values.size()) + " does not match layout (" +
                                std::to_string(offset) + ")");
  }
}

ModelParameters init_params(const NetworkConfig& config, std::uint64_t seed) {
  ModelParameters p;
  p.layout = make_layout(config);
  p.values.resize(layout_size(p.layout));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const auto& d : p.layout) {
    float* v = p.values.data() + d.offset;
    if (d.role == LayerRole::kLogStd) {
      for (int k = 0; k < d.out; ++k) v[k] = -0.5f;
      continue;
    }
    const double bound = std::sqrt(1.0 / d.in);
    const double scale = d.role == LayerRole::kMeanHead ? 0.01 : 1.0;
    for (std::size_t k = 0; k < d.size(); ++k) v[k] = static_cast<float>(scale * bound * unit(rng));
  }
  return p;
}

}  // namespace junction::nn
