#include "junction/runtime/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace junction::runtime {

namespace {

void require_finite(const nn::ModelParameters& p) {
  p.check();
  if (!std::all_of(p.values.begin(), p.values.end(), [](float v) { return std::isfinite(v); })) {
    throw std::invalid_argument("publish: parameters contain non-finite values");
  }
}

}  // namespace

ParameterStore::ParameterStore(nn::ModelParameters initial) {
  require_finite(initial);
  current_ = std::make_shared<const nn::ModelParameters>(std::move(initial));
}

ParamsPtr ParameterStore::fetch() const {
  std::lock_guard lock(mu_);
  return current_;
}

std::uint64_t ParameterStore::version() const {
  std::lock_guard lock(mu_);
  return current_->version;
}

std::uint64_t ParameterStore::publish(nn::ModelParameters params) {
  require_finite(params);
  std::lock_guard lock(mu_);
  if (params.layout != current_->layout) throw std::invalid_argument("publish: layout differs from the store");
  params.version = current_->version + 1;
  current_ = std::make_shared<const nn::ModelParameters>(std::move(params));
  return current_->version;
}

}  // namespace junction::runtime
