#pragma once

#include <cstdint>
#include <memory>
#include <mutex>

#include "junction/nn/layout.hpp"

namespace junction::runtime {

using ParamsPtr = std::shared_ptr<const nn::ModelParameters>;

/// Single-writer, multi-reader holder of the latest parameters. Snapshots are
/// immutable; publishing swaps the pointer, so a reader keeps whichever
/// complete snapshot it fetched.
class ParameterStore {
 public:
  explicit ParameterStore(nn::ModelParameters initial);

  ParamsPtr fetch() const;
  std::uint64_t version() const;

  /// Stamps version = previous + 1 and swaps it in. Non-finite values or a
  /// layout change throw std::invalid_argument and leave the store untouched.
  std::uint64_t publish(nn::ModelParameters params);

 private:
  mutable std::mutex mu_;
  ParamsPtr current_;
};

}  // namespace junction::runtime
