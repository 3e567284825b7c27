#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "junction/runtime/segment.hpp"

namespace junction::runtime {

enum class BufferMode { kFifo, kReplay };

struct BufferConfig {
  int horizon = 32;
  int batch_segments = 64;
  int capacity = 256;
  double max_avg_version_gap = 8.0;
  BufferMode mode = BufferMode::kFifo;
  void validate() const;
};

struct BufferCounters {
  long long produced = 0;   // accepted pushes
  long long consumed = 0;   // segments handed to the learner (FIFO)
  long long discarded = 0;  // evicted for staleness, capacity or ring overwrite
  long long queued = 0;
  long long rejected = 0;   // malformed pushes, not part of the identity
  double last_batch_gap = 0.0;
  double discard_fraction() const { return produced > 0 ? static_cast<double>(discarded) / produced : 0.0; }
};

struct TransitionRef {
  SegmentPtr segment;
  int t = 0;
};

/// Multi-producer, single-consumer segment store. FIFO mode enforces the
/// staleness bound at sampling time; replay mode keeps a ring of the most
/// recent segments for uniform transition sampling.
class SegmentBuffer {
 public:
  explicit SegmentBuffer(BufferConfig config);

  /// False when the segment is malformed, its horizon differs, or the buffer is closed.
  bool push(SegmentPtr segment);

  /// Evicts stale segments, then dequeues exactly batch_segments if that
  /// many remain. Never blocks.
  std::optional<std::vector<SegmentPtr>> try_sample(std::uint64_t current_version);
  /// Blocks until a batch is available, the timeout passes or the buffer is closed.
  std::optional<std::vector<SegmentPtr>> sample_batch(std::uint64_t current_version,
                                                      std::chrono::milliseconds timeout = std::chrono::hours(24));

  /// Replay mode: `n` transitions drawn uniformly over the valid steps in the ring.
  std::vector<TransitionRef> sample_transitions(std::size_t n, std::mt19937_64& rng) const;
  long long valid_transitions() const;

  void close();
  bool closed() const;
  BufferCounters counters() const;
  std::size_t size() const;
  const BufferConfig& config() const { return config_; }

 private:
  double mean_gap_locked(std::uint64_t current_version) const;
  std::optional<std::vector<SegmentPtr>> take_locked(std::uint64_t current_version);

  BufferConfig config_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<SegmentPtr> queue_;
  BufferCounters counters_;
  long long valid_transitions_ = 0;
  bool closed_ = false;
};

}  // namespace junction::runtime
