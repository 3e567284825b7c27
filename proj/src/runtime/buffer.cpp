#include "junction/runtime/buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace junction::runtime {

void BufferConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("runtime.horizon: must be >= 1");
  if (batch_segments < 1) throw std::invalid_argument("runtime.batch_segments: must be >= 1");
  if (capacity < batch_segments) throw std::invalid_argument("runtime.capacity: must be >= runtime.batch_segments");
  if (!(max_avg_version_gap >= 0.0)) throw std::invalid_argument("runtime.max_avg_version_gap: must be >= 0");
}

SegmentBuffer::SegmentBuffer(BufferConfig config) : config_(config) { config_.validate(); }

bool SegmentBuffer::push(SegmentPtr segment) {
  bool ok = segment != nullptr && segment->horizon == config_.horizon;
  if (ok) {
    try {
      segment->validate();
    } catch (const std::invalid_argument&) {
      ok = false;
    }
  }
  {
    std::lock_guard lock(mu_);
    if (!ok || closed_) {
      ++counters_.rejected;
      return false;
    }
    ++counters_.produced;
    valid_transitions_ += segment->num_valid();
    queue_.push_back(std::move(segment));
    while (static_cast<int>(queue_.size()) > config_.capacity) {
      valid_transitions_ -= queue_.front()->num_valid();
      queue_.pop_front();
      ++counters_.discarded;
    }
    counters_.queued = static_cast<long long>(queue_.size());
  }
  cv_.notify_one();
  return true;
}

double SegmentBuffer::mean_gap_locked(std::uint64_t current_version) const {
  const std::size_t n = std::min(queue_.size(), static_cast<std::size_t>(config_.batch_segments));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += static_cast<double>(current_version) - static_cast<double>(queue_[i]->model_version);
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

std::optional<std::vector<SegmentPtr>> SegmentBuffer::take_locked(std::uint64_t current_version) {
  if (config_.mode != BufferMode::kFifo) throw std::logic_error("sample_batch: buffer is in replay mode");
  while (!queue_.empty() && mean_gap_locked(current_version) > config_.max_avg_version_gap) {
    valid_transitions_ -= queue_.front()->num_valid();
    queue_.pop_front();
    ++counters_.discarded;
  }
  counters_.queued = static_cast<long long>(queue_.size());
  if (static_cast<int>(queue_.size()) < config_.batch_segments) return std::nullopt;
  counters_.last_batch_gap = mean_gap_locked(current_version);
  std::vector<SegmentPtr> batch(queue_.begin(), queue_.begin() + config_.batch_segments);
  queue_.erase(queue_.begin(), queue_.begin() + config_.batch_segments);
  for (const auto& s : batch) valid_transitions_ -= s->num_valid();
  counters_.consumed += config_.batch_segments;
  counters_.queued = static_cast<long long>(queue_.size());
  return batch;
}

std::optional<std::vector<SegmentPtr>> SegmentBuffer::try_sample(std::uint64_t current_version) {
  std::lock_guard lock(mu_);
  return take_locked(current_version);
}

std::optional<std::vector<SegmentPtr>> SegmentBuffer::sample_batch(std::uint64_t current_version,
                                                                   std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto batch = take_locked(current_version)) return batch;
    if (closed_) return std::nullopt;
    if (cv_.wait_until(lock, deadline) == std::cv_status::timeout) return take_locked(current_version);
  }
}

std::vector<TransitionRef> SegmentBuffer::sample_transitions(std::size_t n, std::mt19937_64& rng) const {
  std::lock_guard lock(mu_);
  if (valid_transitions_ <= 0) throw std::logic_error("sample_transitions: no valid transitions");
  // Draw a global transition index, then walk to its segment.
  std::vector<long long> cumulative(queue_.size());
  long long acc = 0;
  for (std::size_t i = 0; i < queue_.size(); ++i) cumulative[i] = acc += queue_[i]->num_valid();
  std::uniform_int_distribution<long long> pick(0, acc - 1);
  std::vector<TransitionRef> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const long long g = pick(rng);
    const std::size_t s = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), g) -
                                                   cumulative.begin());
    long long r = g - (s > 0 ? cumulative[s - 1] : 0);
    const SegmentPtr& seg = queue_[s];
    int t = 0;
    for (; t < seg->horizon; ++t) {
      if (seg->valid[t] && r-- == 0) break;
    }
    out.push_back({seg, t});
  }
  return out;
}

long long SegmentBuffer::valid_transitions() const {
  std::lock_guard lock(mu_);
  return valid_transitions_;
}

void SegmentBuffer::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool SegmentBuffer::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

BufferCounters SegmentBuffer::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

std::size_t SegmentBuffer::size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

}  // namespace junction::runtime
