#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace wmsn {

class QueueClosed : public std::runtime_error {
 public:
  QueueClosed() : std::runtime_error("queue closed") {}
};

class QueueStalled : public std::runtime_error {
 public:
  explicit QueueStalled(const std::string& name)
      : std::runtime_error("queue '" + name + "' stayed full past the stall timeout") {}
};

/// Blocking FIFO with a fixed capacity. Producers wait for space; they never drop.
template <typename T>
class BoundedQueue {
 public:
  BoundedQueue(std::string name, std::size_t capacity,
               std::chrono::milliseconds stallTimeout = std::chrono::seconds(30))
      : name_(std::move(name)), capacity_(capacity == 0 ? 1 : capacity), stallTimeout_(stallTimeout) {}

  const std::string& name() const { return name_; }
  std::size_t capacity() const { return capacity_; }

  void push(T value) {
    std::unique_lock lock(mutex_);
    if (!notFull_.wait_for(lock, stallTimeout_,
                           [&] { return closed_ || items_.size() < capacity_; })) {
      throw QueueStalled(name_);
    }
    if (closed_) throw QueueClosed();
    items_.push_back(std::move(value));
    highWater_ = std::max(highWater_, items_.size());
    notEmpty_.notify_one();
  }

  /// Empty optional once the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    notEmpty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    notFull_.notify_one();
    return value;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    notEmpty_.notify_all();
    notFull_.notify_all();
  }

  std::size_t highWater() const {
    std::lock_guard lock(mutex_);
    return highWater_;
  }

 private:
  std::string name_;
  std::size_t capacity_;
  std::chrono::milliseconds stallTimeout_;
  mutable std::mutex mutex_;
  std::condition_variable notEmpty_;
  std::condition_variable notFull_;
  std::deque<T> items_;
  std::size_t highWater_ = 0;
  bool closed_ = false;
};

}  // namespace wmsn
