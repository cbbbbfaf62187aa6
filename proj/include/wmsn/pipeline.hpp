#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wmsn/bounded_queue.hpp"
#include "wmsn/fusion.hpp"

namespace wmsn {

/// Marks the end of one tick's messages on a queue.
struct TickBarrier {
  Tick tick;
};

template <typename T>
using StageMessage = std::variant<T, TickBarrier>;

struct QueueCapacities {
  std::size_t scalarData = 1024;
  std::size_t fused = 1024;
  std::size_t forward = 256;
  std::size_t action = 256;
  std::chrono::milliseconds stallTimeout{30000};
};

/// The four message queues between fusion stages.
struct QueueSet {
  static constexpr std::array<std::string_view, 4> kNames{"Scalar Data", "Fused", "Forward", "Action"};

  explicit QueueSet(const QueueCapacities& caps);
  void closeAll();

  BoundedQueue<StageMessage<SensorRawDataRec>> scalarData;
  BoundedQueue<StageMessage<SnFusedRec>> fused;
  BoundedQueue<StageMessage<GwFusedRec>> forward;
  BoundedQueue<StageMessage<SinkFusedRec>> action;
};

/// Everything one tick produced, in canonical order.
struct TickOutput {
  Tick tick = 0;
  std::vector<SensorRawDataRec> raw;
  std::vector<SnFusedRec> snFused;
  std::vector<GwFusedRec> gwFused;
  std::vector<SinkFusedRec> actions;

  friend bool operator==(const TickOutput&, const TickOutput&) = default;
};

struct PipelineStats {
  std::int64_t ticks = 0;
  std::int64_t rawReadings = 0;
  std::int64_t snFused = 0;
  std::int64_t gwFused = 0;
  std::int64_t duplicatesDropped = 0;
  std::int64_t forwardHops = 0;
  std::int64_t actions = 0;

  void add(const TickOutput& out, const Topology& topology);
  friend bool operator==(const PipelineStats&, const PipelineStats&) = default;
};

enum class PipelineMode { Concurrent, SingleThreaded };

struct PipelineOptions {
  FusionConfig fusion;
  QueueCapacities queues;
  PipelineMode mode = PipelineMode::Concurrent;
  /// Called by the store writer after each tick is persisted.
  std::function<void(const TickOutput&)> onTick;
};

/// Gateway stage for one tick: reports grouped by leading gateway (gateways by
/// name, reports by node name), one duplicate-removal pass per gateway.
std::vector<GwFusedRec> gatewayFusion(const Topology& topology, std::vector<SnFusedRec> reports,
                                      const FusionConfig& config);

/// Persists tick outputs and their linkage edges. The only store writer.
class GraphRecorder {
 public:
  GraphRecorder(GraphStore& store, const Topology& topology);

  void record(const TickOutput& out);

 private:
  NodeId recordRaw(const SensorRawDataRec& rec);

  GraphStore* store_;
  const Topology* topology_;
  std::unordered_map<std::uint64_t, NodeId> lastRaw_;
  std::unordered_map<std::uint64_t, NodeId> lastSnFused_;
};

/// Single-threaded tick-at-a-time driver; the reference the queued pipeline must match.
class PipelineStepper {
 public:
  PipelineStepper(const Topology& topology, ReadingSource& source, GraphStore& store,
                  FusionConfig fusion);

  TickOutput step();
  const PipelineStats& stats() const { return stats_; }

 private:
  const Topology* topology_;
  ReadingSource* source_;
  GraphStore* store_;
  FusionConfig fusion_;
  GraphRecorder recorder_;
  PipelineStats stats_;
};

/// Computes one tick's outputs without touching the store. Readings are
/// stamped with `tick`.
TickOutput fuseTick(const Topology& topology, Tick tick, std::vector<SensorRawDataRec> readings,
                    const FusionConfig& config);

/// Runs ticks [0, untilTick) from the source through all three fusion levels
/// and persists every record. Concurrent mode runs one worker per stage.
PipelineStats runPipeline(const Topology& topology, ReadingSource& source, GraphStore& store,
                          const PipelineOptions& options, Tick untilTick);

}  // namespace wmsn
