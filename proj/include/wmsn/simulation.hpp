#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "wmsn/pipeline.hpp"

namespace wmsn {

struct ScheduledEvent {
  Tick tick = 0;
  EventKind kind = EventKind::Attack;

  friend bool operator==(const ScheduledEvent&, const ScheduledEvent&) = default;
};

/// Everything a batch run needs; a run is a pure function of this.
struct SimulationSetup {
  std::uint64_t seed = 1;
  TopologyConfig topology;
  DatagenConfig datagen;
  FusionConfig fusion;
  QueueCapacities queues;
  PipelineMode mode = PipelineMode::Concurrent;
  std::vector<ScheduledEvent> events;
};

/// Store plus topology of a finished run. Heap-held so the topology's ids stay valid.
struct Dataset {
  std::unique_ptr<GraphStore> store = std::make_unique<GraphStore>();
  Topology topology;
  PipelineStats stats;

  std::size_t rawRecords() const { return store->countNodes(NodeKind::SensorRawData); }
};

/// Builds the topology, runs `ticks` ticks and optionally writes the raw trace.
Dataset simulate(const SimulationSetup& setup, Tick ticks, std::ostream* trace = nullptr);

}  // namespace wmsn
