#include "wmsn/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace wmsn {

QueueSet::QueueSet(const QueueCapacities& caps)
    : scalarData(std::string(kNames[0]), caps.scalarData, caps.stallTimeout),
      fused(std::string(kNames[1]), caps.fused, caps.stallTimeout),
      forward(std::string(kNames[2]), caps.forward, caps.stallTimeout),
      action(std::string(kNames[3]), caps.action, caps.stallTimeout) {}

void QueueSet::closeAll() {
  scalarData.close();
  fused.close();
  forward.close();
  action.close();
}

void PipelineStats::add(const TickOutput& out, const Topology& topology) {
  ++ticks;
  rawReadings += static_cast<std::int64_t>(out.raw.size());
  snFused += static_cast<std::int64_t>(out.snFused.size());
  gwFused += static_cast<std::int64_t>(out.gwFused.size());
  for (const auto& gw : out.gwFused) {
    duplicatesDropped += gw.droppedCount;
    forwardHops += static_cast<std::int64_t>(topology.relayPath(gw.gateway).size());
  }
  actions += static_cast<std::int64_t>(out.actions.size());
}

std::vector<GwFusedRec> gatewayFusion(const Topology& topology, std::vector<SnFusedRec> reports,
                                      const FusionConfig& config) {
  std::map<std::string, std::vector<SnFusedRec>> byGateway;
  for (auto& rec : reports) {
    byGateway[topology.name(topology.gatewayOf(rec.sensorNode))].push_back(std::move(rec));
  }
  std::vector<GwFusedRec> out;
  out.reserve(byGateway.size());
  for (auto& [name, batch] : byGateway) {
    std::sort(batch.begin(), batch.end(),
              [](const SnFusedRec& a, const SnFusedRec& b) { return a.nodeName < b.nodeName; });
    const auto gw = topology.gatewayOf(batch.front().sensorNode);
    out.push_back(secondLevelFusion(batch, config, gw, name));
  }
  return out;
}

TickOutput fuseTick(const Topology& topology, Tick tick, std::vector<SensorRawDataRec> readings,
                    const FusionConfig& config) {
  TickOutput out;
  out.tick = tick;
  for (auto& r : readings) {
    r.tick = tick;
    if (auto rec = firstLevelFusion(r, topology.name(r.sensorNode), config)) {
      out.snFused.push_back(std::move(*rec));
    }
  }
  out.gwFused = gatewayFusion(topology, out.snFused, config);
  out.actions = thirdLevelFusion(out.gwFused, config);
  out.raw = std::move(readings);
  return out;
}

GraphRecorder::GraphRecorder(GraphStore& store, const Topology& topology)
    : store_(&store), topology_(&topology) {}

NodeId GraphRecorder::recordRaw(const SensorRawDataRec& rec) {
  auto& store = *store_;
  const auto id = store.createNode(NodeKind::SensorRawData, {{"acoustic", std::int64_t{rec.acoustic}},
                                                              {"seismic", std::int64_t{rec.seismic}},
                                                              {"pir", rec.pir},
                                                              {"tick", rec.tick}});
  store.createEdge(EdgeKind::Collect, rec.sensorNode, id);
  auto [it, first] = lastRaw_.try_emplace(raw(rec.sensorNode), id);
  if (!first) {
    store.createEdge(EdgeKind::Next, it->second, id);
    it->second = id;
  }
  store.setPointerEdge(EdgeKind::LastCollected, rec.sensorNode, id);
  return id;
}

namespace {

std::string featureText(const std::array<double, kFeatureLength>& values) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out << ',';
    out << values[i];
  }
  return out.str();
}

}  // namespace

void GraphRecorder::record(const TickOutput& out) {
  auto& store = *store_;
  try {
    std::unordered_map<std::uint64_t, NodeId> rawOfNode;
    for (const auto& r : out.raw) rawOfNode[raw(r.sensorNode)] = recordRaw(r);

    std::map<std::string, NodeId, std::less<>> snOfNode;
    for (const auto& f : out.snFused) {
      const auto id = store.createNode(
          NodeKind::SnFusedData,
          {{"concept", std::string(toString(f.label))},
           {"weight", f.weight},
           {"fusionTick", f.tick},
           {"acoustic", std::int64_t{f.acoustic}},
           {"seismic", std::int64_t{f.seismic}},
           {"videoPath", f.videoPath},
           {"videoDurationSec", std::int64_t{f.videoDurationSec}},
           {"frameRef", f.frameRef},
           {"foregroundRef", f.foregroundRef},
           {"silhouetteRef", f.silhouetteRef},
           {"frmFeatures", featureText(f.frmFeatures)},
           {"fgndFeatures", featureText(f.fgndFeatures)}});
      snOfNode[f.nodeName] = id;
      if (auto it = rawOfNode.find(raw(f.sensorNode)); it != rawOfNode.end()) {
        store.createEdge(EdgeKind::Fusion, it->second, id);
        store.setProperty(it->second, "videoPath", f.videoPath);
        store.setProperty(it->second, "videoDurationSec", std::int64_t{f.videoDurationSec});
      }
      store.createEdge(EdgeKind::FusedBy, id, f.sensorNode);
      auto [prev, first] = lastSnFused_.try_emplace(raw(f.sensorNode), id);
      if (!first) {
        store.createEdge(EdgeKind::Next, prev->second, id);
        prev->second = id;
      }
      store.setPointerEdge(EdgeKind::LastFusion, f.sensorNode, id);
      store.createEdge(EdgeKind::Reported, id, topology_->gatewayOf(f.sensorNode));
    }

    std::map<std::string, NodeId, std::less<>> gwOfGateway;
    for (const auto& g : out.gwFused) {
      const auto id = store.createNode(NodeKind::GwFusedData,
                                       {{"fusionTick", g.tick},
                                        {"keptCount", static_cast<std::int64_t>(g.kept.size())},
                                        {"droppedCount", std::int64_t{g.droppedCount}}});
      gwOfGateway[g.gatewayName] = id;
      for (const auto& k : g.kept) store.createEdge(EdgeKind::Fusion, snOfNode.at(k.nodeName), id);
      store.createEdge(EdgeKind::FusedBy, id, g.gateway);
      store.setPointerEdge(EdgeKind::LastFusion, g.gateway, id);
      for (auto hop : topology_->relayPath(g.gateway)) store.createEdge(EdgeKind::Forwarded, id, hop);
    }

    for (const auto& a : out.actions) {
      const auto id = store.createNode(NodeKind::SinkFusedData,
                                       {{"concept", std::string(toString(a.label))},
                                        {"weight", a.weight},
                                        {"fusionTick", a.tick},
                                        {"acoustic", std::int64_t{a.acoustic}},
                                        {"actionKind", std::string(toString(a.actionKind))},
                                        {"sourceGateway", a.sourceGateway},
                                        {"sourceNode", a.sourceNode}});
      store.createEdge(EdgeKind::Fusion, gwOfGateway.at(a.sourceGateway), id);
      store.createEdge(EdgeKind::FusedBy, id, topology_->sink());
    }
  } catch (const StoreError& e) {
    throw FusionError(FusionError::Code::StoreWriteFailure, e.what());
  }
}

PipelineStepper::PipelineStepper(const Topology& topology, ReadingSource& source, GraphStore& store,
                                 FusionConfig fusion)
    : topology_(&topology),
      source_(&source),
      store_(&store),
      fusion_(std::move(fusion)),
      recorder_(store, topology) {}

TickOutput PipelineStepper::step() {
  const Tick tick = stats_.ticks;
  auto out = fuseTick(*topology_, tick, source_->nextTick(), fusion_);
  {
    auto lock = store_->writeLock();
    recorder_.record(out);
  }
  stats_.add(out, *topology_);
  return out;
}

namespace {

PipelineStats runSingleThreaded(const Topology& topology, ReadingSource& source, GraphStore& store,
                                const PipelineOptions& options, Tick untilTick) {
  PipelineStepper stepper(topology, source, store, options.fusion);
  for (Tick t = 0; t < untilTick; ++t) {
    const auto out = stepper.step();
    if (options.onTick) options.onTick(out);
  }
  return stepper.stats();
}

// Per-tick partial outputs deposited by the stages; the writer stage claims
// a tick once its barrier has passed every stage.
class TickLedger {
 public:
  void update(Tick tick, const std::function<void(TickOutput&)>& fn) {
    std::lock_guard lock(mutex_);
    auto& slot = ticks_[tick];
    slot.tick = tick;
    fn(slot);
  }

  TickOutput take(Tick tick) {
    std::lock_guard lock(mutex_);
    auto node = ticks_.extract(tick);
    TickOutput out = node.empty() ? TickOutput{} : std::move(node.mapped());
    out.tick = tick;
    return out;
  }

 private:
  std::mutex mutex_;
  std::map<Tick, TickOutput> ticks_;
};

PipelineStats runConcurrent(const Topology& topology, ReadingSource& source, GraphStore& store,
                            const PipelineOptions& options, Tick untilTick) {
  QueueSet queues(options.queues);
  TickLedger ledger;
  GraphRecorder recorder(store, topology);
  PipelineStats stats;
  const auto& cfg = options.fusion;

  std::mutex errorMutex;
  std::exception_ptr error;
  auto guarded = [&](auto&& body) {
    return [&, body] {
      try {
        body();
      } catch (...) {
        {
          std::lock_guard lock(errorMutex);
          if (!error) error = std::current_exception();
        }
        queues.closeAll();
      }
    };
  };

  // Level 1: sensor nodes.
  std::thread sensorStage(guarded([&] {
    std::vector<SensorRawDataRec> rawSeen;
    std::vector<SnFusedRec> fusedSeen;
    while (auto msg = queues.scalarData.pop()) {
      if (auto* barrier = std::get_if<TickBarrier>(&*msg)) {
        ledger.update(barrier->tick, [&](TickOutput& slot) {
          slot.raw = std::move(rawSeen);
          slot.snFused = std::move(fusedSeen);
        });
        rawSeen.clear();
        fusedSeen.clear();
        queues.fused.push(*barrier);
        continue;
      }
      const auto& reading = std::get<SensorRawDataRec>(*msg);
      rawSeen.push_back(reading);
      if (auto rec = firstLevelFusion(reading, topology.name(reading.sensorNode), cfg)) {
        fusedSeen.push_back(*rec);
        queues.fused.push(std::move(*rec));
      }
    }
    queues.fused.close();
  }));

  // Level 2: gateways wait for every report of the tick, then filter.
  std::thread gatewayStage(guarded([&] {
    std::vector<SnFusedRec> reports;
    while (auto msg = queues.fused.pop()) {
      if (auto* barrier = std::get_if<TickBarrier>(&*msg)) {
        auto gws = gatewayFusion(topology, std::move(reports), cfg);
        reports.clear();
        for (const auto& g : gws) queues.forward.push(g);
        ledger.update(barrier->tick, [&](TickOutput& slot) { slot.gwFused = std::move(gws); });
        queues.forward.push(*barrier);
        continue;
      }
      reports.push_back(std::move(std::get<SnFusedRec>(*msg)));
    }
    queues.forward.close();
  }));

  // Level 3: the sink waits for every gateway of the tick.
  std::thread sinkStage(guarded([&] {
    std::vector<GwFusedRec> forwarded;
    while (auto msg = queues.forward.pop()) {
      if (auto* barrier = std::get_if<TickBarrier>(&*msg)) {
        std::sort(forwarded.begin(), forwarded.end(),
                  [](const GwFusedRec& a, const GwFusedRec& b) { return a.gatewayName < b.gatewayName; });
        for (auto& action : thirdLevelFusion(forwarded, cfg)) queues.action.push(std::move(action));
        forwarded.clear();
        queues.action.push(*barrier);
        continue;
      }
      forwarded.push_back(std::move(std::get<GwFusedRec>(*msg)));
    }
    queues.action.close();
  }));

  // Writer: the single store writer, one write batch per tick.
  std::thread writerStage(guarded([&] {
    std::vector<SinkFusedRec> actions;
    while (auto msg = queues.action.pop()) {
      if (auto* barrier = std::get_if<TickBarrier>(&*msg)) {
        auto out = ledger.take(barrier->tick);
        out.actions = std::move(actions);
        actions.clear();
        {
          auto lock = store.writeLock();
          recorder.record(out);
        }
        stats.add(out, topology);
        if (options.onTick) options.onTick(out);
        continue;
      }
      actions.push_back(std::move(std::get<SinkFusedRec>(*msg)));
    }
  }));

  guarded([&] {
    for (Tick t = 0; t < untilTick; ++t) {
      for (auto& reading : source.nextTick()) {
        reading.tick = t;
        queues.scalarData.push(std::move(reading));
      }
      queues.scalarData.push(TickBarrier{t});
    }
    queues.scalarData.close();
  })();

  for (auto* t : {&sensorStage, &gatewayStage, &sinkStage, &writerStage}) t->join();
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const QueueStalled& e) {
      throw FusionError(FusionError::Code::QueueOverflow, e.what());
    } catch (const QueueClosed&) {
      throw FusionError(FusionError::Code::StoreWriteFailure, "pipeline aborted");
    }
  }
  return stats;
}

}  // namespace

PipelineStats runPipeline(const Topology& topology, ReadingSource& source, GraphStore& store,
                          const PipelineOptions& options, Tick untilTick) {
  options.fusion.validate();
  if (options.mode == PipelineMode::SingleThreaded) {
    return runSingleThreaded(topology, source, store, options, untilTick);
  }
  return runConcurrent(topology, source, store, options, untilTick);
}

}  // namespace wmsn
