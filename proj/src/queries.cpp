#include "wmsn/queries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <unordered_map>

#include "wmsn/fusion.hpp"
#include "wmsn/topology.hpp"

namespace wmsn {

void canonicalize(std::vector<ConceptRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ConceptRow& a, const ConceptRow& b) {
    return std::tie(a.fusionTick, a.indexX, a.indexY, a.weight, a.label) <
           std::tie(b.fusionTick, b.indexX, b.indexY, b.weight, b.label);
  });
}

void canonicalize(std::vector<VideoChainRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const VideoChainRow& a, const VideoChainRow& b) {
    return std::tie(a.nodeName, a.startTick, a.indexX, a.indexY, a.acoustic, a.videoPath,
                    a.videoDurationSec) < std::tie(b.nodeName, b.startTick, b.indexX, b.indexY,
                                                   b.acoustic, b.videoPath, b.videoDurationSec);
  });
}

void canonicalize(std::vector<DepthRow>& rows) { std::sort(rows.begin(), rows.end()); }

void requireKnownConcept(std::string_view label) {
  if (!parseConcept(label)) {
    throw QueryError(QueryError::Code::UnknownConcept, "unknown concept '" + std::string(label) + "'");
  }
}

namespace graph {

namespace {

// SnFusedData ids with weight > minWeight and the requested concept: the
// weight range and the concept posting list intersected through a bitmap.
std::vector<NodeId> qualifyingFused(const GraphStore& store, std::string_view label, double minWeight) {
  const auto heavy = store.rangeScan(NodeKind::SnFusedData, "weight",
                                     std::nextafter(minWeight, std::numeric_limits<double>::infinity()),
                                     std::numeric_limits<double>::infinity());
  std::vector<NodeId> out;
  if (heavy.empty()) return out;
  std::vector<bool> inRange(store.nodeCount());
  for (auto id : heavy) inRange[raw(id)] = true;
  for (auto id : store.rangeScan(NodeKind::SnFusedData, "concept", std::string(label), std::string(label))) {
    if (inRange[raw(id)]) out.push_back(id);
  }
  return out;
}

}  // namespace

std::vector<ConceptRow> queryConceptBased(const GraphStore& store, std::string_view label,
                                          double minWeight) {
  requireKnownConcept(label);
  std::vector<ConceptRow> rows;
  for (auto id : qualifyingFused(store, label, minWeight)) {
    const auto& fused = store.node(id);
    const auto sensor = store.firstNeighbor(id, EdgeKind::FusedBy, Direction::Out);
    if (!sensor) continue;
    const auto& sn = store.node(*sensor).props();
    rows.push_back({std::string(label), fused.props().getDouble("weight"),
                    fused.props().getInt("fusionTick"), sn.getInt("indexX"), sn.getInt("indexY")});
  }
  canonicalize(rows);
  return rows;
}

std::vector<VideoChainRow> queryVideoChains(const GraphStore& store, std::int64_t minAcoustic,
                                            int chainLen) {
  if (chainLen < 1) throw QueryError(QueryError::Code::InvalidParameter, "chainLen must be >= 1");
  std::vector<VideoChainRow> rows;
  const auto loud = store.rangeScan(NodeKind::SensorRawData, "acoustic", minAcoustic,
                                    std::numeric_limits<double>::infinity());
  for (auto start : loud) {
    if (store.node(start).props().getInt("acoustic") <= minAcoustic) continue;
    NodeId last = start;
    bool complete = true;
    for (int step = 1; step < chainLen; ++step) {
      const auto next = store.firstNeighbor(last, EdgeKind::Next, Direction::Out);
      if (!next || store.node(*next).props().getInt("acoustic") <= minAcoustic) {
        complete = false;
        break;
      }
      last = *next;
    }
    if (!complete) continue;
    const auto& tail = store.node(last).props();
    const auto* video = tail.find("videoPath");
    if (video == nullptr) continue;
    const auto sensor = store.firstNeighbor(start, EdgeKind::Collect, Direction::In);
    if (!sensor) continue;
    const auto& sn = store.node(*sensor).props();
    rows.push_back({sn.getString("name"), sn.getInt("indexX"), sn.getInt("indexY"),
                    tail.getInt("acoustic"), std::get<std::string>(*video),
                    tail.getInt("videoDurationSec"), store.node(start).props().getInt("tick")});
  }
  canonicalize(rows);
  return rows;
}

std::vector<DepthRow> queryRecursiveDepth(const GraphStore& store, std::string_view label,
                                          double minWeight) {
  requireKnownConcept(label);
  std::vector<DepthRow> rows;
  const auto matches = qualifyingFused(store, label, minWeight);
  if (matches.empty()) return rows;

  // Detections cluster on few sensor nodes; resolve each node's gateway once.
  struct Resolved {
    const std::string* gatewayName = nullptr;
    const std::string* nodeName = nullptr;
    std::int64_t depth = 0;
  };
  std::unordered_map<std::uint64_t, Resolved> bySensor;
  rows.reserve(matches.size());
  for (auto id : matches) {
    const auto sensor = store.firstNeighbor(id, EdgeKind::FusedBy, Direction::Out);
    if (!sensor) continue;
    auto [it, fresh] = bySensor.try_emplace(raw(*sensor));
    if (fresh) {
      if (const auto gateway = store.firstNeighbor(*sensor, EdgeKind::Lead, Direction::In)) {
        it->second = {&store.node(*gateway).props().getString("name"),
                      &store.node(*sensor).props().getString("name"), depthToSink(store, *gateway)};
      }
    }
    const auto& r = it->second;
    if (r.gatewayName == nullptr) continue;
    rows.push_back({*r.gatewayName, *r.nodeName, store.node(id).props().getInt("fusionTick"), r.depth});
  }
  canonicalize(rows);
  return rows;
}

}  // namespace graph

}  // namespace wmsn
