#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace wmsn {

enum class NodeId : std::uint64_t {};
enum class EdgeId : std::uint64_t {};

using Tick = std::int64_t;

constexpr std::uint64_t raw(NodeId id) { return static_cast<std::uint64_t>(id); }
constexpr std::uint64_t raw(EdgeId id) { return static_cast<std::uint64_t>(id); }

enum class NodeKind : std::uint8_t {
  Sink,
  Gateway,
  SensorNode,
  SensorRawData,
  SnFusedData,
  GwFusedData,
  SinkFusedData,
};

enum class EdgeKind : std::uint8_t {
  Lead,
  Collect,
  LastCollected,
  Next,
  Fusion,
  FusedBy,
  LastFusion,
  Reported,
  Forwarded,
};

inline constexpr std::size_t kNodeKindCount = 7;
inline constexpr std::size_t kEdgeKindCount = 9;

enum class Direction : std::uint8_t { Out, In };

std::string_view toString(NodeKind kind);
std::string_view toString(EdgeKind kind);
std::optional<NodeKind> parseNodeKind(std::string_view text);
std::optional<EdgeKind> parseEdgeKind(std::string_view text);

struct SchemaRule {
  EdgeKind edge;
  NodeKind from;
  NodeKind to;
};

/// Every legal (edge, from, to) triple. Anything else is rejected by the store.
inline constexpr std::array<SchemaRule, 18> kSchemaRules{{
    {EdgeKind::Lead, NodeKind::Gateway, NodeKind::SensorNode},
    {EdgeKind::Lead, NodeKind::Gateway, NodeKind::Gateway},
    {EdgeKind::Lead, NodeKind::Sink, NodeKind::Gateway},
    {EdgeKind::Collect, NodeKind::SensorNode, NodeKind::SensorRawData},
    {EdgeKind::LastCollected, NodeKind::SensorNode, NodeKind::SensorRawData},
    {EdgeKind::LastFusion, NodeKind::SensorNode, NodeKind::SnFusedData},
    {EdgeKind::LastFusion, NodeKind::Gateway, NodeKind::GwFusedData},
    {EdgeKind::Next, NodeKind::SensorRawData, NodeKind::SensorRawData},
    {EdgeKind::Next, NodeKind::SnFusedData, NodeKind::SnFusedData},
    {EdgeKind::Fusion, NodeKind::SensorRawData, NodeKind::SnFusedData},
    {EdgeKind::Fusion, NodeKind::SnFusedData, NodeKind::GwFusedData},
    {EdgeKind::Fusion, NodeKind::GwFusedData, NodeKind::SinkFusedData},
    {EdgeKind::FusedBy, NodeKind::SnFusedData, NodeKind::SensorNode},
    {EdgeKind::FusedBy, NodeKind::GwFusedData, NodeKind::Gateway},
    {EdgeKind::FusedBy, NodeKind::SinkFusedData, NodeKind::Sink},
    {EdgeKind::Reported, NodeKind::SnFusedData, NodeKind::Gateway},
    {EdgeKind::Forwarded, NodeKind::GwFusedData, NodeKind::Gateway},
    {EdgeKind::Forwarded, NodeKind::GwFusedData, NodeKind::Sink},
}};

constexpr bool isSchemaLegal(EdgeKind edge, NodeKind from, NodeKind to) {
  for (const auto& rule : kSchemaRules) {
    if (rule.edge == edge && rule.from == from && rule.to == to) return true;
  }
  return false;
}

// "Last*" pointers: at most one outgoing edge of this kind per node, retargeted on update.
constexpr bool isPointerEdge(EdgeKind edge) {
  return edge == EdgeKind::LastCollected || edge == EdgeKind::LastFusion;
}

}  // namespace wmsn
