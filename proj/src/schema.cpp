#include "wmsn/schema.hpp"

#include <string_view>

namespace wmsn {

namespace {

constexpr std::array<std::string_view, kNodeKindCount> kNodeNames{
    "Sink", "Gateway", "SensorNode", "SensorRawData", "SnFusedData", "GwFusedData", "SinkFusedData"};

constexpr std::array<std::string_view, kEdgeKindCount> kEdgeNames{
    "Lead", "Collect", "LastCollected", "Next", "Fusion",
    "FusedBy", "LastFusion", "Reported", "Forwarded"};

}  // namespace

std::string_view toString(NodeKind kind) { return kNodeNames[static_cast<std::size_t>(kind)]; }

std::string_view toString(EdgeKind kind) { return kEdgeNames[static_cast<std::size_t>(kind)]; }

std::optional<NodeKind> parseNodeKind(std::string_view text) {
  for (std::size_t i = 0; i < kNodeNames.size(); ++i) {
    if (kNodeNames[i] == text) return static_cast<NodeKind>(i);
  }
  return std::nullopt;
}

std::optional<EdgeKind> parseEdgeKind(std::string_view text) {
  for (std::size_t i = 0; i < kEdgeNames.size(); ++i) {
    if (kEdgeNames[i] == text) return static_cast<EdgeKind>(i);
  }
  return std::nullopt;
}

}  // namespace wmsn
