#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "wmsn/graph_store.hpp"

namespace wmsn {

struct TopologyConfig {
  int clustersPerSide = 3;
  int nodesPerClusterSide = 4;
  double nodeSpacing = 10.0;
  /// Outer gateways relay through inner gateways instead of reporting to the sink directly.
  bool gatewayHops = false;

  int nodesPerSide() const { return clustersPerSide * nodesPerClusterSide; }
  double areaSide() const { return nodesPerSide() * nodeSpacing; }
  void validate() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

class TopologyError : public std::runtime_error {
 public:
  enum class Code { NonEmptyStore, OrphanNode, InvalidConfig };

  TopologyError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct NodeDistance {
  NodeId node;
  double distance;
};

/// Grid network: one sink, clustersPerSide^2 gateways, (clusters*nodes)^2 sensor nodes.
class Topology {
 public:
  const TopologyConfig& config() const { return config_; }
  NodeId sink() const { return sink_; }

  /// Gateway of cluster (cx, cy); cx grows east, cy grows north.
  NodeId gateway(int cx, int cy) const;
  /// Sensor node at grid index (i, j), positioned at ((i+1)*spacing, (j+1)*spacing).
  NodeId sensorNode(int i, int j) const;

  const std::vector<NodeId>& gateways() const { return gateways_; }
  const std::vector<NodeId>& sensorNodes() const { return sensorNodes_; }

  Position position(NodeId id) const;
  const std::string& name(NodeId id) const;
  /// Gateway leading a sensor node, resolved at build time.
  NodeId gatewayOf(NodeId sensorNode) const;
  /// Gateways a report passes through after leaving `gateway`, nearest first, ending at the sink.
  const std::vector<NodeId>& relayPath(NodeId gateway) const;

  /// Sensor nodes within Euclidean distance r, ascending by distance then name.
  std::vector<NodeDistance> nodesWithinRadius(const Position& p, double r) const;

 private:
  friend Topology buildTopology(const TopologyConfig& config, GraphStore& store);

  TopologyConfig config_;
  NodeId sink_{};
  std::vector<NodeId> gateways_;
  std::vector<NodeId> sensorNodes_;
  std::unordered_map<std::uint64_t, Position> positions_;
  std::unordered_map<std::uint64_t, std::string> names_;
  std::unordered_map<std::uint64_t, NodeId> gatewayOf_;
  std::unordered_map<std::uint64_t, std::vector<NodeId>> relayPaths_;
};

Topology buildTopology(const TopologyConfig& config, GraphStore& store);

std::string sensorNodeName(int i, int j);
std::string gatewayName(int cx, int cy);
inline constexpr std::string_view kSinkName = "SINK";

/// Follows the unique incoming Lead edge of a sensor node in the store.
NodeId gatewayOf(const GraphStore& store, NodeId sensorNode);
/// Lead edges on the path sink -> gateway; 0 for the sink itself.
int depthToSink(const GraphStore& store, NodeId gatewayOrSink);

}  // namespace wmsn
