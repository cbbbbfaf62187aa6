#include "wmsn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace wmsn {

void TopologyConfig::validate() const {
  if (clustersPerSide <= 0) {
    throw TopologyError(TopologyError::Code::InvalidConfig, "clustersPerSide must be positive");
  }
  if (nodesPerClusterSide <= 0) {
    throw TopologyError(TopologyError::Code::InvalidConfig, "nodesPerClusterSide must be positive");
  }
  if (!(nodeSpacing > 0.0) || !std::isfinite(nodeSpacing)) {
    throw TopologyError(TopologyError::Code::InvalidConfig, "nodeSpacing must be positive");
  }
}

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string sensorNodeName(int i, int j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "SN-%03d-%03d", i, j);
  return buf;
}

std::string gatewayName(int cx, int cy) {
  return "GW-" + std::to_string(cx) + "-" + std::to_string(cy);
}

namespace {

// Chebyshev ring of a cluster around the grid centre; 0 for the centre cluster(s).
int ringOf(int cx, int cy, int clusters) {
  const double centre = (clusters - 1) / 2.0;
  return static_cast<int>(std::floor(std::max(std::abs(cx - centre), std::abs(cy - centre))));
}

int stepTowardCentre(int c, int clusters) {
  const double centre = (clusters - 1) / 2.0;
  if (c < centre - 0.5) return c + 1;
  if (c > centre + 0.5) return c - 1;
  return c;
}

}  // namespace

Topology buildTopology(const TopologyConfig& config, GraphStore& store) {
  config.validate();
  if (store.nodeCount() != 0) {
    throw TopologyError(TopologyError::Code::NonEmptyStore, "topology requires an empty store");
  }

  Topology topo;
  topo.config_ = config;
  const int clusters = config.clustersPerSide;
  const int perCluster = config.nodesPerClusterSide;
  const int perSide = config.nodesPerSide();
  const double s = config.nodeSpacing;
  const double area = config.areaSide();

  auto remember = [&](NodeId id, std::string name, Position p) {
    topo.positions_[raw(id)] = p;
    topo.names_[raw(id)] = std::move(name);
  };

  topo.sink_ = store.createNode(NodeKind::Sink, {{"name", std::string(kSinkName)},
                                                 {"x", area / 2},
                                                 {"y", area / 2}});
  remember(topo.sink_, std::string(kSinkName), {area / 2, area / 2});

  topo.gateways_.resize(static_cast<std::size_t>(clusters) * clusters);
  for (int cx = 0; cx < clusters; ++cx) {
    for (int cy = 0; cy < clusters; ++cy) {
      const Position p{s * (cx * perCluster + (perCluster + 1) / 2.0),
                       s * (cy * perCluster + (perCluster + 1) / 2.0)};
      auto name = gatewayName(cx, cy);
      const auto id = store.createNode(NodeKind::Gateway, {{"name", name},
                                                           {"indexX", std::int64_t{cx}},
                                                           {"indexY", std::int64_t{cy}},
                                                           {"x", p.x},
                                                           {"y", p.y}});
      topo.gateways_[static_cast<std::size_t>(cx) * clusters + cy] = id;
      remember(id, std::move(name), p);
    }
  }

  // Inner rings report to the sink; with hops, each outer gateway is led by
  // the neighbouring gateway one ring closer to the centre.
  for (int cx = 0; cx < clusters; ++cx) {
    for (int cy = 0; cy < clusters; ++cy) {
      const auto id = topo.gateway(cx, cy);
      if (!config.gatewayHops || ringOf(cx, cy, clusters) <= 1) {
        store.createEdge(EdgeKind::Lead, topo.sink_, id);
      } else {
        store.createEdge(EdgeKind::Lead,
                         topo.gateway(stepTowardCentre(cx, clusters), stepTowardCentre(cy, clusters)),
                         id);
      }
    }
  }
  for (auto gw : topo.gateways_) {
    std::vector<NodeId> path;
    for (auto cur = gw;;) {
      const auto parent = store.firstNeighbor(cur, EdgeKind::Lead, Direction::In);
      path.push_back(*parent);
      if (*parent == topo.sink_) break;
      cur = *parent;
    }
    topo.relayPaths_[raw(gw)] = std::move(path);
  }

  topo.sensorNodes_.resize(static_cast<std::size_t>(perSide) * perSide);
  for (int i = 0; i < perSide; ++i) {
    for (int j = 0; j < perSide; ++j) {
      const Position p{(i + 1) * s, (j + 1) * s};
      auto name = sensorNodeName(i, j);
      const auto id = store.createNode(NodeKind::SensorNode, {{"name", name},
                                                              {"indexX", std::int64_t{i}},
                                                              {"indexY", std::int64_t{j}},
                                                              {"x", p.x},
                                                              {"y", p.y}});
      topo.sensorNodes_[static_cast<std::size_t>(i) * perSide + j] = id;
      const auto gw = topo.gateway(i / perCluster, j / perCluster);
      store.createEdge(EdgeKind::Lead, gw, id);
      topo.gatewayOf_[raw(id)] = gw;
      remember(id, std::move(name), p);
    }
  }
  return topo;
}

NodeId Topology::gateway(int cx, int cy) const {
  const int c = config_.clustersPerSide;
  if (cx < 0 || cy < 0 || cx >= c || cy >= c) throw std::out_of_range("cluster index out of range");
  return gateways_[static_cast<std::size_t>(cx) * c + cy];
}

NodeId Topology::sensorNode(int i, int j) const {
  const int n = config_.nodesPerSide();
  if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("sensor index out of range");
  return sensorNodes_[static_cast<std::size_t>(i) * n + j];
}

Position Topology::position(NodeId id) const {
  auto it = positions_.find(raw(id));
  if (it == positions_.end()) throw std::out_of_range("node is not part of the topology");
  return it->second;
}

const std::string& Topology::name(NodeId id) const {
  auto it = names_.find(raw(id));
  if (it == names_.end()) throw std::out_of_range("node is not part of the topology");
  return it->second;
}

NodeId Topology::gatewayOf(NodeId sensorNode) const {
  auto it = gatewayOf_.find(raw(sensorNode));
  if (it == gatewayOf_.end()) {
    throw TopologyError(TopologyError::Code::OrphanNode, "not a sensor node of this topology");
  }
  return it->second;
}

const std::vector<NodeId>& Topology::relayPath(NodeId gateway) const {
  auto it = relayPaths_.find(raw(gateway));
  if (it == relayPaths_.end()) {
    throw TopologyError(TopologyError::Code::OrphanNode, "not a gateway of this topology");
  }
  return it->second;
}

std::vector<NodeDistance> Topology::nodesWithinRadius(const Position& p, double r) const {
  if (r < 0) throw std::invalid_argument("radius must be non-negative");
  std::vector<NodeDistance> out;
  const int n = config_.nodesPerSide();
  const double s = config_.nodeSpacing;
  // Grid index k sits at (k+1)*s; only indices inside the bounding box can qualify.
  auto lowIndex = [&](double v) { return std::max(0, static_cast<int>(std::ceil((v - r) / s - 1))); };
  auto highIndex = [&](double v) {
    return std::min(n - 1, static_cast<int>(std::floor((v + r) / s - 1)));
  };
  for (int i = lowIndex(p.x); i <= highIndex(p.x); ++i) {
    for (int j = lowIndex(p.y); j <= highIndex(p.y); ++j) {
      const Position q{(i + 1) * s, (j + 1) * s};
      const double d = distance(p, q);
      if (d <= r) out.push_back({sensorNode(i, j), d});
    }
  }
  std::sort(out.begin(), out.end(), [&](const NodeDistance& a, const NodeDistance& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return name(a.node) < name(b.node);
  });
  return out;
}

NodeId gatewayOf(const GraphStore& store, NodeId sensorNode) {
  const auto& node = store.node(sensorNode);
  const auto leads = node.adjacent(EdgeKind::Lead, Direction::In);
  if (node.kind() != NodeKind::SensorNode || leads.size() != 1) {
    throw TopologyError(TopologyError::Code::OrphanNode,
                        "node " + std::to_string(raw(sensorNode)) + " has no unique leading gateway");
  }
  return leads.front().node;
}

int depthToSink(const GraphStore& store, NodeId gatewayOrSink) {
  int depth = 0;
  auto current = gatewayOrSink;
  while (store.node(current).kind() != NodeKind::Sink) {
    const auto leads = store.node(current).adjacent(EdgeKind::Lead, Direction::In);
    if (leads.empty() || depth > static_cast<int>(store.nodeCount())) {
      throw TopologyError(TopologyError::Code::OrphanNode,
                          "node " + std::to_string(raw(gatewayOrSink)) + " is not connected to the sink");
    }
    current = leads.front().node;
    ++depth;
  }
  return depth;
}

}  // namespace wmsn
