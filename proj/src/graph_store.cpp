#include "wmsn/graph_store.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace wmsn {

namespace {

constexpr std::string_view kSnapshotHeader = "WMSNGRAPH v1";

std::span<const std::string_view> requiredProps(NodeKind kind) {
  static constexpr std::string_view named[] = {"name"};
  static constexpr std::string_view rawData[] = {"acoustic", "pir", "seismic", "tick"};
  static constexpr std::string_view fused[] = {"concept", "fusionTick", "weight"};
  static constexpr std::string_view gwFused[] = {"fusionTick"};
  switch (kind) {
    case NodeKind::Sink:
    case NodeKind::Gateway:
    case NodeKind::SensorNode:
      return named;
    case NodeKind::SensorRawData:
      return rawData;
    case NodeKind::SnFusedData:
    case NodeKind::SinkFusedData:
      return fused;
    case NodeKind::GwFusedData:
      return gwFused;
  }
  return {};
}

constexpr std::pair<NodeKind, std::string_view> kIndexed[] = {
    {NodeKind::SnFusedData, "weight"},
    {NodeKind::SnFusedData, "concept"},
    {NodeKind::SensorRawData, "acoustic"},
    {NodeKind::SensorNode, "name"},
};

bool hasUniqueName(NodeKind kind) {
  return kind == NodeKind::SensorNode || kind == NodeKind::Gateway || kind == NodeKind::Sink;
}

std::string describe(NodeId id) { return "node " + std::to_string(raw(id)); }

nlohmann::json toJson(const Properties& props) {
  auto obj = nlohmann::json::object();
  for (const auto& [key, value] : props) {
    std::visit([&](const auto& v) { obj[key] = v; }, value);
  }
  return obj;
}

Properties fromJson(const nlohmann::json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("properties must be a JSON object");
  Properties props;
  for (const auto& [key, value] : obj.items()) {
    if (value.is_boolean()) {
      props.set(key, value.get<bool>());
    } else if (value.is_number_integer()) {
      props.set(key, value.get<std::int64_t>());
    } else if (value.is_number_float()) {
      props.set(key, value.get<double>());
    } else if (value.is_string()) {
      props.set(key, value.get<std::string>());
    } else {
      throw std::invalid_argument("property '" + key + "' is not a scalar");
    }
  }
  return props;
}

}  // namespace

std::string_view toString(StoreErrc code) {
  switch (code) {
    case StoreErrc::MissingRequiredProperty: return "MissingRequiredProperty";
    case StoreErrc::DuplicateExternalName: return "DuplicateExternalName";
    case StoreErrc::SchemaViolation: return "SchemaViolation";
    case StoreErrc::DanglingEndpoint: return "DanglingEndpoint";
    case StoreErrc::UnknownNode: return "UnknownNode";
    case StoreErrc::UnindexedProperty: return "UnindexedProperty";
    case StoreErrc::IoFailure: return "IoFailure";
    case StoreErrc::CorruptSnapshot: return "CorruptSnapshot";
  }
  return "?";
}

std::span<const Adjacent> Node::adjacent(EdgeKind kind, Direction dir) const {
  const auto& buckets = dir == Direction::Out ? out_ : in_;
  for (const auto& b : buckets) {
    if (b.kind == kind) return b.items;
  }
  return {};
}

std::vector<Adjacent>& Node::bucket(EdgeKind kind, Direction dir) {
  auto& buckets = dir == Direction::Out ? out_ : in_;
  for (auto& b : buckets) {
    if (b.kind == kind) return b.items;
  }
  return buckets.emplace_back(Bucket{kind, {}}).items;
}

GraphStore::GraphStore(GraphStore&& other) noexcept = default;
GraphStore& GraphStore::operator=(GraphStore&& other) noexcept = default;

NodeId GraphStore::createNode(NodeKind kind, Properties props) {
  for (auto key : requiredProps(kind)) {
    if (!props.contains(key)) {
      throw StoreError(StoreErrc::MissingRequiredProperty,
                       std::string(toString(kind)) + " requires property '" + std::string(key) + "'");
    }
  }
  auto& names = names_[static_cast<std::size_t>(kind)];
  const std::string* name = nullptr;
  if (hasUniqueName(kind)) {
    const auto* value = props.find("name");
    name = value ? std::get_if<std::string>(value) : nullptr;
    if (name == nullptr) {
      throw StoreError(StoreErrc::MissingRequiredProperty,
                       std::string(toString(kind)) + " name must be text");
    }
    if (names.contains(*name)) {
      throw StoreError(StoreErrc::DuplicateExternalName,
                       std::string(toString(kind)) + " name '" + *name + "' already exists");
    }
  }

  const auto id = static_cast<NodeId>(nodes_.size());
  Node& node = nodes_.emplace_back();
  node.id_ = id;
  node.kind_ = kind;
  node.props_ = std::move(props);
  if (name != nullptr) names.emplace(node.props_.getString("name"), id);
  for (const auto& [k, key] : kIndexed) {
    if (k == kind) index(node, key);
  }
  return id;
}

EdgeId GraphStore::createEdge(EdgeKind kind, NodeId from, NodeId to) {
  if (!contains(from) || !contains(to)) {
    throw StoreError(StoreErrc::DanglingEndpoint,
                     std::string(toString(kind)) + " edge references a missing endpoint (" +
                         describe(from) + " -> " + describe(to) + ")");
  }
  auto& src = nodes_[raw(from)];
  auto& dst = nodes_[raw(to)];
  if (!isSchemaLegal(kind, src.kind_, dst.kind_)) {
    throw StoreError(StoreErrc::SchemaViolation,
                     std::string(toString(kind)) + " edge not allowed from " +
                         std::string(toString(src.kind_)) + " to " + std::string(toString(dst.kind_)));
  }
  if (isPointerEdge(kind) && !src.adjacent(kind, Direction::Out).empty()) {
    throw StoreError(StoreErrc::SchemaViolation,
                     std::string(toString(kind)) + " already set on " + describe(from));
  }
  const auto id = static_cast<EdgeId>(edges_.size());
  edges_.push_back(Edge{id, kind, from, to});
  src.bucket(kind, Direction::Out).push_back({to, id});
  dst.bucket(kind, Direction::In).push_back({from, id});
  return id;
}

EdgeId GraphStore::setPointerEdge(EdgeKind kind, NodeId from, NodeId to) {
  if (!isPointerEdge(kind)) {
    throw StoreError(StoreErrc::SchemaViolation,
                     std::string(toString(kind)) + " is not a pointer edge kind");
  }
  if (!contains(from) || !contains(to)) {
    throw StoreError(StoreErrc::DanglingEndpoint, "pointer edge references a missing endpoint");
  }
  auto& src = nodes_[raw(from)];
  auto& outs = src.bucket(kind, Direction::Out);
  if (outs.empty()) return createEdge(kind, from, to);

  auto& dst = nodes_[raw(to)];
  if (!isSchemaLegal(kind, src.kind_, dst.kind_)) {
    throw StoreError(StoreErrc::SchemaViolation,
                     std::string(toString(kind)) + " edge not allowed to " +
                         std::string(toString(dst.kind_)));
  }
  Adjacent& current = outs.front();
  auto& oldIns = nodes_[raw(current.node)].bucket(kind, Direction::In);
  std::erase_if(oldIns, [&](const Adjacent& a) { return a.edge == current.edge; });
  current.node = to;
  edges_[raw(current.edge)].to = to;
  dst.bucket(kind, Direction::In).push_back({from, current.edge});
  return current.edge;
}

void GraphStore::setProperty(NodeId id, std::string_view key, PropValue value) {
  Node& node = mutableNode(id);
  if (key == "name" && hasUniqueName(node.kind_)) {
    throw StoreError(StoreErrc::DuplicateExternalName, "names are immutable");
  }
  const bool indexed = isIndexed(node.kind_, key);
  if (indexed) unindex(node, key);
  node.props_.set(key, std::move(value));
  if (indexed) index(node, key);
}

const Node& GraphStore::node(NodeId id) const {
  if (!contains(id)) throw StoreError(StoreErrc::UnknownNode, describe(id) + " does not exist");
  return nodes_[raw(id)];
}

Node& GraphStore::mutableNode(NodeId id) {
  if (!contains(id)) throw StoreError(StoreErrc::UnknownNode, describe(id) + " does not exist");
  return nodes_[raw(id)];
}

const Edge& GraphStore::edge(EdgeId id) const {
  if (raw(id) >= edges_.size()) {
    throw StoreError(StoreErrc::UnknownNode, "edge " + std::to_string(raw(id)) + " does not exist");
  }
  return edges_[raw(id)];
}

std::size_t GraphStore::countNodes(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.kind() == kind; }));
}

std::vector<NodeId> GraphStore::neighbors(NodeId id, EdgeKind kind, Direction dir) const {
  const auto adj = node(id).adjacent(kind, dir);
  std::vector<NodeId> out;
  out.reserve(adj.size());
  for (const auto& a : adj) out.push_back(a.node);
  return out;
}

std::optional<NodeId> GraphStore::firstNeighbor(NodeId id, EdgeKind kind, Direction dir) const {
  const auto adj = node(id).adjacent(kind, dir);
  if (adj.empty()) return std::nullopt;
  return adj.front().node;
}

std::vector<Reached> GraphStore::traverse(NodeId start, EdgeKind kind, Direction dir,
                                          int maxDepth) const {
  if (maxDepth < 0) throw std::invalid_argument("maxDepth must be non-negative");
  node(start);
  std::vector<Reached> order{{start, 0}};
  std::unordered_set<std::uint64_t> seen{raw(start)};
  for (std::size_t head = 0; head < order.size(); ++head) {
    const auto [current, depth] = order[head];
    if (depth >= maxDepth) continue;
    for (const auto& a : nodes_[raw(current)].adjacent(kind, dir)) {
      if (seen.insert(raw(a.node)).second) order.push_back({a.node, depth + 1});
    }
  }
  return order;
}

bool GraphStore::isIndexed(NodeKind kind, std::string_view key) {
  return std::any_of(std::begin(kIndexed), std::end(kIndexed),
                     [&](const auto& entry) { return entry.first == kind && entry.second == key; });
}

std::optional<GraphStore::IndexKey> GraphStore::indexKey(const PropValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return IndexKey{*s};
  if (auto d = asNumber(value)) return IndexKey{*d};
  return std::nullopt;
}

GraphStore::Index* GraphStore::findIndex(NodeKind kind, std::string_view key) {
  auto it = indexes_.find(std::pair{kind, std::string(key)});
  return it == indexes_.end() ? nullptr : &it->second;
}

const GraphStore::Index* GraphStore::findIndex(NodeKind kind, std::string_view key) const {
  auto it = indexes_.find(std::pair{kind, std::string(key)});
  return it == indexes_.end() ? nullptr : &it->second;
}

void GraphStore::index(const Node& node, std::string_view key) {
  const auto* value = node.props_.find(key);
  if (value == nullptr) return;
  auto& idx = indexes_[std::pair{node.kind_, std::string(key)}];
  auto k = indexKey(*value);
  if (!k) return;
  auto& ids = idx[*k];
  if (ids.empty() || ids.back() < node.id_) {
    ids.push_back(node.id_);
  } else {
    ids.insert(std::lower_bound(ids.begin(), ids.end(), node.id_), node.id_);
  }
}

void GraphStore::unindex(const Node& node, std::string_view key) {
  const auto* value = node.props_.find(key);
  if (value == nullptr) return;
  auto* idx = findIndex(node.kind_, key);
  auto k = indexKey(*value);
  if (idx == nullptr || !k) return;
  auto it = idx->find(*k);
  if (it == idx->end()) return;
  auto& ids = it->second;
  auto pos = std::lower_bound(ids.begin(), ids.end(), node.id_);
  if (pos != ids.end() && *pos == node.id_) ids.erase(pos);
  if (ids.empty()) idx->erase(it);
}

std::vector<NodeId> GraphStore::rangeScan(NodeKind kind, std::string_view key, const PropValue& lo,
                                          const PropValue& hi) const {
  if (!isIndexed(kind, key)) {
    throw StoreError(StoreErrc::UnindexedProperty, std::string(toString(kind)) + "." +
                                                       std::string(key) + " is not indexed");
  }
  std::vector<NodeId> out;
  const auto* idx = findIndex(kind, key);
  const auto loKey = indexKey(lo);
  const auto hiKey = indexKey(hi);
  if (idx == nullptr || !loKey || !hiKey || *hiKey < *loKey) return out;
  const auto end = idx->upper_bound(*hiKey);
  for (auto it = idx->lower_bound(*loKey); it != end; ++it) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

std::optional<NodeId> GraphStore::findByName(NodeKind kind, std::string_view name) const {
  const auto& names = names_[static_cast<std::size_t>(kind)];
  auto it = names.find(std::string(name));
  if (it == names.end()) return std::nullopt;
  return it->second;
}

std::size_t GraphStore::exportSnapshot(std::ostream& out) const {
  out << kSnapshotHeader << '\n';
  for (const auto& n : nodes_) {
    out << "N " << raw(n.id()) << ' ' << toString(n.kind()) << ' ' << toJson(n.props()).dump()
        << '\n';
  }
  for (const auto& e : edges_) {
    out << "E " << raw(e.id) << ' ' << toString(e.kind) << ' ' << raw(e.from) << ' ' << raw(e.to)
        << '\n';
  }
  if (!out) throw StoreError(StoreErrc::IoFailure, "snapshot write failed");
  return nodes_.size() + edges_.size();
}

std::size_t GraphStore::exportSnapshot(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError(StoreErrc::IoFailure, "cannot open " + path.string() + " for writing");
  const auto count = exportSnapshot(out);
  out.flush();
  if (!out) throw StoreError(StoreErrc::IoFailure, "write to " + path.string() + " failed");
  return count;
}

GraphStore GraphStore::importSnapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(StoreErrc::IoFailure, "cannot open " + path.string());
  return importSnapshot(in);
}

GraphStore GraphStore::importSnapshot(std::istream& in) {
  GraphStore store;
  std::string line;
  std::size_t lineNo = 0;
  auto corrupt = [&](const std::string& why) -> StoreError {
    return StoreError(StoreErrc::CorruptSnapshot,
                      "snapshot line " + std::to_string(lineNo) + ": " + why, lineNo);
  };

  if (!std::getline(in, line) || line != kSnapshotHeader) {
    lineNo = 1;
    throw corrupt("missing '" + std::string(kSnapshotHeader) + "' header");
  }
  lineNo = 1;
  bool inEdges = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tag;
    std::string kindText;
    std::uint64_t id = 0;
    fields >> tag >> id >> kindText;
    if (!fields) throw corrupt("malformed record");
    try {
      if (tag == "N") {
        if (inEdges) throw corrupt("node record after edge records");
        auto kind = parseNodeKind(kindText);
        if (!kind) throw corrupt("unknown node kind '" + kindText + "'");
        if (id != store.nodes_.size()) throw corrupt("node ids must be dense and ascending");
        std::string rest;
        std::getline(fields, rest);
        store.createNode(*kind, fromJson(nlohmann::json::parse(rest)));
      } else if (tag == "E") {
        inEdges = true;
        auto kind = parseEdgeKind(kindText);
        if (!kind) throw corrupt("unknown edge kind '" + kindText + "'");
        std::uint64_t from = 0;
        std::uint64_t to = 0;
        fields >> from >> to;
        if (!fields) throw corrupt("malformed edge record");
        if (id != store.edges_.size()) throw corrupt("edge ids must be dense and ascending");
        store.createEdge(*kind, static_cast<NodeId>(from), static_cast<NodeId>(to));
      } else {
        throw corrupt("unknown record tag '" + tag + "'");
      }
    } catch (const StoreError& e) {
      if (e.code() == StoreErrc::CorruptSnapshot) throw;
      throw corrupt(e.what());
    } catch (const std::exception& e) {
      throw corrupt(e.what());
    }
  }
  if (in.bad()) throw StoreError(StoreErrc::IoFailure, "snapshot read failed");
  return store;
}

}  // namespace wmsn
