#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "wmsn/property.hpp"
#include "wmsn/schema.hpp"

namespace wmsn {

enum class StoreErrc {
  MissingRequiredProperty,
  DuplicateExternalName,
  SchemaViolation,
  DanglingEndpoint,
  UnknownNode,
  UnindexedProperty,
  IoFailure,
  CorruptSnapshot,
};

std::string_view toString(StoreErrc code);

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrc code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), code_(code), line_(line) {}

  StoreErrc code() const noexcept { return code_; }
  /// 1-based line of a corrupt snapshot; 0 otherwise.
  std::size_t line() const noexcept { return line_; }

 private:
  StoreErrc code_;
  std::size_t line_;
};

struct Adjacent {
  NodeId node;
  EdgeId edge;
};

struct Edge {
  EdgeId id;
  EdgeKind kind;
  NodeId from;
  NodeId to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class GraphStore;

class Node {
 public:
  NodeId id() const { return id_; }
  NodeKind kind() const { return kind_; }
  const Properties& props() const { return props_; }

  /// Insertion-ordered neighbours over one edge kind. Reads only this node's lists.
  std::span<const Adjacent> adjacent(EdgeKind kind, Direction dir) const;

 private:
  friend class GraphStore;

  struct Bucket {
    EdgeKind kind;
    std::vector<Adjacent> items;
  };

  std::vector<Adjacent>& bucket(EdgeKind kind, Direction dir);

  NodeId id_{};
  NodeKind kind_{};
  Properties props_;
  std::vector<Bucket> out_;
  std::vector<Bucket> in_;
};

inline constexpr int kUnboundedDepth = std::numeric_limits<int>::max();

struct Reached {
  NodeId node;
  int depth;

  friend bool operator==(const Reached&, const Reached&) = default;
};

/// In-process property graph with index-free adjacency.
///
/// Node and edge ids are dense and assigned in creation order. The store is
/// append-only apart from property updates and retargeting of LastCollected /
/// LastFusion pointer edges. Mutations are not internally synchronized: the
/// single writer holds writeLock() per batch, readers hold readLock().
class GraphStore {
 public:
  GraphStore() = default;
  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;
  GraphStore(GraphStore&& other) noexcept;
  GraphStore& operator=(GraphStore&& other) noexcept;

  NodeId createNode(NodeKind kind, Properties props);
  EdgeId createEdge(EdgeKind kind, NodeId from, NodeId to);

  /// Point `from`'s unique LastCollected/LastFusion edge at `to`, creating it
  /// on first use. The edge keeps its id when retargeted.
  EdgeId setPointerEdge(EdgeKind kind, NodeId from, NodeId to);

  void setProperty(NodeId id, std::string_view key, PropValue value);

  bool contains(NodeId id) const { return raw(id) < nodes_.size(); }
  const Node& node(NodeId id) const;
  const Edge& edge(EdgeId id) const;
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }
  std::size_t nodeCount() const { return nodes_.size(); }
  std::size_t edgeCount() const { return edges_.size(); }
  std::size_t countNodes(NodeKind kind) const;

  std::vector<NodeId> neighbors(NodeId id, EdgeKind kind, Direction dir) const;
  std::optional<NodeId> firstNeighbor(NodeId id, EdgeKind kind, Direction dir) const;

  /// Breadth-first expansion; each node once at its minimal depth, start at 0.
  std::vector<Reached> traverse(NodeId start, EdgeKind kind, Direction dir,
                                int maxDepth = kUnboundedDepth) const;

  /// Inclusive [lo, hi] scan over an indexed property, sorted by value then id.
  std::vector<NodeId> rangeScan(NodeKind kind, std::string_view key,
                                const PropValue& lo, const PropValue& hi) const;
  static bool isIndexed(NodeKind kind, std::string_view key);

  std::optional<NodeId> findByName(NodeKind kind, std::string_view name) const;

  std::size_t exportSnapshot(const std::filesystem::path& path) const;
  std::size_t exportSnapshot(std::ostream& out) const;
  static GraphStore importSnapshot(const std::filesystem::path& path);
  static GraphStore importSnapshot(std::istream& in);

  std::shared_lock<std::shared_mutex> readLock() const {
    return std::shared_lock(*mutex_);
  }
  std::unique_lock<std::shared_mutex> writeLock() const {
    return std::unique_lock(*mutex_);
  }

 private:
  using IndexKey = std::variant<double, std::string>;
  /// Value -> ascending ids holding it.
  using Index = std::map<IndexKey, std::vector<NodeId>>;

  static std::optional<IndexKey> indexKey(const PropValue& value);
  Index* findIndex(NodeKind kind, std::string_view key);
  const Index* findIndex(NodeKind kind, std::string_view key) const;
  void unindex(const Node& node, std::string_view key);
  void index(const Node& node, std::string_view key);
  Node& mutableNode(NodeId id);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<std::pair<NodeKind, std::string>, Index, std::less<>> indexes_;
  std::unordered_map<std::string, NodeId> names_[kNodeKindCount];
  std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

}  // namespace wmsn
