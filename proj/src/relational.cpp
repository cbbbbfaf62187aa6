#include "wmsn/relational.hpp"

#include <stdexcept>
#include <unordered_set>

namespace wmsn {

namespace rel {

Table::Table(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw std::out_of_range(name_ + " has no column " + std::string(name));
}

std::optional<std::size_t> Table::findByKey(std::int64_t id) const {
  const auto it = primaryKey_.find(id);
  if (it == primaryKey_.end()) return std::nullopt;
  return it->second;
}

void Table::insert(std::vector<Value> row) {
  if (row.size() != width()) throw std::invalid_argument(name_ + ": row width mismatch");
  const auto id = asInt(row[0]);
  if (!primaryKey_.emplace(id, rowCount()).second) {
    throw std::invalid_argument(name_ + ": duplicate key " + std::to_string(id));
  }
  for (auto& v : row) cells_.push_back(std::move(v));
}

bool isNull(const Value& v) { return std::holds_alternative<std::monostate>(v); }

std::int64_t asInt(const Value& v) { return std::get<std::int64_t>(v); }

double asDouble(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

const std::string& asString(const Value& v) { return std::get<std::string>(v); }

}  // namespace rel

std::vector<const rel::Table*> RelationalBaseline::tables() const {
  return {&sensornode,      &gateway,          &sensorrawdata, &sensorrawvideodata,
          &sensorfuseddata, &gatewayfuseddata, &sinkfuseddata};
}

namespace {

using rel::Value;

Value key(NodeId id) { return static_cast<std::int64_t>(raw(id)); }

Value keyOrNull(const GraphStore& store, NodeId id, EdgeKind kind, Direction dir) {
  const auto n = store.firstNeighbor(id, kind, dir);
  return n ? key(*n) : Value{};
}

Value prop(const Properties& props, std::string_view name) {
  const auto* v = props.find(name);
  if (v == nullptr) return {};
  return std::visit(
      [](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return std::int64_t{x ? 1 : 0};
        } else {
          return x;
        }
      },
      *v);
}

}  // namespace

RelationalBaseline buildRelationalBaseline(const GraphStore& store) {
  RelationalBaseline db;
  std::int64_t nextVideo = 1;
  for (const auto& node : store.nodes()) {
    const auto id = node.id();
    const auto& p = node.props();
    switch (node.kind()) {
      case NodeKind::SensorNode:
        db.sensornode.insert({key(id), prop(p, "name"), prop(p, "indexX"), prop(p, "indexY"),
                              keyOrNull(store, id, EdgeKind::Lead, Direction::In)});
        break;
      case NodeKind::Gateway: {
        Value lead;
        if (auto leader = store.firstNeighbor(id, EdgeKind::Lead, Direction::In);
            leader && store.node(*leader).kind() == NodeKind::Gateway) {
          lead = key(*leader);
        }
        db.gateway.insert({key(id), prop(p, "name"), prop(p, "indexX"), prop(p, "indexY"), lead});
        break;
      }
      case NodeKind::SensorRawData: {
        Value video;
        if (p.contains("videoPath")) {
          video = nextVideo++;
          db.sensorrawvideodata.insert({video, prop(p, "videoPath"), prop(p, "videoDurationSec")});
        }
        db.sensorrawdata.insert({key(id), keyOrNull(store, id, EdgeKind::Collect, Direction::In),
                                 prop(p, "tick"), prop(p, "pir"), prop(p, "seismic"), prop(p, "acoustic"),
                                 keyOrNull(store, id, EdgeKind::Next, Direction::In), video,
                                 keyOrNull(store, id, EdgeKind::Fusion, Direction::Out)});
        break;
      }
      case NodeKind::SnFusedData:
        db.sensorfuseddata.insert({key(id), keyOrNull(store, id, EdgeKind::FusedBy, Direction::Out),
                                   keyOrNull(store, id, EdgeKind::Fusion, Direction::Out),
                                   prop(p, "concept"), prop(p, "weight"), prop(p, "fusionTick"),
                                   prop(p, "acoustic"), prop(p, "seismic")});
        break;
      case NodeKind::GwFusedData:
        db.gatewayfuseddata.insert({key(id), keyOrNull(store, id, EdgeKind::FusedBy, Direction::Out),
                                    prop(p, "fusionTick"), prop(p, "keptCount"), prop(p, "droppedCount")});
        break;
      case NodeKind::SinkFusedData:
        db.sinkfuseddata.insert({key(id), keyOrNull(store, id, EdgeKind::Fusion, Direction::In),
                                 prop(p, "concept"), prop(p, "weight"), prop(p, "fusionTick"),
                                 prop(p, "actionKind")});
        break;
      case NodeKind::Sink:
        break;
    }
  }
  return db;
}

namespace relational {

namespace {

// Scan of sensorfuseddata with the concept/weight predicate; returns row numbers.
std::vector<std::size_t> scanFused(const rel::Table& fused, std::string_view label, double minWeight) {
  const auto cConcept = fused.column("concept");
  const auto cWeight = fused.column("weight");
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < fused.rowCount(); ++r) {
    if (rel::asString(fused.at(r, cConcept)) == label && rel::asDouble(fused.at(r, cWeight)) > minWeight) {
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace

std::vector<ConceptRow> queryConceptBased(const RelationalBaseline& db, std::string_view label,
                                          double minWeight) {
  requireKnownConcept(label);
  const auto& f = db.sensorfuseddata;
  const auto& sn = db.sensornode;
  const auto cFusedBy = f.column("fusedby"), cWeight = f.column("weight"), cTick = f.column("fusion_tick");
  const auto cX = sn.column("indexx"), cY = sn.column("indexy");

  std::vector<ConceptRow> rows;
  for (auto r : scanFused(f, label, minWeight)) {
    if (rel::isNull(f.at(r, cFusedBy))) continue;
    const auto s = sn.findByKey(rel::asInt(f.at(r, cFusedBy)));
    if (!s) continue;
    rows.push_back({std::string(label), rel::asDouble(f.at(r, cWeight)), rel::asInt(f.at(r, cTick)),
                    rel::asInt(sn.at(*s, cX)), rel::asInt(sn.at(*s, cY))});
  }
  canonicalize(rows);
  return rows;
}

std::vector<VideoChainRow> queryVideoChains(const RelationalBaseline& db, std::int64_t minAcoustic,
                                            int chainLen) {
  if (chainLen < 1) throw QueryError(QueryError::Code::InvalidParameter, "chainLen must be >= 1");
  const auto& raw = db.sensorrawdata;
  const auto cAcoustic = raw.column("acoustic"), cNext = raw.column("next_id"), cVideo = raw.column("video_id"),
             cNode = raw.column("sensornode_id"), cTick = raw.column("collect_tick");

  // Every self-join alias carries the same acoustic predicate, so filter once.
  std::vector<std::size_t> loud;
  for (std::size_t r = 0; r < raw.rowCount(); ++r) {
    if (rel::asInt(raw.at(r, cAcoustic)) > minAcoustic) loud.push_back(r);
  }
  // Hash join build side: predecessor id -> successor rows.
  std::unordered_multimap<std::int64_t, std::size_t> byPredecessor;
  byPredecessor.reserve(loud.size());
  for (auto r : loud) {
    if (!rel::isNull(raw.at(r, cNext))) byPredecessor.emplace(rel::asInt(raw.at(r, cNext)), r);
  }

  struct Partial {
    std::size_t start;
    std::size_t last;
  };
  std::vector<Partial> chains;
  chains.reserve(loud.size());
  for (auto r : loud) chains.push_back({r, r});
  for (int step = 1; step < chainLen; ++step) {
    std::vector<Partial> extended;
    for (const auto& c : chains) {
      const auto [lo, hi] = byPredecessor.equal_range(rel::asInt(raw.at(c.last, 0)));
      for (auto it = lo; it != hi; ++it) extended.push_back({c.start, it->second});
    }
    chains = std::move(extended);
  }

  const auto& video = db.sensorrawvideodata;
  const auto& sn = db.sensornode;
  const auto cPath = video.column("video_path"), cDuration = video.column("duration_sec");
  const auto cName = sn.column("name"), cX = sn.column("indexx"), cY = sn.column("indexy");
  std::vector<VideoChainRow> rows;
  for (const auto& c : chains) {
    if (rel::isNull(raw.at(c.last, cVideo))) continue;
    const auto v = video.findByKey(rel::asInt(raw.at(c.last, cVideo)));
    if (!v || rel::isNull(raw.at(c.start, cNode))) continue;
    const auto s = sn.findByKey(rel::asInt(raw.at(c.start, cNode)));
    if (!s) continue;
    rows.push_back({rel::asString(sn.at(*s, cName)), rel::asInt(sn.at(*s, cX)), rel::asInt(sn.at(*s, cY)),
                    rel::asInt(raw.at(c.last, cAcoustic)), rel::asString(video.at(*v, cPath)),
                    rel::asInt(video.at(*v, cDuration)), rel::asInt(raw.at(c.start, cTick))});
  }
  canonicalize(rows);
  return rows;
}

std::vector<DepthRow> queryRecursiveDepth(const RelationalBaseline& db, std::string_view label,
                                          double minWeight) {
  requireKnownConcept(label);
  const auto& gw = db.gateway;
  const auto cLead = gw.column("lead"), cGwName = gw.column("name");

  // search_graph(id, depth): semi-naive expansion from the sink-led gateways.
  std::unordered_map<std::int64_t, std::int64_t> searchGraph;
  std::unordered_set<std::int64_t> delta;
  for (std::size_t r = 0; r < gw.rowCount(); ++r) {
    if (rel::isNull(gw.at(r, cLead))) {
      const auto id = rel::asInt(gw.at(r, 0));
      searchGraph.emplace(id, 1);
      delta.insert(id);
    }
  }
  for (std::int64_t depth = 2; !delta.empty(); ++depth) {
    std::unordered_set<std::int64_t> next;
    for (std::size_t r = 0; r < gw.rowCount(); ++r) {
      if (rel::isNull(gw.at(r, cLead)) || !delta.contains(rel::asInt(gw.at(r, cLead)))) continue;
      const auto id = rel::asInt(gw.at(r, 0));
      if (searchGraph.emplace(id, depth).second) next.insert(id);
    }
    delta = std::move(next);
  }

  const auto& f = db.sensorfuseddata;
  const auto& sn = db.sensornode;
  const auto cFusedBy = f.column("fusedby"), cTick = f.column("fusion_tick");
  const auto cSnLead = sn.column("lead"), cSnName = sn.column("name");
  std::vector<DepthRow> rows;
  for (auto r : scanFused(f, label, minWeight)) {
    if (rel::isNull(f.at(r, cFusedBy))) continue;
    const auto s = sn.findByKey(rel::asInt(f.at(r, cFusedBy)));
    if (!s || rel::isNull(sn.at(*s, cSnLead))) continue;
    const auto gwId = rel::asInt(sn.at(*s, cSnLead));
    const auto depth = searchGraph.find(gwId);
    if (depth == searchGraph.end()) continue;
    const auto g = gw.findByKey(gwId);
    if (!g) continue;
    rows.push_back({rel::asString(gw.at(*g, cGwName)), rel::asString(sn.at(*s, cSnName)),
                    rel::asInt(f.at(r, cTick)), depth->second});
  }
  canonicalize(rows);
  return rows;
}

}  // namespace relational

}  // namespace wmsn
