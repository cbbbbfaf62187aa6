#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wmsn/graph_store.hpp"
#include "wmsn/queries.hpp"

namespace wmsn {

namespace rel {

/// monostate is SQL NULL.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

/// Row-major table of untyped cells. Column 0 is the primary key `id`; it is
/// the only indexed column.
class Table {
 public:
  Table(std::string name, std::vector<std::string> columns);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t width() const { return columns_.size(); }
  std::size_t rowCount() const { return width() == 0 ? 0 : cells_.size() / width(); }

  /// Throws std::out_of_range for an unknown column.
  std::size_t column(std::string_view name) const;
  const Value& at(std::size_t row, std::size_t col) const { return cells_[row * width() + col]; }
  std::optional<std::size_t> findByKey(std::int64_t id) const;

  void insert(std::vector<Value> row);

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<Value> cells_;
  std::unordered_map<std::int64_t, std::size_t> primaryKey_;
};

bool isNull(const Value& v);
std::int64_t asInt(const Value& v);
double asDouble(const Value& v);
const std::string& asString(const Value& v);

}  // namespace rel

/// Relational copy of a store. Keys are the store's node ids; sensorrawvideodata
/// keys are assigned in raw-reading order. Foreign keys point child to parent:
///   sensornode.lead -> gateway, gateway.lead -> gateway (NULL when the sink leads),
///   sensorrawdata.sensornode_id / next_id (predecessor) / video_id / fusion,
///   sensorfuseddata.fusedby -> sensornode, sensorfuseddata.fusion -> gatewayfuseddata,
///   gatewayfuseddata.fusedby -> gateway, sinkfuseddata.fusion -> gatewayfuseddata.
struct RelationalBaseline {
  rel::Table sensornode{"sensornode", {"id", "name", "indexx", "indexy", "lead"}};
  rel::Table gateway{"gateway", {"id", "name", "indexx", "indexy", "lead"}};
  rel::Table sensorrawdata{"sensorrawdata",
                           {"id", "sensornode_id", "collect_tick", "pir", "seismic", "acoustic", "next_id",
                            "video_id", "fusion"}};
  rel::Table sensorrawvideodata{"sensorrawvideodata", {"id", "video_path", "duration_sec"}};
  rel::Table sensorfuseddata{"sensorfuseddata",
                             {"id", "fusedby", "fusion", "concept", "weight", "fusion_tick", "acoustic",
                              "seismic"}};
  rel::Table gatewayfuseddata{"gatewayfuseddata",
                              {"id", "fusedby", "fusion_tick", "kept_count", "dropped_count"}};
  rel::Table sinkfuseddata{"sinkfuseddata",
                           {"id", "fusion", "concept", "weight", "fusion_tick", "action_kind"}};

  std::vector<const rel::Table*> tables() const;
};

RelationalBaseline buildRelationalBaseline(const GraphStore& store);

namespace relational {

std::vector<ConceptRow> queryConceptBased(const RelationalBaseline& db, std::string_view label,
                                          double minWeight);
std::vector<VideoChainRow> queryVideoChains(const RelationalBaseline& db, std::int64_t minAcoustic,
                                            int chainLen = 3);
std::vector<DepthRow> queryRecursiveDepth(const RelationalBaseline& db, std::string_view label,
                                          double minWeight);

}  // namespace relational

}  // namespace wmsn
