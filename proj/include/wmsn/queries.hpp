#pragma once

#include <array>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wmsn/graph_store.hpp"

namespace wmsn {

class QueryError : public std::runtime_error {
 public:
  enum class Code { UnknownConcept, InvalidParameter };

  QueryError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Q1: high-confidence detections of one concept with the detecting node's grid index.
struct ConceptRow {
  static constexpr std::array<std::string_view, 5> kColumns{"concept", "weight", "fusionTick", "indexX",
                                                            "indexY"};
  std::string label;
  double weight = 0;
  Tick fusionTick = 0;
  std::int64_t indexX = 0;
  std::int64_t indexY = 0;

  friend auto operator<=>(const ConceptRow&, const ConceptRow&) = default;
};

/// Q2: runs of consecutive loud readings; acoustic and video come from the run's last reading.
struct VideoChainRow {
  static constexpr std::array<std::string_view, 7> kColumns{
      "nodeName", "indexX", "indexY", "acoustic", "videoPath", "videoDurationSec", "startTick"};
  std::string nodeName;
  std::int64_t indexX = 0;
  std::int64_t indexY = 0;
  std::int64_t acoustic = 0;
  std::string videoPath;
  std::int64_t videoDurationSec = 0;
  Tick startTick = 0;

  friend auto operator<=>(const VideoChainRow&, const VideoChainRow&) = default;
};

/// Q3: detections with the hop count from the sink to the detecting node's gateway.
struct DepthRow {
  static constexpr std::array<std::string_view, 4> kColumns{"gatewayName", "nodeName", "fusionTick",
                                                            "depth"};
  std::string gatewayName;
  std::string nodeName;
  Tick fusionTick = 0;
  std::int64_t depth = 0;

  friend auto operator<=>(const DepthRow&, const DepthRow&) = default;
};

// Canonical orders: each query's ORDER BY key first, remaining columns as tie-breakers.
void canonicalize(std::vector<ConceptRow>& rows);
void canonicalize(std::vector<VideoChainRow>& rows);
void canonicalize(std::vector<DepthRow>& rows);

/// Throws QueryError::UnknownConcept for names outside Animal/Human/Vehicle/Unknown.
void requireKnownConcept(std::string_view label);

namespace graph {

/// Rows with concept match and weight > minWeight, ordered by fusionTick.
std::vector<ConceptRow> queryConceptBased(const GraphStore& store, std::string_view label,
                                          double minWeight);

/// Rows for every reading that starts `chainLen` consecutive readings (over
/// Next) all louder than minAcoustic and whose last reading carries video.
std::vector<VideoChainRow> queryVideoChains(const GraphStore& store, std::int64_t minAcoustic,
                                            int chainLen = 3);

std::vector<DepthRow> queryRecursiveDepth(const GraphStore& store, std::string_view label,
                                          double minWeight);

}  // namespace graph

}  // namespace wmsn
