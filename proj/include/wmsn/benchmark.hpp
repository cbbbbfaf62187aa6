#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wmsn/relational.hpp"
#include "wmsn/simulation.hpp"

namespace wmsn {

enum class QueryId : std::uint8_t { ConceptBased, VideoChains, RecursiveDepth };
enum class Backend : std::uint8_t { Graph, Relational };

std::string_view toString(QueryId q);
std::string_view toString(Backend b);
std::optional<QueryId> parseQueryId(std::string_view name);

struct QueryParams {
  std::string q1Concept = "Vehicle";
  double q1MinWeight = 0.9;
  std::int64_t q2MinAcoustic = 15;
  int q2ChainLen = 3;
  std::string q3Concept = "Human";
  double q3MinWeight = 0.9;
};

using QueryRows = std::variant<std::vector<ConceptRow>, std::vector<VideoChainRow>, std::vector<DepthRow>>;

std::size_t rowCount(const QueryRows& rows);

QueryRows runGraph(const GraphStore& store, QueryId q, const QueryParams& params);
QueryRows runRelational(const RelationalBaseline& db, QueryId q, const QueryParams& params);

class BenchmarkError : public std::runtime_error {
 public:
  enum class Code { InsufficientData, ResultMismatch, InvalidConfig };

  BenchmarkError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct BenchmarkConfig {
  int repetitions = 5;
  int warmup = 1;
  QueryParams params;

  void validate() const;
};

struct BenchmarkRow {
  QueryId query;
  Backend backend;
  std::int64_t dataRecords = 0;
  double medianMs = 0;
  double minMs = 0;
  std::size_t resultRows = 0;
  int reps = 0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  /// Per backend: factor by which the Q1 median grows when the data doubles,
  /// from a least-squares fit of log(median) on log(size). Needs two sizes.
  std::optional<double> q1GrowthGraph;
  std::optional<double> q1GrowthRelational;

  static constexpr std::string_view kCsvHeader = "query,backend,data_records,median_ms,min_ms,result_rows,reps";
  void writeCsv(std::ostream& out) const;
  void printTable(std::ostream& out) const;
};

/// Times every query on both backends over one dataset. Results are compared
/// across backends before anything is timed.
BenchmarkReport runBenchmark(const GraphStore& store, const BenchmarkConfig& config);

/// One simulation per duration (ticksPerMonth * months ticks), then runBenchmark on each.
/// Throws InsufficientData when a query is empty at every size.
BenchmarkReport runScalingExperiment(const SimulationSetup& setup, const std::vector<int>& months,
                                     const BenchmarkConfig& config, std::ostream* progress = nullptr);

/// exp(slope * ln 2) for the least-squares line through (ln x, ln y).
double growthPerDoubling(const std::vector<double>& sizes, const std::vector<double>& values);

}  // namespace wmsn
