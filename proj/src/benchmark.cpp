#include "wmsn/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace wmsn {

std::string_view toString(QueryId q) {
  switch (q) {
    case QueryId::ConceptBased: return "q1";
    case QueryId::VideoChains: return "q2";
    case QueryId::RecursiveDepth: return "q3";
  }
  return "?";
}

std::string_view toString(Backend b) { return b == Backend::Graph ? "graph" : "relational"; }

std::optional<QueryId> parseQueryId(std::string_view name) {
  for (auto q : {QueryId::ConceptBased, QueryId::VideoChains, QueryId::RecursiveDepth}) {
    if (toString(q) == name) return q;
  }
  return std::nullopt;
}

std::size_t rowCount(const QueryRows& rows) {
  return std::visit([](const auto& v) { return v.size(); }, rows);
}

QueryRows runGraph(const GraphStore& store, QueryId q, const QueryParams& p) {
  switch (q) {
    case QueryId::ConceptBased: return graph::queryConceptBased(store, p.q1Concept, p.q1MinWeight);
    case QueryId::VideoChains: return graph::queryVideoChains(store, p.q2MinAcoustic, p.q2ChainLen);
    case QueryId::RecursiveDepth: return graph::queryRecursiveDepth(store, p.q3Concept, p.q3MinWeight);
  }
  throw std::invalid_argument("unknown query");
}

QueryRows runRelational(const RelationalBaseline& db, QueryId q, const QueryParams& p) {
  switch (q) {
    case QueryId::ConceptBased: return relational::queryConceptBased(db, p.q1Concept, p.q1MinWeight);
    case QueryId::VideoChains: return relational::queryVideoChains(db, p.q2MinAcoustic, p.q2ChainLen);
    case QueryId::RecursiveDepth: return relational::queryRecursiveDepth(db, p.q3Concept, p.q3MinWeight);
  }
  throw std::invalid_argument("unknown query");
}

void BenchmarkConfig::validate() const {
  if (repetitions < 5) {
    throw BenchmarkError(BenchmarkError::Code::InvalidConfig, "benchmark.repetitions must be >= 5");
  }
  if (warmup < 0) throw BenchmarkError(BenchmarkError::Code::InvalidConfig, "benchmark.warmup must be >= 0");
}

namespace {

constexpr QueryId kQueries[] = {QueryId::ConceptBased, QueryId::VideoChains, QueryId::RecursiveDepth};

template <typename Fn>
BenchmarkRow timeQuery(QueryId q, Backend b, std::int64_t records, const BenchmarkConfig& config, Fn&& run) {
  std::size_t rows = 0;
  for (int i = 0; i < config.warmup; ++i) rows = rowCount(run());
  std::vector<double> samples;
  for (int i = 0; i < config.repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    rows = rowCount(run());
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  const double median = n % 2 == 1 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2;
  return {q, b, records, median, samples.front(), rows, config.repetitions};
}

std::optional<double> q1Growth(const BenchmarkReport& report, Backend backend) {
  std::vector<double> sizes, medians;
  for (const auto& r : report.rows) {
    if (r.query == QueryId::ConceptBased && r.backend == backend) {
      sizes.push_back(static_cast<double>(r.dataRecords));
      medians.push_back(r.medianMs);
    }
  }
  if (sizes.size() < 2) return std::nullopt;
  return growthPerDoubling(sizes, medians);
}

}  // namespace

BenchmarkReport runBenchmark(const GraphStore& store, const BenchmarkConfig& config) {
  config.validate();
  auto lock = store.readLock();
  const auto db = buildRelationalBaseline(store);
  const auto records = static_cast<std::int64_t>(store.countNodes(NodeKind::SensorRawData));

  for (auto q : kQueries) {
    if (runGraph(store, q, config.params) != runRelational(db, q, config.params)) {
      throw BenchmarkError(BenchmarkError::Code::ResultMismatch,
                           "backends disagree on " + std::string(toString(q)));
    }
  }

  BenchmarkReport report;
  for (auto q : kQueries) {
    report.rows.push_back(
        timeQuery(q, Backend::Graph, records, config, [&] { return runGraph(store, q, config.params); }));
    report.rows.push_back(
        timeQuery(q, Backend::Relational, records, config, [&] { return runRelational(db, q, config.params); }));
  }
  return report;
}

BenchmarkReport runScalingExperiment(const SimulationSetup& setup, const std::vector<int>& months,
                                     const BenchmarkConfig& config, std::ostream* progress) {
  config.validate();
  if (months.empty()) throw BenchmarkError(BenchmarkError::Code::InvalidConfig, "no durations given");
  BenchmarkReport report;
  for (int m : months) {
    if (m < 1) throw BenchmarkError(BenchmarkError::Code::InvalidConfig, "months must be >= 1");
    const auto data = simulate(setup, setup.datagen.ticksPerMonth * m);
    if (progress != nullptr) {
      *progress << "months=" << m << " raw_records=" << data.rawRecords()
                << " nodes=" << data.store->nodeCount() << '\n';
    }
    auto part = runBenchmark(*data.store, config);
    report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
  }
  for (auto q : kQueries) {
    const bool anyRows = std::any_of(report.rows.begin(), report.rows.end(),
                                     [&](const BenchmarkRow& r) { return r.query == q && r.resultRows > 0; });
    if (!anyRows) {
      throw BenchmarkError(BenchmarkError::Code::InsufficientData,
                           std::string(toString(q)) + " returned no rows at every data size");
    }
  }
  report.q1GrowthGraph = q1Growth(report, Backend::Graph);
  report.q1GrowthRelational = q1Growth(report, Backend::Relational);
  return report;
}

double growthPerDoubling(const std::vector<double>& sizes, const std::vector<double>& values) {
  if (sizes.size() != values.size() || sizes.size() < 2) {
    throw std::invalid_argument("growthPerDoubling needs two or more paired samples");
  }
  const auto n = static_cast<double>(sizes.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double x = std::log(sizes[i]);
    const double y = std::log(std::max(values[i], 1e-9));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) throw std::invalid_argument("growthPerDoubling needs two distinct sizes");
  const double slope = (n * sxy - sx * sy) / denom;
  return std::exp(slope * std::log(2.0));
}

void BenchmarkReport::writeCsv(std::ostream& out) const {
  out << kCsvHeader << '\n';
  char buf[64];
  for (const auto& r : rows) {
    out << toString(r.query) << ',' << toString(r.backend) << ',' << r.dataRecords << ',';
    std::snprintf(buf, sizeof buf, "%.4f,%.4f", r.medianMs, r.minMs);
    out << buf << ',' << r.resultRows << ',' << r.reps << '\n';
  }
}

void BenchmarkReport::printTable(std::ostream& out) const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %-11s %12s %12s %12s %10s %5s\n", "query", "backend", "raw_records",
                "median_ms", "min_ms", "rows", "reps");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-6s %-11s %12lld %12.3f %12.3f %10zu %5d\n",
                  std::string(toString(r.query)).c_str(), std::string(toString(r.backend)).c_str(),
                  static_cast<long long>(r.dataRecords), r.medianMs, r.minMs, r.resultRows, r.reps);
    out << buf;
  }
  if (q1GrowthGraph) out << "q1 median growth per doubling (graph): " << *q1GrowthGraph << '\n';
  if (q1GrowthRelational) out << "q1 median growth per doubling (relational): " << *q1GrowthRelational << '\n';
}

}  // namespace wmsn
