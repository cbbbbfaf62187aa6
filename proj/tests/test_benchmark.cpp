#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wmsn/benchmark.hpp"

using namespace wmsn;

namespace {

SimulationSetup smallSetup() {
  SimulationSetup s;
  s.topology = {.clustersPerSide = 5, .nodesPerClusterSide = 2, .gatewayHops = true};
  s.datagen.sense.emitQuiescent = true;
  s.datagen.backgroundEntities = 20;
  s.datagen.ticksPerMonth = 10;
  return s;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("benchmark") {

TEST_CASE("growth per doubling from a power law") {
  const std::vector<double> x{1, 2, 4, 8, 16};
  std::vector<double> linear, root;
  for (double v : x) {
    linear.push_back(3 * v);
    root.push_back(7 * std::sqrt(v));
  }
  CHECK(growthPerDoubling(x, linear) == doctest::Approx(2.0));
  CHECK(growthPerDoubling(x, root) == doctest::Approx(std::sqrt(2.0)));
  CHECK(growthPerDoubling({1, 3, 9}, {5, 5, 5}) == doctest::Approx(1.0));
}

TEST_CASE("single-size benchmark rows") {
  const auto data = simulate(smallSetup(), 40);
  BenchmarkConfig cfg;
  const auto report = runBenchmark(*data.store, cfg);
  REQUIRE(report.rows.size() == 6);
  for (std::size_t i = 0; i < 6; i += 2) {
    const auto& g = report.rows[i];
    const auto& r = report.rows[i + 1];
    CHECK(g.backend == Backend::Graph);
    CHECK(r.backend == Backend::Relational);
    CHECK(g.query == r.query);
    CHECK(g.resultRows == r.resultRows);
    CHECK(g.reps == 5);
    CHECK(g.dataRecords == 4000);
    CHECK(g.minMs <= g.medianMs);
    CHECK(r.minMs <= r.medianMs);
  }
  CHECK_FALSE(report.q1GrowthGraph);
}

TEST_CASE("repetitions below five are rejected") {
  GraphStore s;
  BenchmarkConfig cfg;
  cfg.repetitions = 4;
  try {
    runBenchmark(s, cfg);
    FAIL("expected InvalidConfig");
  } catch (const BenchmarkError& e) {
    CHECK(e.code() == BenchmarkError::Code::InvalidConfig);
  }
}

TEST_CASE("scaling experiment report and CSV") {
  BenchmarkConfig cfg;
  cfg.params.q3MinWeight = 0.5;
  const auto report = runScalingExperiment(smallSetup(), {1, 2, 3}, cfg);
  CHECK(report.rows.size() == 3 * 2 * 3);
  std::int64_t last = 0;
  for (std::size_t i = 0; i < report.rows.size(); i += 6) {
    CHECK(report.rows[i].dataRecords > last);
    last = report.rows[i].dataRecords;
  }
  CHECK(report.q1GrowthGraph);
  CHECK(report.q1GrowthRelational);

  std::ostringstream csv;
  report.writeCsv(csv);
  const auto text = lines(csv.str());
  REQUIRE(text.size() == 19);
  CHECK(text[0] == "query,backend,data_records,median_ms,min_ms,result_rows,reps");
  CHECK(text[1].rfind("q1,graph,1000,", 0) == 0);
  CHECK(text[2].rfind("q1,relational,1000,", 0) == 0);

  // Same setup again: identical result cardinalities.
  const auto again = runScalingExperiment(smallSetup(), {1, 2, 3}, cfg);
  for (std::size_t i = 0; i < report.rows.size(); ++i) CHECK(again.rows[i].resultRows == report.rows[i].resultRows);
}

TEST_CASE("empty data at every size is InsufficientData") {
  auto setup = smallSetup();
  setup.datagen.backgroundEntities = 0;
  setup.datagen.sense.emitQuiescent = false;
  try {
    runScalingExperiment(setup, {1, 2}, {});
    FAIL("expected InsufficientData");
  } catch (const BenchmarkError& e) {
    CHECK(e.code() == BenchmarkError::Code::InsufficientData);
  }
}

}
