#include <doctest.h>

#include "oracle.hpp"
#include "wmsn/benchmark.hpp"
#include "wmsn/relational.hpp"
#include "wmsn/simulation.hpp"

using namespace wmsn;

namespace {

// One sensor node with a hand-built run of readings; the last one carries video.
void toyChain(GraphStore& s, const Topology& topo, const std::vector<std::int64_t>& acoustics) {
  const auto sn = topo.sensorNode(0, 0);
  std::optional<NodeId> prev;
  for (std::size_t i = 0; i < acoustics.size(); ++i) {
    const auto r = s.createNode(NodeKind::SensorRawData, {{"acoustic", acoustics[i]},
                                                         {"seismic", std::int64_t{10}},
                                                         {"pir", true},
                                                         {"tick", static_cast<std::int64_t>(i)}});
    s.createEdge(EdgeKind::Collect, sn, r);
    if (prev) s.createEdge(EdgeKind::Next, *prev, r);
    prev = r;
  }
  s.setProperty(*prev, "videoPath", std::string("video/SN-000-000/2.mp4"));
  s.setProperty(*prev, "videoDurationSec", std::int64_t{12});
}

void checkAllBackends(const GraphStore& s, const QueryParams& p) {
  const auto db = buildRelationalBaseline(s);
  const auto q1 = oracle::q1(s, p.q1Concept, p.q1MinWeight);
  CHECK(graph::queryConceptBased(s, p.q1Concept, p.q1MinWeight) == q1);
  CHECK(relational::queryConceptBased(db, p.q1Concept, p.q1MinWeight) == q1);
  const auto q2 = oracle::q2(s, p.q2MinAcoustic, p.q2ChainLen);
  CHECK(graph::queryVideoChains(s, p.q2MinAcoustic, p.q2ChainLen) == q2);
  CHECK(relational::queryVideoChains(db, p.q2MinAcoustic, p.q2ChainLen) == q2);
  const auto q3 = oracle::q3(s, p.q3Concept, p.q3MinWeight);
  CHECK(graph::queryRecursiveDepth(s, p.q3Concept, p.q3MinWeight) == q3);
  CHECK(relational::queryRecursiveDepth(db, p.q3Concept, p.q3MinWeight) == q3);
}

}  // namespace

TEST_SUITE("queries") {

TEST_CASE("video chains on toy traces") {
  for (const auto& [trace, rows] : std::vector<std::pair<std::vector<std::int64_t>, std::size_t>>{
           {{16, 17, 18}, 1}, {{16, 10, 18}, 0}, {{16, 17, 18, 19}, 1}, {{16, 17}, 0}}) {
    GraphStore s;
    const auto topo = buildTopology({}, s);
    toyChain(s, topo, trace);
    const auto got = graph::queryVideoChains(s, 15, 3);
    CHECK(got.size() == rows);
    CHECK(relational::queryVideoChains(buildRelationalBaseline(s), 15, 3) == got);
    CHECK(oracle::q2(s, 15, 3) == got);
    if (rows == 1 && trace.size() == 3) {
      CHECK(got[0].nodeName == "SN-000-000");
      CHECK(got[0].acoustic == 18);
      CHECK(got[0].videoPath == "video/SN-000-000/2.mp4");
      CHECK(got[0].videoDurationSec == 12);
      CHECK(got[0].startTick == 0);
    }
  }
}

TEST_CASE("empty store and unknown concepts") {
  GraphStore s;
  const auto db = buildRelationalBaseline(s);
  CHECK(graph::queryConceptBased(s, "Human", 0.9).empty());
  CHECK(graph::queryVideoChains(s, 15).empty());
  CHECK(graph::queryRecursiveDepth(s, "Human", 0.9).empty());
  CHECK(relational::queryRecursiveDepth(db, "Human", 0.9).empty());
  CHECK_THROWS_AS(graph::queryConceptBased(s, "Dragon", 0.9), QueryError);
  CHECK_THROWS_AS(relational::queryRecursiveDepth(db, "Dragon", 0.9), QueryError);
  CHECK_THROWS_AS(graph::queryVideoChains(s, 15, 0), QueryError);
}

TEST_CASE("relational baseline row counts equal node counts per kind") {
  SimulationSetup setup;
  setup.datagen.backgroundEntities = 10;
  const auto data = simulate(setup, 80);
  const auto db = buildRelationalBaseline(*data.store);
  const auto& s = *data.store;
  CHECK(db.sensornode.rowCount() == s.countNodes(NodeKind::SensorNode));
  CHECK(db.gateway.rowCount() == s.countNodes(NodeKind::Gateway));
  CHECK(db.sensorrawdata.rowCount() == s.countNodes(NodeKind::SensorRawData));
  CHECK(db.sensorfuseddata.rowCount() == s.countNodes(NodeKind::SnFusedData));
  CHECK(db.gatewayfuseddata.rowCount() == s.countNodes(NodeKind::GwFusedData));
  CHECK(db.sinkfuseddata.rowCount() == s.countNodes(NodeKind::SinkFusedData));
  // sink-led gateways carry a NULL lead
  for (std::size_t row = 0; row < db.gateway.rowCount(); ++row) {
    CHECK(rel::isNull(db.gateway.at(row, db.gateway.column("lead"))));
  }
}

TEST_CASE("star topology gives depth one everywhere") {
  SimulationSetup setup;
  setup.datagen.backgroundEntities = 15;
  const auto data = simulate(setup, 150);
  const auto rows = graph::queryRecursiveDepth(*data.store, "Human", 0.5);
  REQUIRE_FALSE(rows.empty());
  for (const auto& r : rows) CHECK(r.depth == 1);
}

TEST_CASE("property: graph, relational and brute force agree on seeded datasets") {
  oracle::Gen g(17);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    SimulationSetup setup;
    setup.seed = seed;
    setup.topology = {.clustersPerSide = static_cast<int>(g.integer(3, 7)),
                      .nodesPerClusterSide = static_cast<int>(g.integer(1, 3)),
                      .gatewayHops = g.coin(0.7)};
    setup.datagen.backgroundEntities = static_cast<int>(g.integer(5, 30));
    setup.mode = PipelineMode::SingleThreaded;
    setup.events = {{2, EventKind::Attack}, {5, EventKind::Smuggling}};
    auto data = simulate(setup, g.integer(30, 80));
    CHECK(data.rawRecords() <= 10000);
    for (int probe = 0; probe < 3; ++probe) {
      const char* concepts[] = {"Animal", "Human", "Vehicle", "Unknown"};
      QueryParams p{.q1Concept = concepts[g.integer(0, 3)],
                    .q1MinWeight = g.pick(std::vector{0.0, 0.5, 0.75, 0.9, 0.99}),
                    .q2MinAcoustic = g.integer(0, 40),
                    .q2ChainLen = static_cast<int>(g.integer(1, 4)),
                    .q3Concept = concepts[g.integer(0, 2)],
                    .q3MinWeight = g.pick(std::vector{0.0, 0.5, 0.9})};
      checkAllBackends(*data.store, p);
    }
  }
}

TEST_CASE("queries agree at ten thousand raw records") {
  SimulationSetup setup;
  setup.topology = {.clustersPerSide = 5, .nodesPerClusterSide = 2, .gatewayHops = true};
  setup.datagen.sense.emitQuiescent = true;
  setup.datagen.backgroundEntities = 20;
  const auto data = simulate(setup, 100);
  CHECK(data.rawRecords() == 10000);
  QueryParams p;
  p.q3MinWeight = 0.5;
  checkAllBackends(*data.store, p);
  CHECK_FALSE(graph::queryVideoChains(*data.store, p.q2MinAcoustic, p.q2ChainLen).empty());
  CHECK_FALSE(graph::queryRecursiveDepth(*data.store, p.q3Concept, p.q3MinWeight).empty());
}

}
