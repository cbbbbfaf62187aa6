// Acceptance runner: one PASS/FAIL line per criterion.
// usage: wmsn_acceptance <path-to-wmsn-cli> <source-dir>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "oracle.hpp"
#include "wmsn/benchmark.hpp"
#include "wmsn/config.hpp"
#include "wmsn/simulation.hpp"

using namespace wmsn;
namespace fs = std::filesystem;

namespace {

// Time budgets in seconds, per criterion.
constexpr double kBudget[9] = {0, 1, 1, 120, 120, 600, 900, 120, 60};
// Criterion 4 dataset ceiling and criterion 5 floor, in raw records.
constexpr std::int64_t kQueryCeiling = 10'000;
constexpr std::int64_t kBenchFloor = 100'000;
constexpr int kSeededTraces = 20;
constexpr std::size_t kReadingsPerTrace = 10'000;

struct Check {
  bool ok = true;
  std::ostringstream why;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) why << what;
    ok = ok && cond;
  }
};

std::string cli;
fs::path sourceDir;

std::string runCommand(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!p) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  status = ::pclose(p);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double score(double v, double lo, double hi) {
  if (std::isinf(hi)) return std::min(1.0, 0.5 + 0.5 * (v - lo) / lo);
  const double q = (hi - lo) / 4;
  if (v < lo + q) return 0.5 + 0.5 * (v - lo) / q;
  if (v > hi - q) return 0.5 + 0.5 * (hi - v) / q;
  return 1.0;
}

SnFusedRec report(int acoustic, const std::string& node) {
  SnFusedRec r;
  r.acoustic = acoustic;
  r.nodeName = node;
  return r;
}

// 1

void topologyFidelity(Check& c) {
  GraphStore s;
  const auto t = buildTopology({.clustersPerSide = 3, .nodesPerClusterSide = 4, .nodeSpacing = 10}, s);
  std::int64_t leads = 0;
  for (const auto& e : s.edges()) leads += e.kind == EdgeKind::Lead;
  c.expect(s.countNodes(NodeKind::Sink) == 1, "sink count");
  c.expect(s.countNodes(NodeKind::Gateway) == 9, "gateway count");
  c.expect(s.countNodes(NodeKind::SensorNode) == 144, "sensor count");
  c.expect(leads == 153 && s.edgeCount() == 153, "lead edges");
  for (const auto& n : s.nodes()) {
    const auto p = t.position(n.id());
    const bool grid = p.x == std::floor(p.x) && p.y == std::floor(p.y) && p.x >= 10 && p.x <= 120 && p.y >= 10 &&
                      p.y <= 120;
    c.expect(grid, "coordinate off grid for " + t.name(n.id()));
  }
  c.why << "1 sink, 9 gateways, 144 sensors, " << leads << " leads";
}

// 2

void attenuationFidelity(Check& c) {
  constexpr int acoustic30[11] = {20, 18, 16, 14, 12, 10, 8, 6, 4, 2, 0};
  constexpr int seismic30[11] = {40, 36, 32, 28, 24, 20, 16, 12, 8, 4, 0};
  GraphStore s;
  const auto t = buildTopology({}, s);
  const auto n30 = t.sensorNode(2, 0);
  const auto n40 = t.sensorNode(3, 0);
  c.expect(t.position(n30) == Position{30, 10} && t.position(n40) == Position{40, 10}, "straddling nodes");
  for (int k = 0; k <= 10; ++k) {
    auto e = Entity::of(EntityKind::Animal, 1, {30.0 + k, 10.0});
    e.baseAcoustic = 20;
    e.baseSeismic = 40;
    const auto rs = senseTick(t, {e}, 0, {.radius = 10, .emitQuiescent = true});
    for (const auto& r : rs) {
      if (r.sensorNode == n30) {
        c.expect(r.acoustic == acoustic30[k] && r.seismic == seismic30[k], "node (30,10) column " + std::to_string(k));
      } else if (r.sensorNode == n40) {
        c.expect(r.acoustic == acoustic30[10 - k] && r.seismic == seismic30[10 - k],
                 "node (40,10) column " + std::to_string(k));
      }
    }
  }
  c.why << "22 columns exact";
}

// 3

void algorithmTraces(Check& c) {
  const auto literal = ClassificationProfile::published();
  const auto animal = classify(true, 12, 20, literal);
  c.expect(animal.label == Concept::Animal &&
               std::abs(animal.weight - std::min(score(12, 5, 20), score(20, 5, 30))) < 1e-12,
           "classify(true,12,20)");
  c.expect(classify(false, 100, 100, literal).label == Concept::Unknown, "classify pir gate");
  c.expect(classify(true, 40, 45, literal).label == Concept::Human, "classify(true,40,45)");

  FusionConfig f1{.level1Threshold = 5, .profile = literal};
  const auto first = firstLevelFusion({NodeId{1}, 0, true, 12, 20}, "SN-000-000", f1);
  c.expect(first && first->label == Concept::Animal, "level 1 emit");
  c.expect(!firstLevelFusion({NodeId{1}, 0, true, 4, 20}, "SN-000-000", f1), "level 1 gate");
  c.expect(!firstLevelFusion({NodeId{1}, 0, false, 50, 50}, "SN-000-000", f1), "level 1 pir");

  FusionConfig f2{.level2ThresholdPct = 10};
  std::vector<SnFusedRec> dup{report(20, "a"), report(21, "b")};
  std::vector<SnFusedRec> both{report(20, "a"), report(40, "b")};
  std::vector<SnFusedRec> single{report(9, "a")};
  const auto g1 = secondLevelFusion(dup, f2);
  c.expect(g1.kept.size() == 1 && g1.kept[0].acoustic == 20 && g1.droppedCount == 1, "level 2 [20,21]");
  c.expect(secondLevelFusion(both, f2).kept.size() == 2, "level 2 [20,40]");
  c.expect(secondLevelFusion(single, f2).droppedCount == 0, "level 2 singleton");

  FusionConfig f3{.level3Threshold = 15};
  const auto batch = [](std::vector<int> acoustics) {
    GwFusedRec g;
    g.gatewayName = "GW-0-0";
    int i = 0;
    for (int a : acoustics) g.kept.push_back(report(a, "SN-" + std::to_string(i++)));
    return std::vector<GwFusedRec>{g};
  };
  const auto a1 = thirdLevelFusion(batch({16, 18}), f3);
  c.expect(a1.size() == 1 && a1[0].acoustic == 18, "level 3 [16,18]");
  c.expect(thirdLevelFusion(batch({16}), f3).empty(), "level 3 [16]");
  c.expect(thirdLevelFusion(batch({16, 14, 18}), f3).empty(), "level 3 [16,14,18]");

  TopologyConfig tcfg;
  GraphStore scratch;
  const auto topo = buildTopology(tcfg, scratch);
  DatagenConfig dcfg{.sense = {.emitQuiescent = true}, .backgroundEntities = 12};
  std::size_t minReadings = SIZE_MAX;
  for (std::uint64_t seed = 1; seed <= kSeededTraces; ++seed) {
    Scenario sc(topo, dcfg, seed);
    sc.scheduleEvent(EventKind::Attack, 3);
    sc.scheduleEvent(EventKind::Smuggling, 10);
    std::vector<std::vector<SensorRawDataRec>> trace;
    std::size_t readings = 0;
    while (readings < kReadingsPerTrace) {
      trace.push_back(sc.nextTick());
      readings += trace.back().size();
    }
    minReadings = std::min(minReadings, readings);

    std::array<std::string, 2> snapshots;
    std::array<std::vector<TickOutput>, 2> outputs;
    std::array<PipelineStats, 2> stats;
    for (int m = 0; m < 2; ++m) {
      GraphStore store;
      const auto t = buildTopology(tcfg, store);
      TraceSource source(trace);
      PipelineOptions opts{.mode = m == 0 ? PipelineMode::SingleThreaded : PipelineMode::Concurrent,
                           .onTick = [&, m](const TickOutput& out) { outputs[m].push_back(out); }};
      stats[m] = runPipeline(t, source, store, opts, static_cast<Tick>(trace.size()));
      std::ostringstream snap;
      store.exportSnapshot(snap);
      snapshots[m] = snap.str();
    }
    c.expect(stats[0] == stats[1] && outputs[0] == outputs[1] && snapshots[0] == snapshots[1],
             "pipeline differs from replay on seed " + std::to_string(seed));
  }
  c.why << "fixtures exact; " << kSeededTraces << " traces >= " << minReadings << " readings equal";
}

// 4

void queryCorrectness(Check& c) {
  oracle::Gen g(2024);
  std::int64_t largest = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimulationSetup setup;
    setup.seed = seed;
    setup.topology = {.clustersPerSide = static_cast<int>(g.integer(3, 5)), .nodesPerClusterSide = 2,
                      .gatewayHops = true};
    setup.datagen.sense.emitQuiescent = seed % 2 == 0;
    setup.datagen.backgroundEntities = static_cast<int>(g.integer(10, 30));
    setup.mode = PipelineMode::SingleThreaded;
    setup.events = {{1, EventKind::Attack}, {4, EventKind::Smuggling}};
    const auto data = simulate(setup, 100);
    largest = std::max<std::int64_t>(largest, data.rawRecords());
    c.expect(static_cast<std::int64_t>(data.rawRecords()) <= kQueryCeiling, "dataset above ceiling");
    const auto db = buildRelationalBaseline(*data.store);
    for (const char* label : {"Animal", "Human", "Vehicle"}) {
      for (double w : {0.0, 0.5, 0.9}) {
        const auto q1 = oracle::q1(*data.store, label, w);
        c.expect(graph::queryConceptBased(*data.store, label, w) == q1 &&
                     relational::queryConceptBased(db, label, w) == q1,
                 "Q1 mismatch");
        const auto q3 = oracle::q3(*data.store, label, w);
        c.expect(graph::queryRecursiveDepth(*data.store, label, w) == q3 &&
                     relational::queryRecursiveDepth(db, label, w) == q3,
                 "Q3 mismatch");
      }
    }
    for (std::int64_t a : {0, 15, 30}) {
      for (int n : {1, 3}) {
        const auto q2 = oracle::q2(*data.store, a, n);
        c.expect(graph::queryVideoChains(*data.store, a, n) == q2 && relational::queryVideoChains(db, a, n) == q2,
                 "Q2 mismatch");
      }
    }
  }
  c.why << "10 datasets, largest " << largest << " raw records";
}

// 5

void benchmarkDirection(Check& c) {
  const auto cfg = loadRunConfig(sourceDir / "config" / "bench.json");
  c.expect(cfg.setup.topology.gatewayHops, "bench config without gateway hops");
  c.expect(cfg.benchmark.repetitions >= 5, "fewer than 5 repetitions");
  const auto data = simulate(cfg.setup, cfg.ticks);
  const auto raws = static_cast<std::int64_t>(data.rawRecords());
  c.expect(raws >= kBenchFloor, "only " + std::to_string(raws) + " raw records");
  const auto report = runBenchmark(*data.store, cfg.benchmark);
  double graphMs = -1, relMs = -1;
  std::size_t rows = 0;
  for (const auto& r : report.rows) {
    if (r.query != QueryId::RecursiveDepth) continue;
    (r.backend == Backend::Graph ? graphMs : relMs) = r.medianMs;
    rows = r.resultRows;
  }
  c.expect(rows > 0, "recursive query returned no rows");
  c.expect(graphMs >= 0 && graphMs < relMs, "graph median not below relational");
  c.why << raws << " raw, " << rows << " rows, graph " << graphMs << " ms < relational " << relMs << " ms";
}

// 6

void scalingHarness(Check& c) {
  const auto csvPath = fs::temp_directory_path() / "wmsn_acceptance_bench.csv";
  int status = 0;
  const auto out = runCommand(cli + " bench --config " + (sourceDir / "config" / "bench.json").string() +
                                  " --months 1..5 --csv " + csvPath.string(),
                              status);
  c.expect(status == 0, "bench exited with " + std::to_string(status) + ": " + out);
  std::ifstream in(csvPath);
  std::string line;
  std::getline(in, line);
  c.expect(line == BenchmarkReport::kCsvHeader, "CSV header");
  std::vector<std::int64_t> sizes;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string query, backend, records;
    std::getline(fields, query, ',');
    std::getline(fields, backend, ',');
    std::getline(fields, records, ',');
    const auto n = std::stoll(records);
    if (sizes.empty() || sizes.back() != n) sizes.push_back(n);
  }
  c.expect(rows == 5 * 3 * 2, "CSV rows " + std::to_string(rows));
  c.expect(sizes.size() == 5 && std::is_sorted(sizes.begin(), sizes.end()) &&
               std::adjacent_find(sizes.begin(), sizes.end()) == sizes.end(),
           "data sizes not increasing");
  const auto at = out.find("q1 median growth per doubling (graph): ");
  c.expect(at != std::string::npos, "growth factor not reported");
  if (at != std::string::npos) c.why << out.substr(at, out.find('\n', at) - at) << "; ";
  c.why << "sizes";
  for (auto s : sizes) c.why << ' ' << s;
  fs::remove(csvPath);
}

// 7

void determinism(Check& c) {
  const auto base = fs::temp_directory_path() / "wmsn_acceptance_det";
  fs::remove_all(base);
  std::array<std::string, 2> snaps, traces;
  for (int i = 0; i < 2; ++i) {
    const auto dir = base / std::to_string(i);
    int status = 0;
    const auto out = runCommand(cli + " simulate --config " + (sourceDir / "config" / "default.json").string() +
                                    " --seed 11 --ticks 120 --export " + dir.string(),
                                status);
    c.expect(status == 0, "simulate exited with " + std::to_string(status) + ": " + out);
    snaps[i] = slurp(dir / "snapshot.wmsn");
    traces[i] = slurp(dir / "trace.jsonl");
  }
  c.expect(!snaps[0].empty() && !traces[0].empty(), "empty export");
  c.expect(snaps[0] == snaps[1], "snapshots differ");
  c.expect(traces[0] == traces[1], "traces differ");
  c.why << "snapshot " << snaps[0].size() << " B, trace " << traces[0].size() << " B identical";
  fs::remove_all(base);
}

// 8

void eventSemantics(Check& c) {
  SimulationSetup setup;
  setup.datagen.backgroundEntities = 0;
  setup.fusion.level3Threshold = 10;
  setup.events = {{0, EventKind::Attack}};
  std::stringstream trace;
  const auto data = simulate(setup, 40, &trace);
  c.expect(data.stats.actions >= 1, "attack raised no action");
  c.expect(data.store->countNodes(NodeKind::SinkFusedData) == data.stats.actions, "action records");
  GraphStore replayStore;
  const auto topo = buildTopology(setup.topology, replayStore);
  TraceSource source(readTrace(trace, replayStore));
  const auto replay =
      runPipeline(topo, source, replayStore, {.fusion = setup.fusion, .mode = PipelineMode::SingleThreaded}, 40);
  c.expect(replay == data.stats, "attack replay differs");

  std::size_t westReadings = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario sc(topo, {.backgroundEntities = 0}, seed);
    sc.scheduleEvent(EventKind::Smuggling, 0);
    const auto first = sc.nextTick();
    Rng rng(seed, 0);
    const auto spawned = spawnEvent(EventKind::Smuggling, topo.config(), rng, 0);
    std::set<std::uint64_t> expected, got;
    for (const auto& e : spawned) {
      for (auto sn : topo.sensorNodes()) {
        const auto p = topo.position(sn);
        if (std::hypot(p.x - e.position.x, p.y - e.position.y) <= setup.datagen.sense.radius) expected.insert(raw(sn));
      }
    }
    for (const auto& r : first) {
      got.insert(raw(r.sensorNode));
      c.expect(topo.position(r.sensorNode).x == topo.config().nodeSpacing, "reading off the west edge");
    }
    c.expect(!got.empty() && got == expected, "smuggling first-tick nodes, seed " + std::to_string(seed));
    westReadings += got.size();
    const auto& es = sc.entities();
    c.expect(es.size() == 2 && es[0].position.x == es[1].position.x &&
                 std::abs(es[0].position.y - es[1].position.y) == topo.config().nodeSpacing,
             "smuggling groups not co-moving");
  }
  c.why << data.stats.actions << " actions; " << westReadings << " west-edge readings over 10 seeds";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: wmsn_acceptance <wmsn-cli> <source-dir>\n";
    return 2;
  }
  cli = argv[1];
  sourceDir = argv[2];

  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"topology fidelity", topologyFidelity},   {"attenuation fidelity", attenuationFidelity},
      {"algorithm traces", algorithmTraces},     {"query correctness", queryCorrectness},
      {"benchmark direction", benchmarkDirection}, {"scaling harness", scalingHarness},
      {"determinism", determinism},              {"event semantics", eventSemantics},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < kBudget[i + 1], "over time budget");
    failed += !c.ok;
    std::printf("criterion %zu %-22s %s  (%.2f s; %s)\n", i + 1, criteria[i].first, c.ok ? "PASS" : "FAIL", secs,
                c.why.str().c_str());
  }
  return failed == 0 ? 0 : 1;
}
