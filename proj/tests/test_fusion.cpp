#include <doctest.h>

#include <algorithm>

#include "oracle.hpp"
#include "wmsn/datagen.hpp"
#include "wmsn/fusion.hpp"

using namespace wmsn;

namespace {

// Independent membership score: 1 across the middle half of [lo, hi], linear
// down to 0.5 at either edge; open-ended ranges reach 1 at twice lo.
double score(double v, double lo, double hi) {
  if (hi == std::numeric_limits<double>::infinity()) return std::min(1.0, 0.5 + 0.5 * (v - lo) / lo);
  const double q = (hi - lo) / 4;
  if (v < lo + q) return 0.5 + 0.5 * (v - lo) / q;
  if (v > hi - q) return 0.5 + 0.5 * (hi - v) / q;
  return 1.0;
}

SnFusedRec report(int acoustic, std::string node = "SN") {
  SnFusedRec r;
  r.acoustic = acoustic;
  r.nodeName = std::move(node);
  r.label = Concept::Human;
  return r;
}

std::vector<int> acousticsOf(const std::vector<SnFusedRec>& rs) {
  std::vector<int> out;
  for (const auto& r : rs) out.push_back(r.acoustic);
  return out;
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("classification against the published object thresholds") {
  const auto literal = ClassificationProfile::published();
  const auto animal = classify(true, 12, 20, literal);
  CHECK(animal.label == Concept::Animal);
  CHECK(animal.weight == doctest::Approx(std::min(score(12, 5, 20), score(20, 5, 30))));

  const auto edge = classify(true, 7, 20, literal);
  CHECK(edge.label == Concept::Animal);
  CHECK(edge.weight == doctest::Approx(std::min(score(7, 5, 20), score(20, 5, 30))));
  CHECK(edge.weight == doctest::Approx(0.5 + 0.5 * 2 / 3.75));

  CHECK(classify(false, 100, 100, literal).label == Concept::Unknown);
  CHECK(classify(false, 100, 100, literal).weight == 0);
  CHECK(classify(true, 40, 45, literal).label == Concept::Human);

  const auto vehicle = classify(true, 70, 80, literal);
  CHECK(vehicle.label == Concept::Vehicle);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(vehicle.weight == doctest::Approx(std::min(score(70, 35, inf), score(80, 50, inf))));
  CHECK(classify(true, 35, 80, literal).label == Concept::Unknown);
}

TEST_CASE("calibrated profile recognises each basic entity near a node") {
  const auto profile = ClassificationProfile::calibrated();
  for (auto kind : {EntityKind::Animal, EntityKind::Human, EntityKind::Vehicle}) {
    const auto& t = entityType(kind);
    for (double d : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const auto c = classify(true, attenuate(t.baseSeismic, d, 10), attenuate(t.baseAcoustic, d, 10), profile);
      CHECK(toString(c.label) == t.name);
      CHECK(c.weight > 0);
      CHECK(c.weight <= 1);
    }
  }
}

TEST_CASE("first level fusion gate") {
  FusionConfig cfg{.level1Threshold = 5, .profile = ClassificationProfile::published()};
  const auto fused = firstLevelFusion({NodeId{7}, 3, true, 12, 20}, "SN-000-001", cfg);
  REQUIRE(fused);
  CHECK(fused->label == Concept::Animal);
  CHECK(fused->videoPath == "video/SN-000-001/3.mp4");
  CHECK(fused->videoDurationSec >= 5);
  CHECK(fused->videoDurationSec <= 30);
  CHECK(fused->acoustic == 20);
  CHECK(fused->seismic == 12);
  CHECK(fused == firstLevelFusion({NodeId{7}, 3, true, 12, 20}, "SN-000-001", cfg));
  CHECK_FALSE(firstLevelFusion({NodeId{7}, 3, true, 4, 20}, "SN", cfg));
  CHECK_FALSE(firstLevelFusion({NodeId{7}, 3, false, 50, 50}, "SN", cfg));
  CHECK(firstLevelFusion({NodeId{7}, 3, true, 5, 5}, "SN", cfg));
}

TEST_CASE("second level duplicate removal") {
  FusionConfig cfg{.level2ThresholdPct = 10};
  std::vector<SnFusedRec> a{report(20, "a"), report(21, "b")};
  auto out = secondLevelFusion(a, cfg);
  CHECK(acousticsOf(out.kept) == std::vector{20});
  CHECK(out.droppedCount == 1);

  std::vector<SnFusedRec> b{report(20, "a"), report(40, "b")};
  CHECK(acousticsOf(secondLevelFusion(b, cfg).kept) == std::vector{20, 40});

  std::vector<SnFusedRec> one{report(9)};
  out = secondLevelFusion(one, cfg);
  CHECK(out.kept.size() == 1);
  CHECK(out.droppedCount == 0);

  // Signed difference: a quieter follower is always a duplicate.
  std::vector<SnFusedRec> quieter{report(40, "a"), report(10, "b")};
  CHECK(acousticsOf(secondLevelFusion(quieter, cfg).kept) == std::vector{40});

  CHECK_THROWS_AS(secondLevelFusion(std::vector<SnFusedRec>{}, cfg), FusionError);
}

TEST_CASE("third level pairs") {
  FusionConfig cfg{.level3Threshold = 15};
  const auto batch = [](std::vector<int> acoustics) {
    GwFusedRec g;
    g.gatewayName = "GW-0-0";
    int i = 0;
    for (int a : acoustics) g.kept.push_back(report(a, "SN-" + std::to_string(i++)));
    return std::vector<GwFusedRec>{g};
  };
  const auto actions = thirdLevelFusion(batch({16, 18}), cfg);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].acoustic == 18);
  CHECK(actions[0].sourceNode == "SN-1");
  CHECK(actions[0].sourceGateway == "GW-0-0");
  CHECK(actions[0].actionKind == ActionKind::Alarm);
  CHECK(thirdLevelFusion(batch({16}), cfg).empty());
  CHECK(thirdLevelFusion(batch({16, 14, 18}), cfg).empty());

  // Pairs never span gateways.
  auto two = batch({16});
  two.push_back(batch({18})[0]);
  CHECK(thirdLevelFusion(two, cfg).empty());
}

TEST_CASE("property: duplicate removal keeps order and partitions the batch") {
  oracle::Gen g(21);
  for (int trial = 0; trial < 500; ++trial) {
    FusionConfig cfg{.level2ThresholdPct = g.real(0, 50)};
    std::vector<SnFusedRec> batch;
    const int n = static_cast<int>(g.integer(1, 20));
    for (int i = 0; i < n; ++i) batch.push_back(report(static_cast<int>(g.integer(0, 80)), std::to_string(i)));
    const auto out = secondLevelFusion(batch, cfg);
    CHECK(out.kept.size() + static_cast<std::size_t>(out.droppedCount) == batch.size());
    // kept is a subsequence of the input, and the first element always survives
    std::size_t j = 0;
    for (const auto& k : out.kept) {
      while (j < batch.size() && batch[j].nodeName != k.nodeName) ++j;
      CHECK(j < batch.size());
      ++j;
    }
    CHECK(out.kept.front().nodeName == "0");
    // brute force: element i kept iff diff to its input predecessor reaches the rate
    std::vector<int> expect{batch[0].acoustic};
    for (int i = 1; i < n; ++i) {
      if (batch[i].acoustic - batch[i - 1].acoustic >= batch[i].acoustic * cfg.level2ThresholdPct / 100) {
        expect.push_back(batch[i].acoustic);
      }
    }
    CHECK(acousticsOf(out.kept) == expect);

    FusionConfig c3{.level3Threshold = g.real(0, 60)};
    const auto actions = thirdLevelFusion(std::vector<GwFusedRec>{out}, c3);
    std::size_t pairs = 0;
    for (std::size_t i = 1; i < out.kept.size(); ++i) {
      pairs += out.kept[i].acoustic > c3.level3Threshold && out.kept[i - 1].acoustic > c3.level3Threshold;
    }
    CHECK(actions.size() == pairs);
  }
}

}
