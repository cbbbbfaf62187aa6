#include "wmsn/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace wmsn {

std::string_view toString(Concept c) {
  switch (c) {
    case Concept::Animal: return "Animal";
    case Concept::Human: return "Human";
    case Concept::Vehicle: return "Vehicle";
    case Concept::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<Concept> parseConcept(std::string_view name) {
  for (auto c : {Concept::Animal, Concept::Human, Concept::Vehicle, Concept::Unknown}) {
    if (toString(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view toString(ActionKind kind) { return kind == ActionKind::Alarm ? "Alarm" : "Notify"; }

double rangeScore(const Range& r, double v) {
  if (!r.bounded()) {
    if (r.lo <= 0) return 1.0;
    return std::clamp(0.5 + 0.5 * (v - r.lo) / r.lo, 0.5, 1.0);
  }
  const double width = r.hi - r.lo;
  if (width <= 0) return 1.0;
  const double quarter = width / 4;
  if (v < r.lo + quarter) return std::clamp(0.5 + 0.5 * (v - r.lo) / quarter, 0.5, 1.0);
  if (v > r.hi - quarter) return std::clamp(0.5 + 0.5 * (r.hi - v) / quarter, 0.5, 1.0);
  return 1.0;
}

ClassificationProfile ClassificationProfile::published() {
  return {"published",
          {
              {Concept::Animal, true, {5, 20}, {5, 30}},
              {Concept::Human, true, {21, 55}, {31, 50}},
              {Concept::Vehicle, true, {35, Range{}.hi, true}, {50, Range{}.hi, true}},
          }};
}

ClassificationProfile ClassificationProfile::calibrated() {
  return {"calibrated",
          {
              {Concept::Animal, true, {14, 24}, {28, 45}},
              {Concept::Human, true, {6, 13}, {12, 27}},
              {Concept::Vehicle, true, {30, Range{}.hi, true}, {30, Range{}.hi, true}},
          }};
}

std::optional<ClassificationProfile> ClassificationProfile::named(std::string_view name) {
  if (name == "published") return published();
  if (name == "calibrated") return calibrated();
  return std::nullopt;
}

namespace {

// Tie-break priority: Vehicle > Human > Animal.
int priority(Concept c) {
  switch (c) {
    case Concept::Vehicle: return 3;
    case Concept::Human: return 2;
    case Concept::Animal: return 1;
    case Concept::Unknown: return 0;
  }
  return 0;
}

double unitHash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t salt) {
  const auto h = mixSeed(mixSeed(mixSeed(seed, a), b), salt);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

Classification classify(bool pir, double seismic, double acoustic, const ClassificationProfile& profile) {
  Classification best;
  for (const auto& rule : profile.rules) {
    if (rule.pirRequired && !pir) continue;
    if (!rule.seismic.contains(seismic) || !rule.acoustic.contains(acoustic)) continue;
    const double weight =
        std::min(rangeScore(rule.seismic, seismic), rangeScore(rule.acoustic, acoustic));
    if (best.label == Concept::Unknown || weight > best.weight ||
        (weight == best.weight && priority(rule.label) > priority(best.label))) {
      best = {rule.label, weight};
    }
  }
  return best;
}

void FusionConfig::validate() const {
  if (level1Threshold < 0 || level2ThresholdPct < 0 || level3Threshold < 0) {
    throw FusionError(FusionError::Code::InvalidConfig, "fusion thresholds must be non-negative");
  }
  for (const auto& rule : profile.rules) {
    if (rule.seismic.lo > rule.seismic.hi || rule.acoustic.lo > rule.acoustic.hi) {
      throw FusionError(FusionError::Code::InvalidConfig,
                        "profile range for " + std::string(toString(rule.label)) + " has lo > hi");
    }
  }
}

std::optional<SnFusedRec> firstLevelFusion(const SensorRawDataRec& reading, std::string_view nodeName,
                                           const FusionConfig& config) {
  if (!(reading.pir && reading.seismic >= config.level1Threshold &&
        reading.acoustic >= config.level1Threshold)) {
    return std::nullopt;
  }
  SnFusedRec rec;
  rec.sensorNode = reading.sensorNode;
  rec.nodeName = std::string(nodeName);
  rec.tick = reading.tick;
  rec.acoustic = reading.acoustic;
  rec.seismic = reading.seismic;

  const auto node = raw(reading.sensorNode);
  const auto tick = static_cast<std::uint64_t>(reading.tick);
  const std::string suffix = std::string(nodeName) + "/" + std::to_string(reading.tick);
  rec.videoPath = "video/" + suffix + ".mp4";
  rec.videoDurationSec = 5 + static_cast<int>(mixSeed(mixSeed(config.mediaSeed, node), tick) % 26);
  rec.frameRef = "frame/" + suffix;
  rec.foregroundRef = "foreground/" + suffix;
  rec.silhouetteRef = "silhouette/" + suffix;
  for (std::size_t i = 0; i < kFeatureLength; ++i) {
    rec.frmFeatures[i] = unitHash(config.mediaSeed, node, tick, 100 + i);
    rec.fgndFeatures[i] = unitHash(config.mediaSeed, node, tick, 200 + i);
  }

  const auto c = classify(reading.pir, reading.seismic, reading.acoustic, config.profile);
  rec.label = c.label;
  rec.weight = c.weight;
  return rec;
}

GwFusedRec secondLevelFusion(std::span<const SnFusedRec> batch, const FusionConfig& config,
                             NodeId gateway, std::string_view gatewayName) {
  if (batch.empty()) throw FusionError(FusionError::Code::EmptyBatch, "second-level batch is empty");
  GwFusedRec out;
  out.gateway = gateway;
  out.gatewayName = std::string(gatewayName);
  out.tick = batch.front().tick;
  out.kept.push_back(batch.front());
  for (std::size_t i = 1; i < batch.size(); ++i) {
    const auto& current = batch[i];
    const auto& previous = batch[i - 1];
    const double diff = static_cast<double>(current.acoustic) - previous.acoustic;
    const double diffRate = current.acoustic * config.level2ThresholdPct / 100.0;
    if (diff < diffRate) {
      ++out.droppedCount;
    } else {
      out.kept.push_back(current);
    }
  }
  return out;
}

std::vector<SinkFusedRec> thirdLevelFusion(std::span<const GwFusedRec> batch, const FusionConfig& config) {
  std::vector<SinkFusedRec> actions;
  for (const auto& gw : batch) {
    for (std::size_t i = 1; i < gw.kept.size(); ++i) {
      const auto& current = gw.kept[i];
      const auto& previous = gw.kept[i - 1];
      if (current.acoustic > config.level3Threshold && previous.acoustic > config.level3Threshold) {
        SinkFusedRec action;
        action.tick = current.tick;
        action.label = current.label;
        action.weight = current.weight;
        action.acoustic = current.acoustic;
        action.sourceGateway = gw.gatewayName;
        action.sourceNode = current.nodeName;
        action.actionKind = (current.label == Concept::Vehicle || current.label == Concept::Human)
                                ? ActionKind::Alarm
                                : ActionKind::Notify;
        actions.push_back(std::move(action));
      }
    }
  }
  return actions;
}

}  // namespace wmsn
