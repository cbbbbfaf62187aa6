#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wmsn/datagen.hpp"

namespace wmsn {

enum class Concept : std::uint8_t { Animal, Human, Vehicle, Unknown };
std::string_view toString(Concept c);
std::optional<Concept> parseConcept(std::string_view name);

struct Range {
  double lo = 0;
  double hi = std::numeric_limits<double>::infinity();
  /// lo is exclusive ("> 35" rows).
  bool loOpen = false;

  bool contains(double v) const { return (loOpen ? v > lo : v >= lo) && v <= hi; }
  bool bounded() const { return hi != std::numeric_limits<double>::infinity(); }
};

/// Membership of v in r: 1.0 across the middle half of a bounded range,
/// falling linearly to 0.5 at either edge; an unbounded range climbs from 0.5
/// at lo to 1.0 at 2*lo. Only meaningful when r.contains(v).
double rangeScore(const Range& r, double v);

struct ConceptRule {
  Concept label;
  bool pirRequired = true;
  Range seismic;
  Range acoustic;
};

struct ClassificationProfile {
  std::string name;
  std::vector<ConceptRule> rules;

  /// Object-identification thresholds exactly as published.
  static ClassificationProfile published();
  /// Ranges fitted to the simulated entity emissions so a Human, Animal or
  /// Vehicle within 2 units of a node classifies as itself.
  static ClassificationProfile calibrated();
  static std::optional<ClassificationProfile> named(std::string_view name);
};

struct Classification {
  Concept label = Concept::Unknown;
  double weight = 0;

  friend bool operator==(const Classification&, const Classification&) = default;
};

Classification classify(bool pir, double seismic, double acoustic, const ClassificationProfile& profile);

struct FusionConfig {
  double level1Threshold = 5;
  double level2ThresholdPct = 10;
  double level3Threshold = 15;
  ClassificationProfile profile = ClassificationProfile::calibrated();
  /// Seeds the synthetic video durations and feature vectors.
  std::uint64_t mediaSeed = 0;

  void validate() const;
};

inline constexpr std::size_t kFeatureLength = 8;

struct SnFusedRec {
  NodeId sensorNode{};
  std::string nodeName;
  Tick tick = 0;
  Concept label = Concept::Unknown;
  double weight = 0;
  int acoustic = 0;
  int seismic = 0;
  std::string videoPath;
  int videoDurationSec = 0;
  std::string frameRef;
  std::string foregroundRef;
  std::string silhouetteRef;
  std::array<double, kFeatureLength> frmFeatures{};
  std::array<double, kFeatureLength> fgndFeatures{};

  friend bool operator==(const SnFusedRec&, const SnFusedRec&) = default;
};

struct GwFusedRec {
  NodeId gateway{};
  std::string gatewayName;
  Tick tick = 0;
  std::vector<SnFusedRec> kept;
  int droppedCount = 0;

  friend bool operator==(const GwFusedRec&, const GwFusedRec&) = default;
};

enum class ActionKind : std::uint8_t { Alarm, Notify };
std::string_view toString(ActionKind kind);

struct SinkFusedRec {
  Tick tick = 0;
  Concept label = Concept::Unknown;
  double weight = 0;
  int acoustic = 0;
  std::string sourceGateway;
  std::string sourceNode;
  ActionKind actionKind = ActionKind::Notify;

  friend bool operator==(const SinkFusedRec&, const SinkFusedRec&) = default;
};

class FusionError : public std::runtime_error {
 public:
  enum class Code { EmptyBatch, StoreWriteFailure, QueueOverflow, InvalidConfig };

  FusionError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Sensor-level fusion: gate on PIR and both scalars reaching the threshold,
/// then attach synthetic multimedia outputs and a concept.
std::optional<SnFusedRec> firstLevelFusion(const SensorRawDataRec& reading, std::string_view nodeName,
                                           const FusionConfig& config);

/// Gateway-level duplicate removal over one gateway's reports for one tick,
/// ordered by node name. The acoustic difference to the predecessor is signed.
GwFusedRec secondLevelFusion(std::span<const SnFusedRec> batch, const FusionConfig& config,
                             NodeId gateway = {}, std::string_view gatewayName = {});

/// Sink-level fusion: an action for each kept record whose predecessor in the
/// same gateway's list is also above the threshold.
std::vector<SinkFusedRec> thirdLevelFusion(std::span<const GwFusedRec> batch, const FusionConfig& config);

}  // namespace wmsn
