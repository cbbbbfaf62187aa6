#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wmsn/topology.hpp"

namespace wmsn {

/// Seeded stream with draws defined independently of the standard library's
/// distribution implementations, so traces are stable across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform01();
  /// Uniform integer in [lo, hi].
  std::int64_t uniformInt(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t stream);

enum class EntityKind : std::uint8_t { Human, Animal, Vehicle, GroupOfHuman, GroupOfAnimal };

struct EntityType {
  EntityKind kind;
  std::string_view name;
  double speed;
  int baseAcoustic;
  int baseSeismic;
};

const std::array<EntityType, 5>& entityTypes();
const EntityType& entityType(EntityKind kind);
std::optional<EntityKind> parseEntityKind(std::string_view name);

enum class Move : std::uint8_t { North, South, East, West, Stay };

/// Relative weights for {North, South, East, West, Stay}.
struct MovementBias {
  std::array<double, 5> weights{1, 1, 1, 1, 1};

  static MovementBias uniform() { return {}; }
  static MovementBias toward(Move m) {
    MovementBias b{{0, 0, 0, 0, 0}};
    b.weights[static_cast<std::size_t>(m)] = 1;
    return b;
  }
};

Move drawMove(const MovementBias& bias, Rng& rng);

struct Entity {
  std::uint64_t id = 0;
  EntityKind kind = EntityKind::Human;
  double speed = 1;
  int baseAcoustic = 0;
  int baseSeismic = 0;
  Position position;
  bool alive = true;
  std::uint64_t rngStream = 0;
  MovementBias bias;
  /// Entities sharing a group draw one move per tick.
  std::optional<std::uint64_t> group;

  static Entity of(EntityKind kind, std::uint64_t id, Position p);
};

struct SensorRawDataRec {
  NodeId sensorNode{};
  Tick tick = 0;
  bool pir = false;
  int seismic = 0;
  int acoustic = 0;

  friend bool operator==(const SensorRawDataRec&, const SensorRawDataRec&) = default;
};

/// base * max(0, 1 - distance/radius), rounded to the nearest integer.
int attenuate(double base, double distance, double radius);

/// Moves speed units in the given direction; dies on leaving [0, areaSide]^2.
Entity applyMove(Entity entity, Move move, double areaSide);
Entity stepEntity(Entity entity, Rng& rng, double areaSide);

struct SenseConfig {
  double radius = 10.0;
  bool emitQuiescent = false;
};

/// One record per sensed node, ordered by node id; readings from several
/// in-range entities add up.
std::vector<SensorRawDataRec> senseTick(const Topology& topology, const std::vector<Entity>& entities,
                                        Tick tick, const SenseConfig& config);

enum class EventKind : std::uint8_t { Attack, Smuggling };
std::string_view toString(EventKind kind);
std::optional<EventKind> parseEventKind(std::string_view name);

struct EventOptions {
  EntityKind attackType = EntityKind::Vehicle;
};

/// Attack: one entity on the south edge heading north. Smuggling: a
/// GroupOfHuman and GroupOfAnimal on adjacent sensor rows of the west edge,
/// co-moving east or south. Entity ids start at `firstId`.
std::vector<Entity> spawnEvent(EventKind kind, const TopologyConfig& topology, Rng& rng,
                               std::uint64_t firstId, const EventOptions& options = {});

/// An entity of the given kind entering from a random edge with uniform movement.
Entity spawnWanderer(EntityKind kind, const TopologyConfig& topology, Rng& rng, std::uint64_t id);

struct DatagenConfig {
  SenseConfig sense;
  std::int64_t ticksPerMonth = 8640;
  EventOptions events;
  /// Wandering entities kept alive by respawning when one leaves the area.
  int backgroundEntities = 4;
};

/// Source of raw readings for the fusion pipeline.
class ReadingSource {
 public:
  virtual ~ReadingSource() = default;
  /// Readings for the next tick; ticks are consecutive starting at 0.
  virtual std::vector<SensorRawDataRec> nextTick() = 0;
};

/// Living world: entities, scheduled events and per-tick sensing.
class Scenario : public ReadingSource {
 public:
  Scenario(const Topology& topology, DatagenConfig config, std::uint64_t seed);

  void scheduleEvent(EventKind kind, Tick at);
  /// Spawns on the next call to nextTick().
  void injectEvent(EventKind kind);
  std::uint64_t addEntity(Entity entity);
  std::uint64_t addWanderer(EntityKind kind, std::optional<double> speed = std::nullopt);

  /// Spawns due events, senses at current positions, then moves every entity.
  std::vector<SensorRawDataRec> nextTick() override;

  Tick currentTick() const { return tick_; }
  const std::vector<Entity>& entities() const { return entities_; }
  std::size_t liveEntities() const;
  bool hasPendingEvents() const { return !pending_.empty(); }

 private:
  struct Pending {
    EventKind kind;
    Tick at;
  };

  void step();

  const Topology* topology_;
  DatagenConfig config_;
  std::uint64_t seed_;
  Rng spawnRng_;
  std::vector<Entity> entities_;
  std::vector<Rng> entityRngs_;
  std::vector<Pending> pending_;
  std::uint64_t nextEntityId_ = 0;
  std::uint64_t nextGroupId_ = 0;
  Tick tick_ = 0;
};

/// Replays a recorded trace: one vector of readings per tick.
class TraceSource : public ReadingSource {
 public:
  explicit TraceSource(std::vector<std::vector<SensorRawDataRec>> ticks) : ticks_(std::move(ticks)) {}
  std::vector<SensorRawDataRec> nextTick() override;

 private:
  std::vector<std::vector<SensorRawDataRec>> ticks_;
  std::size_t next_ = 0;
};

/// One JSON object per line: {"node","tick","pir","seismic","acoustic"}.
void writeTraceLine(std::ostream& out, const Topology& topology, const SensorRawDataRec& rec);
/// Groups a trace by tick; ticks missing from the file become empty.
std::vector<std::vector<SensorRawDataRec>> readTrace(std::istream& in, const GraphStore& store);

}  // namespace wmsn
