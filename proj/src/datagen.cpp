#include "wmsn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <json.hpp>

namespace wmsn {

std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mixSeed(seed, stream)) {}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniformInt(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("empty integer range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t v = 0;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

const std::array<EntityType, 5>& entityTypes() {
  static const std::array<EntityType, 5> kTypes{{
      {EntityKind::Human, "Human", 1, 20, 10},
      {EntityKind::Animal, "Animal", 2, 40, 20},
      {EntityKind::Vehicle, "Vehicle", 4, 70, 80},
      {EntityKind::GroupOfHuman, "GroupOfHuman", 1, 60, 30},
      {EntityKind::GroupOfAnimal, "GroupOfAnimal", 2, 80, 60},
  }};
  return kTypes;
}

const EntityType& entityType(EntityKind kind) { return entityTypes()[static_cast<std::size_t>(kind)]; }

std::optional<EntityKind> parseEntityKind(std::string_view name) {
  for (const auto& t : entityTypes()) {
    if (t.name == name) return t.kind;
  }
  return std::nullopt;
}

Entity Entity::of(EntityKind kind, std::uint64_t id, Position p) {
  const auto& type = entityType(kind);
  Entity e;
  e.id = id;
  e.kind = kind;
  e.speed = type.speed;
  e.baseAcoustic = type.baseAcoustic;
  e.baseSeismic = type.baseSeismic;
  e.position = p;
  e.rngStream = id;
  return e;
}

Move drawMove(const MovementBias& bias, Rng& rng) {
  double total = 0;
  for (double w : bias.weights) total += w;
  if (!(total > 0)) return Move::Stay;
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < bias.weights.size(); ++i) {
    if (u < bias.weights[i]) return static_cast<Move>(i);
    u -= bias.weights[i];
  }
  // Rounding left u just past the last positive weight.
  for (std::size_t i = bias.weights.size(); i-- > 0;) {
    if (bias.weights[i] > 0) return static_cast<Move>(i);
  }
  return Move::Stay;
}

int attenuate(double base, double distance, double radius) {
  if (distance < 0) throw std::invalid_argument("distance must be non-negative");
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
  const double factor = std::max(0.0, 1.0 - distance / radius);
  return static_cast<int>(std::lround(base * factor));
}

Entity applyMove(Entity entity, Move move, double areaSide) {
  switch (move) {
    case Move::North: entity.position.y += entity.speed; break;
    case Move::South: entity.position.y -= entity.speed; break;
    case Move::East: entity.position.x += entity.speed; break;
    case Move::West: entity.position.x -= entity.speed; break;
    case Move::Stay: break;
  }
  const auto& p = entity.position;
  entity.alive = p.x >= 0 && p.y >= 0 && p.x <= areaSide && p.y <= areaSide;
  return entity;
}

Entity stepEntity(Entity entity, Rng& rng, double areaSide) {
  const auto move = drawMove(entity.bias, rng);
  return applyMove(std::move(entity), move, areaSide);
}

std::vector<SensorRawDataRec> senseTick(const Topology& topology, const std::vector<Entity>& entities,
                                        Tick tick, const SenseConfig& config) {
  struct Sum {
    int seismic = 0;
    int acoustic = 0;
  };
  std::map<std::uint64_t, Sum> sensed;
  for (const auto& e : entities) {
    if (!e.alive) continue;
    for (const auto& [node, d] : topology.nodesWithinRadius(e.position, config.radius)) {
      auto& s = sensed[raw(node)];
      s.seismic += attenuate(e.baseSeismic, d, config.radius);
      s.acoustic += attenuate(e.baseAcoustic, d, config.radius);
    }
  }
  std::vector<SensorRawDataRec> out;
  if (config.emitQuiescent) {
    out.reserve(topology.sensorNodes().size());
    auto ids = topology.sensorNodes();
    std::sort(ids.begin(), ids.end(), [](NodeId a, NodeId b) { return raw(a) < raw(b); });
    for (auto id : ids) {
      auto it = sensed.find(raw(id));
      if (it == sensed.end()) {
        out.push_back({id, tick, false, 0, 0});
      } else {
        out.push_back({id, tick, true, it->second.seismic, it->second.acoustic});
      }
    }
  } else {
    out.reserve(sensed.size());
    for (const auto& [id, s] : sensed) {
      out.push_back({static_cast<NodeId>(id), tick, true, s.seismic, s.acoustic});
    }
  }
  return out;
}

std::string_view toString(EventKind kind) {
  return kind == EventKind::Attack ? "Attack" : "Smuggling";
}

std::optional<EventKind> parseEventKind(std::string_view name) {
  if (name == "Attack") return EventKind::Attack;
  if (name == "Smuggling") return EventKind::Smuggling;
  return std::nullopt;
}

std::vector<Entity> spawnEvent(EventKind kind, const TopologyConfig& topology, Rng& rng,
                               std::uint64_t firstId, const EventOptions& options) {
  const double s = topology.nodeSpacing;
  const int n = topology.nodesPerSide();
  std::vector<Entity> out;
  if (kind == EventKind::Attack) {
    const auto lo = static_cast<std::int64_t>(std::ceil(s));
    const auto hi = static_cast<std::int64_t>(std::floor(topology.areaSide()));
    auto e = Entity::of(options.attackType, firstId,
                        {static_cast<double>(rng.uniformInt(lo, hi)), 0.0});
    e.bias = MovementBias::toward(Move::North);
    out.push_back(e);
    return out;
  }

  const auto row = rng.uniformInt(0, n - 1);
  const auto partnerRow = row + 1 < n ? row + 1 : std::max<std::int64_t>(row - 1, 0);
  auto human = Entity::of(EntityKind::GroupOfHuman, firstId, {0.0, (row + 1) * s});
  auto animal = Entity::of(EntityKind::GroupOfAnimal, firstId + 1, {0.0, (partnerRow + 1) * s});
  MovementBias southEast{{0, 1, 1, 0, 0}};
  const double groupSpeed = std::min(human.speed, animal.speed);
  for (auto* e : {&human, &animal}) {
    e->bias = southEast;
    e->group = firstId;
    e->speed = groupSpeed;
  }
  out.push_back(human);
  out.push_back(animal);
  return out;
}

Entity spawnWanderer(EntityKind kind, const TopologyConfig& topology, Rng& rng, std::uint64_t id) {
  const auto area = static_cast<std::int64_t>(std::floor(topology.areaSide()));
  const auto edge = rng.uniformInt(0, 3);
  const auto along = static_cast<double>(rng.uniformInt(0, area));
  const double a = static_cast<double>(area);
  Position p;
  switch (edge) {
    case 0: p = {along, 0.0}; break;
    case 1: p = {along, a}; break;
    case 2: p = {0.0, along}; break;
    default: p = {a, along}; break;
  }
  return Entity::of(kind, id, p);
}

Scenario::Scenario(const Topology& topology, DatagenConfig config, std::uint64_t seed)
    : topology_(&topology), config_(config), seed_(seed), spawnRng_(seed, 0) {}

void Scenario::scheduleEvent(EventKind kind, Tick at) { pending_.push_back({kind, at}); }

void Scenario::injectEvent(EventKind kind) { pending_.push_back({kind, tick_}); }

std::uint64_t Scenario::addEntity(Entity entity) {
  entity.id = nextEntityId_++;
  entity.rngStream = entity.id;
  entityRngs_.emplace_back(seed_, 1000 + entity.rngStream);
  entities_.push_back(std::move(entity));
  return entities_.back().id;
}

std::uint64_t Scenario::addWanderer(EntityKind kind, std::optional<double> speed) {
  auto e = spawnWanderer(kind, topology_->config(), spawnRng_, 0);
  if (speed) e.speed = *speed;
  return addEntity(std::move(e));
}

std::size_t Scenario::liveEntities() const {
  return static_cast<std::size_t>(
      std::count_if(entities_.begin(), entities_.end(), [](const Entity& e) { return e.alive; }));
}

std::vector<SensorRawDataRec> Scenario::nextTick() {
  std::vector<Pending> later;
  for (const auto& p : pending_) {
    if (p.at > tick_) {
      later.push_back(p);
      continue;
    }
    const auto spawned = spawnEvent(p.kind, topology_->config(), spawnRng_, 0, config_.events);
    const auto group = nextGroupId_++;
    for (auto e : spawned) {
      if (e.group) e.group = group;
      addEntity(std::move(e));
    }
  }
  pending_ = std::move(later);

  for (auto live = static_cast<int>(liveEntities()); live < config_.backgroundEntities; ++live) {
    const auto kind = static_cast<EntityKind>(spawnRng_.uniformInt(0, entityTypes().size() - 1));
    addWanderer(kind);
  }

  auto readings = senseTick(*topology_, entities_, tick_, config_.sense);
  step();
  ++tick_;
  return readings;
}

void Scenario::step() {
  const double area = topology_->config().areaSide();
  std::unordered_map<std::uint64_t, Move> groupMoves;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    auto& e = entities_[i];
    if (!e.alive) continue;
    Move move;
    if (e.group) {
      auto it = groupMoves.find(*e.group);
      if (it == groupMoves.end()) {
        it = groupMoves.emplace(*e.group, drawMove(e.bias, entityRngs_[i])).first;
      }
      move = it->second;
    } else {
      move = drawMove(e.bias, entityRngs_[i]);
    }
    e = applyMove(std::move(e), move, area);
  }
  // Departed entities are dropped together with their streams.
  std::size_t keep = 0;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (!entities_[i].alive) continue;
    if (keep != i) {
      entities_[keep] = std::move(entities_[i]);
      entityRngs_[keep] = std::move(entityRngs_[i]);
    }
    ++keep;
  }
  entities_.resize(keep);
  entityRngs_.erase(entityRngs_.begin() + static_cast<std::ptrdiff_t>(keep), entityRngs_.end());
}

std::vector<SensorRawDataRec> TraceSource::nextTick() {
  if (next_ >= ticks_.size()) return {};
  auto out = ticks_[next_];
  ++next_;
  return out;
}

void writeTraceLine(std::ostream& out, const Topology& topology, const SensorRawDataRec& rec) {
  nlohmann::ordered_json line;
  line["node"] = topology.name(rec.sensorNode);
  line["tick"] = rec.tick;
  line["pir"] = rec.pir;
  line["seismic"] = rec.seismic;
  line["acoustic"] = rec.acoustic;
  out << line.dump() << '\n';
}

std::vector<std::vector<SensorRawDataRec>> readTrace(std::istream& in, const GraphStore& store) {
  std::vector<std::vector<SensorRawDataRec>> ticks;
  std::string text;
  std::size_t lineNo = 0;
  while (std::getline(in, text)) {
    ++lineNo;
    if (text.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(text);
      const auto name = j.at("node").get<std::string>();
      const auto node = store.findByName(NodeKind::SensorNode, name);
      if (!node) throw std::invalid_argument("unknown sensor node '" + name + "'");
      SensorRawDataRec rec{*node, j.at("tick").get<Tick>(), j.at("pir").get<bool>(),
                           j.at("seismic").get<int>(), j.at("acoustic").get<int>()};
      if (rec.tick < 0) throw std::invalid_argument("negative tick");
      if (ticks.size() <= static_cast<std::size_t>(rec.tick)) ticks.resize(rec.tick + 1);
      ticks[rec.tick].push_back(rec);
    } catch (const std::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return ticks;
}

}  // namespace wmsn
