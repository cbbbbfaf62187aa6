#include "wmsn/service.hpp"

#include <charconv>
#include <set>

#include <httplib.h>

namespace wmsn {

using nlohmann::json;

namespace {

class BadRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ServiceResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

json parseBody(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw BadRequest("malformed JSON body");
  if (!doc.is_object()) throw BadRequest("body must be a JSON object");
  return doc;
}

void allowOnly(const json& body, std::initializer_list<std::string_view> keys) {
  for (const auto& [key, value] : body.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw BadRequest("unknown field '" + key + "'");
  }
}

template <typename T>
std::optional<T> field(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end()) return std::nullopt;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw BadRequest(std::string(key) + " must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw BadRequest(std::string(key) + " must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer() || (std::is_unsigned_v<T> && !it->is_number_unsigned())) {
      throw BadRequest(std::string(key) + " must be an integer");
    }
  } else {
    if (!it->is_number()) throw BadRequest(std::string(key) + " must be a number");
  }
  return it->get<T>();
}

std::optional<std::uint64_t> parseId(std::string_view text) {
  std::uint64_t id = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return id;
}

std::vector<std::string_view> splitPath(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto end = path.find('/');
    parts.push_back(path.substr(0, end));
    if (end == std::string_view::npos) break;
    path.remove_prefix(end);
  }
  return parts;
}

json message(std::string_view type) { return {{"v", kStreamVersion}, {"type", type}}; }

/// A stream message body without its v/type envelope, for HTTP responses.
json unwrap(json msg) {
  msg.erase("v");
  msg.erase("type");
  return msg;
}

json actionJson(std::uint64_t simId, const SinkFusedRec& a) {
  return {{"simId", simId},
          {"tick", a.tick},
          {"concept", toString(a.label)},
          {"weight", a.weight},
          {"acoustic", a.acoustic},
          {"gateway", a.sourceGateway},
          {"node", a.sourceNode},
          {"actionKind", toString(a.actionKind)}};
}

template <typename Row>
json rowsJson(const std::vector<Row>& rows);

template <>
json rowsJson(const std::vector<ConceptRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back({r.label, r.weight, r.fusionTick, r.indexX, r.indexY});
  return out;
}

template <>
json rowsJson(const std::vector<VideoChainRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({r.nodeName, r.indexX, r.indexY, r.acoustic, r.videoPath, r.videoDurationSec, r.startTick});
  }
  return out;
}

template <>
json rowsJson(const std::vector<DepthRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back({r.gatewayName, r.nodeName, r.fusionTick, r.depth});
  return out;
}

json topologyConfigJson(const TopologyConfig& t) {
  return {{"clustersPerSide", t.clustersPerSide},
          {"nodesPerClusterSide", t.nodesPerClusterSide},
          {"nodeSpacing", t.nodeSpacing},
          {"gatewayHops", t.gatewayHops}};
}

}  // namespace

std::string_view toString(SimState s) {
  switch (s) {
    case SimState::Idle: return "Idle";
    case SimState::Running: return "Running";
    case SimState::Finished: return "Finished";
  }
  return "?";
}

// StreamHub

std::vector<std::string> StreamHub::Subscription::next(std::chrono::milliseconds wait) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, wait, [&] { return closed_ || !pending_.empty(); });
  std::vector<std::string> out(std::make_move_iterator(pending_.begin()), std::make_move_iterator(pending_.end()));
  pending_.clear();
  return out;
}

bool StreamHub::Subscription::closed() const {
  std::lock_guard lock(mutex_);
  return closed_ && pending_.empty();
}

std::shared_ptr<StreamHub::Subscription> StreamHub::subscribe(const std::string& first) {
  auto sub = std::make_shared<Subscription>();
  std::lock_guard lock(mutex_);
  sub->pending_.push_back(first);
  if (closed_) {
    sub->closed_ = true;
  } else {
    subs_.push_back(sub);
  }
  return sub;
}

void StreamHub::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mutex_);
  subs_.erase(std::remove(subs_.begin(), subs_.end(), sub), subs_.end());
}

void StreamHub::publish(const std::vector<json>& messages) {
  if (messages.empty()) return;
  std::vector<std::string> text;
  text.reserve(messages.size());
  for (const auto& m : messages) text.push_back(m.dump());
  std::lock_guard lock(mutex_);
  if (closed_) return;
  for (const auto& sub : subs_) {
    {
      std::lock_guard subLock(sub->mutex_);
      sub->pending_.insert(sub->pending_.end(), text.begin(), text.end());
    }
    sub->cv_.notify_all();
  }
}

void StreamHub::closeAll(int code, std::string_view reason) {
  auto close = message("close");
  close["code"] = code;
  close["reason"] = reason;
  const auto text = close.dump();
  std::lock_guard lock(mutex_);
  if (closed_) return;
  closed_ = true;
  for (const auto& sub : subs_) {
    {
      std::lock_guard subLock(sub->mutex_);
      sub->pending_.push_back(text);
      sub->closed_ = true;
    }
    sub->cv_.notify_all();
  }
  subs_.clear();
}

std::size_t StreamHub::subscriberCount() const {
  std::lock_guard lock(mutex_);
  return subs_.size();
}

// Simulations

struct ControlService::Run {
  std::shared_ptr<GraphStore> store = std::make_shared<GraphStore>();
  Topology topology;
  std::unique_ptr<Scenario> scenario;
  std::unique_ptr<PipelineStepper> stepper;
};

struct ControlService::Simulation {
  struct Spawn {
    std::optional<EventKind> event;
    EntityKind kind = EntityKind::Human;
    std::optional<double> speed;
  };

  std::uint64_t id = 0;
  std::uint64_t topologyId = 0;
  TopologyConfig topology;
  FusionConfig fusion;
  std::uint64_t seed = 0;
  bool repeat = false;
  std::int64_t maxTicks = 0;
  int tickMillis = 0;
  std::optional<EntityKind> entityType;
  std::optional<double> speed;

  std::mutex mutex;
  std::condition_variable wake;
  SimState state = SimState::Idle;
  std::int64_t currentTick = 0;
  std::size_t liveEntities = 0;
  int runs = 0;
  std::int64_t actions = 0;
  bool stopRequested = false;
  std::deque<Spawn> commands;
  std::shared_ptr<Run> run;
  std::thread thread;
};

ControlService::ControlService(RunConfig config) : config_(std::move(config)) {
  topologies_[nextTopologyId_] = config_.setup.topology;
  currentTopology_ = nextTopologyId_++;
  GraphStore scratch;
  const auto topo = buildTopology(config_.setup.topology, scratch);
  json nodes = json::array();
  json leads = json::array();
  for (const auto& n : scratch.nodes()) {
    const auto p = topo.position(n.id());
    nodes.push_back({{"id", raw(n.id())}, {"kind", toString(n.kind())}, {"name", topo.name(n.id())},
                     {"x", p.x}, {"y", p.y}});
  }
  for (const auto& e : scratch.edges()) leads.push_back({raw(e.from), raw(e.to)});
  auto msg = message("topology");
  msg["topologyId"] = currentTopology_;
  msg["config"] = topologyConfigJson(config_.setup.topology);
  msg["nodes"] = std::move(nodes);
  msg["leads"] = std::move(leads);
  topologyMessage_ = msg.dump();
  installRoutes();
}

ControlService::~ControlService() {
  stop();
  if (serverThread_.joinable()) serverThread_.join();
}

std::string ControlService::topologyMessage() const {
  std::lock_guard lock(mutex_);
  return topologyMessage_;
}

ServiceResponse ControlService::handle(std::string_view method, std::string_view target, std::string_view body) {
  std::string_view path = target;
  std::string_view query;
  if (const auto q = target.find('?'); q != std::string_view::npos) {
    path = target.substr(0, q);
    query = target.substr(q + 1);
  }
  const auto parts = splitPath(path);
  try {
    if (method == "POST" && parts.size() == 1 && parts[0] == "topology") return createTopology(parseBody(body));
    if (method == "POST" && parts.size() == 1 && parts[0] == "simulations") return startSimulation(parseBody(body));
    if (parts.size() >= 2 && parts[0] == "simulations") {
      const auto id = parseId(parts[1]);
      if (!id) return error(404, "unknown simulation '" + std::string(parts[1]) + "'");
      if (method == "GET" && parts.size() == 2) return getSimulation(*id);
      if (method == "POST" && parts.size() == 3 && parts[2] == "stop") return stopSimulation(*id);
      if (method == "POST" && parts.size() == 3 && parts[2] == "events") {
        if (!findSimulation(*id)) return error(404, "unknown simulation " + std::to_string(*id));
        return injectEvent(*id, parseBody(body));
      }
    }
    if (method == "GET" && parts.size() == 1 && parts[0] == "actions") {
      std::optional<std::uint64_t> simId;
      if (query.starts_with("simId=")) {
        simId = parseId(query.substr(6));
        if (!simId) return error(400, "simId must be an integer");
      }
      return listActions(simId);
    }
    if (method == "POST" && parts.size() == 2 && parts[0] == "queries") return runQuery(parts[1], parseBody(body));
    if (method == "GET" && parts.size() == 1 && parts[0] == "metrics") return metrics();
    if (method == "POST" && parts.size() == 1 && parts[0] == "stream") return streamControl(parseBody(body));
  } catch (const BadRequest& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, e.what());
  }
  return error(404, "no route for " + std::string(method) + " " + std::string(path));
}

ServiceResponse ControlService::createTopology(const json& body) {
  allowOnly(body, {"clustersPerSide", "nodesPerClusterSide", "nodeSpacing", "gatewayHops"});
  TopologyConfig cfg = config_.setup.topology;
  if (auto v = field<int>(body, "clustersPerSide")) cfg.clustersPerSide = *v;
  if (auto v = field<int>(body, "nodesPerClusterSide")) cfg.nodesPerClusterSide = *v;
  if (auto v = field<double>(body, "nodeSpacing")) cfg.nodeSpacing = *v;
  if (auto v = field<bool>(body, "gatewayHops")) cfg.gatewayHops = *v;
  try {
    cfg.validate();
  } catch (const TopologyError& e) {
    throw BadRequest(e.what());
  }

  GraphStore scratch;
  const auto topo = buildTopology(cfg, scratch);
  json nodes = json::array();
  json leads = json::array();
  for (const auto& n : scratch.nodes()) {
    const auto p = topo.position(n.id());
    nodes.push_back({{"id", raw(n.id())}, {"kind", toString(n.kind())}, {"name", topo.name(n.id())},
                     {"x", p.x}, {"y", p.y}});
  }
  for (const auto& e : scratch.edges()) leads.push_back({raw(e.from), raw(e.to)});

  auto msg = message("topology");
  std::uint64_t id;
  {
    std::lock_guard lock(mutex_);
    id = nextTopologyId_++;
    topologies_[id] = cfg;
    currentTopology_ = id;
    msg["topologyId"] = id;
    msg["config"] = topologyConfigJson(cfg);
    msg["nodes"] = std::move(nodes);
    msg["leads"] = std::move(leads);
    topologyMessage_ = msg.dump();
  }
  hub_.publish({msg});
  return {201, {{"topologyId", id}, {"nodes", scratch.nodeCount()}, {"edges", scratch.edgeCount()}}};
}

std::shared_ptr<ControlService::Run> ControlService::newRun(const Simulation& sim, int runIndex) const {
  auto run = std::make_shared<Run>();
  run->topology = buildTopology(sim.topology, *run->store);
  auto datagen = config_.setup.datagen;
  // A run started with an entity follows that entity alone.
  if (sim.entityType) datagen.backgroundEntities = 0;
  run->scenario = std::make_unique<Scenario>(run->topology, datagen,
                                             mixSeed(sim.seed, static_cast<std::uint64_t>(runIndex)));
  if (sim.entityType) run->scenario->addWanderer(*sim.entityType, sim.speed);
  run->stepper = std::make_unique<PipelineStepper>(run->topology, *run->scenario, *run->store, sim.fusion);
  return run;
}

ServiceResponse ControlService::startSimulation(const json& body) {
  allowOnly(body, {"topologyId", "entityType", "speed", "repeat", "seed", "maxTicks", "tickMillis", "fusion"});
  if (stopping_) return error(409, "service is shutting down");
  auto sim = std::make_shared<Simulation>();
  {
    std::lock_guard lock(mutex_);
    sim->topologyId = field<std::uint64_t>(body, "topologyId").value_or(currentTopology_);
    auto it = topologies_.find(sim->topologyId);
    if (it == topologies_.end()) return error(404, "unknown topology " + std::to_string(sim->topologyId));
    sim->topology = it->second;
  }
  if (auto type = field<std::string>(body, "entityType")) {
    sim->entityType = parseEntityKind(*type);
    if (!sim->entityType) throw BadRequest("unknown entity type '" + *type + "'");
  }
  sim->speed = field<double>(body, "speed");
  if (sim->speed && !(*sim->speed > 0)) throw BadRequest("speed must be > 0");
  sim->repeat = field<bool>(body, "repeat").value_or(false);
  sim->seed = field<std::uint64_t>(body, "seed").value_or(config_.setup.seed);
  sim->maxTicks = field<std::int64_t>(body, "maxTicks").value_or(config_.service.maxTicks);
  if (sim->maxTicks < 1) throw BadRequest("maxTicks must be >= 1");
  sim->tickMillis = field<int>(body, "tickMillis").value_or(config_.service.tickMillis);
  if (sim->tickMillis < 0) throw BadRequest("tickMillis must be >= 0");
  sim->fusion = config_.setup.fusion;
  if (auto it = body.find("fusion"); it != body.end()) {
    if (!it->is_object()) throw BadRequest("fusion must be an object");
    allowOnly(*it, {"level1Threshold", "level2ThresholdPct", "level3Threshold", "profile"});
    if (auto v = field<double>(*it, "level1Threshold")) sim->fusion.level1Threshold = *v;
    if (auto v = field<double>(*it, "level2ThresholdPct")) sim->fusion.level2ThresholdPct = *v;
    if (auto v = field<double>(*it, "level3Threshold")) sim->fusion.level3Threshold = *v;
    if (auto v = field<std::string>(*it, "profile")) {
      auto p = ClassificationProfile::named(*v);
      if (!p) throw BadRequest("unknown profile '" + *v + "'");
      sim->fusion.profile = std::move(*p);
    }
    try {
      sim->fusion.validate();
    } catch (const FusionError& e) {
      throw BadRequest(e.what());
    }
  }

  {
    std::lock_guard lock(mutex_);
    sim->id = nextSimId_++;
    sims_[sim->id] = sim;
  }
  {
    // Running from the moment the id is handed out, so events can be injected immediately.
    std::lock_guard lock(sim->mutex);
    sim->state = SimState::Running;
  }
  sim->thread = std::thread([this, sim] { runLoop(sim); });
  return {201, unwrap(simulationJson(*sim))};
}

void ControlService::runLoop(const std::shared_ptr<Simulation>& sim) {
  for (int runIndex = 0;; ++runIndex) {
    auto run = newRun(*sim, runIndex);
    {
      std::lock_guard lock(sim->mutex);
      sim->run = run;
      sim->state = SimState::Running;
      sim->currentTick = 0;
      sim->runs = runIndex + 1;
    }
    hub_.publish({simulationJson(*sim)});

    bool stopped = false;
    for (;;) {
      std::deque<Simulation::Spawn> commands;
      {
        std::lock_guard lock(sim->mutex);
        if (sim->stopRequested) {
          stopped = true;
          break;
        }
        commands.swap(sim->commands);
      }
      for (const auto& c : commands) {
        if (c.event) {
          run->scenario->injectEvent(*c.event);
        } else {
          run->scenario->addWanderer(c.kind, c.speed);
        }
      }
      const auto out = run->stepper->step();
      publishTick(*sim, *run, out);
      if (!out.actions.empty()) {
        std::lock_guard lock(mutex_);
        for (const auto& a : out.actions) actions_.push_back(actionJson(sim->id, a));
      }

      const bool entityLeft = sim->entityType && run->scenario->liveEntities() == 0 &&
                              !run->scenario->hasPendingEvents();
      std::unique_lock lock(sim->mutex);
      sim->currentTick = out.tick + 1;
      sim->liveEntities = run->scenario->liveEntities();
      sim->actions += static_cast<std::int64_t>(out.actions.size());
      if (sim->currentTick >= sim->maxTicks || (entityLeft && sim->commands.empty())) break;
      if (sim->tickMillis > 0) {
        sim->wake.wait_for(lock, std::chrono::milliseconds(sim->tickMillis), [&] { return sim->stopRequested; });
      }
    }
    if (stopped || !sim->repeat || stopping_) break;
  }
  {
    std::lock_guard lock(sim->mutex);
    sim->state = SimState::Finished;
  }
  hub_.publish({simulationJson(*sim)});
}

void ControlService::publishTick(const Simulation& sim, const Run& run, const TickOutput& out) {
  std::vector<json> batch;
  auto tick = message("tick");
  tick["simId"] = sim.id;
  tick["tick"] = out.tick;
  batch.push_back(std::move(tick));

  auto entities = message("entities");
  entities["simId"] = sim.id;
  entities["tick"] = out.tick;
  entities["entities"] = json::array();
  for (const auto& e : run.scenario->entities()) {
    if (!e.alive) continue;
    entities["entities"].push_back(
        {{"id", e.id}, {"kind", entityType(e.kind).name}, {"x", e.position.x}, {"y", e.position.y}});
  }
  batch.push_back(std::move(entities));

  std::map<std::uint64_t, const SnFusedRec*> fusedByNode;
  for (const auto& f : out.snFused) fusedByNode[raw(f.sensorNode)] = &f;
  auto detections = message("detections");
  detections["simId"] = sim.id;
  detections["tick"] = out.tick;
  detections["detections"] = json::array();
  for (const auto& r : out.raw) {
    if (!r.pir && r.acoustic == 0 && r.seismic == 0) continue;
    json d = {{"node", run.topology.name(r.sensorNode)},
              {"acoustic", r.acoustic},
              {"seismic", r.seismic},
              {"pir", r.pir}};
    if (auto it = fusedByNode.find(raw(r.sensorNode)); it != fusedByNode.end()) {
      d["concept"] = toString(it->second->label);
      d["weight"] = it->second->weight;
    }
    detections["detections"].push_back(std::move(d));
  }
  batch.push_back(std::move(detections));

  for (const auto& a : out.actions) {
    auto msg = actionJson(sim.id, a);
    msg["v"] = kStreamVersion;
    msg["type"] = "action";
    batch.push_back(std::move(msg));
  }
  hub_.publish(batch);
}

std::shared_ptr<ControlService::Simulation> ControlService::findSimulation(std::uint64_t id) {
  std::lock_guard lock(mutex_);
  auto it = sims_.find(id);
  return it == sims_.end() ? nullptr : it->second;
}

json ControlService::simulationJson(const Simulation& sim) {
  auto& s = const_cast<Simulation&>(sim);
  std::lock_guard lock(s.mutex);
  auto msg = message("simulation");
  msg["simId"] = sim.id;
  msg["topologyId"] = sim.topologyId;
  msg["state"] = toString(sim.state);
  msg["currentTick"] = sim.currentTick;
  msg["liveEntities"] = sim.liveEntities;
  msg["repeat"] = sim.repeat;
  msg["runs"] = sim.runs;
  msg["actions"] = sim.actions;
  return msg;
}

ServiceResponse ControlService::stopSimulation(std::uint64_t id) {
  auto sim = findSimulation(id);
  if (!sim) return error(404, "unknown simulation " + std::to_string(id));
  {
    std::lock_guard lock(sim->mutex);
    sim->stopRequested = true;
  }
  sim->wake.notify_all();
  {
    // Handlers may race on stop; only one joins.
    static std::mutex joinMutex;
    std::lock_guard lock(joinMutex);
    if (sim->thread.joinable()) sim->thread.join();
  }
  return {200, unwrap(simulationJson(*sim))};
}

ServiceResponse ControlService::injectEvent(std::uint64_t id, const json& body) {
  auto sim = findSimulation(id);
  if (!sim) return error(404, "unknown simulation " + std::to_string(id));
  Simulation::Spawn spawn;
  if (body.contains("kind")) {
    allowOnly(body, {"kind"});
    const auto kind = field<std::string>(body, "kind");
    spawn.event = parseEventKind(*kind);
    if (!spawn.event) throw BadRequest("kind must be Attack or Smuggling");
  } else if (body.contains("type")) {
    allowOnly(body, {"type", "speed"});
    const auto type = field<std::string>(body, "type");
    const auto kind = parseEntityKind(*type);
    if (!kind) throw BadRequest("unknown entity type '" + *type + "'");
    spawn.kind = *kind;
    spawn.speed = field<double>(body, "speed");
    if (spawn.speed && !(*spawn.speed > 0)) throw BadRequest("speed must be > 0");
  } else {
    throw BadRequest("body needs 'kind' or 'type'");
  }
  {
    std::lock_guard lock(sim->mutex);
    if (sim->state != SimState::Running || sim->stopRequested) {
      return error(409, "simulation " + std::to_string(id) + " is " + std::string(toString(sim->state)));
    }
    sim->commands.push_back(spawn);
  }
  sim->wake.notify_all();
  json out = {{"simId", id}, {"accepted", true}};
  if (spawn.event) {
    out["kind"] = toString(*spawn.event);
  } else {
    out["type"] = entityType(spawn.kind).name;
  }
  return {202, out};
}

ServiceResponse ControlService::getSimulation(std::uint64_t id) {
  auto sim = findSimulation(id);
  if (!sim) return error(404, "unknown simulation " + std::to_string(id));
  return {200, unwrap(simulationJson(*sim))};
}

ServiceResponse ControlService::listActions(std::optional<std::uint64_t> simId) {
  json out = json::array();
  std::lock_guard lock(mutex_);
  for (const auto& a : actions_) {
    if (!simId || a["simId"].get<std::uint64_t>() == *simId) out.push_back(a);
  }
  return {200, out};
}

ServiceResponse ControlService::runQuery(std::string_view q, const json& body) {
  const auto query = parseQueryId(q);
  if (!query) return error(404, "unknown query '" + std::string(q) + "'");
  allowOnly(body, {"simId", "backend", "concept", "minWeight", "minAcoustic", "chainLen"});
  const auto simId = field<std::uint64_t>(body, "simId");
  if (!simId) throw BadRequest("simId is required");
  auto sim = findSimulation(*simId);
  if (!sim) return error(404, "unknown simulation " + std::to_string(*simId));

  QueryParams params = config_.benchmark.params;
  if (auto c = field<std::string>(body, "concept")) params.q1Concept = params.q3Concept = *c;
  if (auto w = field<double>(body, "minWeight")) params.q1MinWeight = params.q3MinWeight = *w;
  if (auto a = field<std::int64_t>(body, "minAcoustic")) params.q2MinAcoustic = *a;
  if (auto n = field<int>(body, "chainLen")) params.q2ChainLen = *n;
  const auto backendName = field<std::string>(body, "backend").value_or("graph");
  if (backendName != "graph" && backendName != "relational") throw BadRequest("backend must be graph or relational");

  std::shared_ptr<Run> run;
  {
    std::lock_guard lock(sim->mutex);
    run = sim->run;
  }
  QueryRows rows;
  if (run) {
    try {
      auto lock = run->store->readLock();
      rows = backendName == "graph" ? runGraph(*run->store, *query, params)
                                    : runRelational(buildRelationalBaseline(*run->store), *query, params);
    } catch (const QueryError& e) {
      throw BadRequest(e.what());
    }
  } else {
    rows = runGraph(GraphStore{}, *query, params);
  }
  json columns = json::array();
  const auto addColumns = [&](const auto& names) {
    for (auto c : names) columns.push_back(c);
  };
  json data = std::visit(
      [&](const auto& v) {
        using Row = typename std::decay_t<decltype(v)>::value_type;
        addColumns(Row::kColumns);
        return rowsJson(v);
      },
      rows);
  return {200, {{"query", toString(*query)}, {"backend", backendName}, {"simId", *simId}, {"columns", columns},
                {"rows", data}}};
}

ServiceResponse ControlService::metrics() {
  std::vector<std::shared_ptr<Simulation>> sims;
  std::size_t actionCount = 0;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, s] : sims_) sims.push_back(s);
    actionCount = actions_.size();
  }
  std::int64_t running = 0, ticks = 0;
  for (const auto& s : sims) {
    std::lock_guard lock(s->mutex);
    running += s->state == SimState::Running ? 1 : 0;
    ticks += s->currentTick;
  }
  return {200,
          {{"simulations", sims.size()},
           {"running", running},
           {"ticks", ticks},
           {"actions", actionCount},
           {"subscribers", hub_.subscriberCount()},
           {"streamVersion", kStreamVersion}}};
}

ServiceResponse ControlService::streamControl(const json& body) {
  allowOnly(body, {"verb", "simId", "body"});
  const auto verb = field<std::string>(body, "verb");
  if (!verb) throw BadRequest("verb is required");
  const auto it = std::find_if(kControlVerbs.begin(), kControlVerbs.end(),
                               [&](const ControlVerb& v) { return v.verb == *verb; });
  if (it == kControlVerbs.end()) throw BadRequest("unknown verb '" + *verb + "'");
  std::string path(it->path);
  if (const auto pos = path.find("{id}"); pos != std::string::npos) {
    const auto simId = field<std::uint64_t>(body, "simId");
    if (!simId) throw BadRequest(*verb + " needs simId");
    path.replace(pos, 4, std::to_string(*simId));
  }
  const json inner = body.contains("body") ? body["body"] : json::object();
  auto res = handle(it->method, path, inner.dump());
  return {res.status, {{"verb", *verb}, {"status", res.status}, {"body", res.body}}};
}

// HTTP

void ControlService::installRoutes() {
  server_ = std::make_unique<httplib::Server>();
  server_->Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = hub_.subscribe(topologyMessage());
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub](std::size_t, httplib::DataSink& sink) {
          if (!sink.is_writable()) return false;
          for (const auto& m : sub->next(std::chrono::milliseconds(200))) {
            const std::string frame = "data: " + m + "\n\n";
            if (!sink.write(frame.data(), frame.size())) return false;
          }
          if (sub->closed()) sink.done();
          return true;
        },
        [this, sub](bool) { hub_.unsubscribe(sub); });
  });
  const auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto out = handle(req.method, req.target, req.body);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->Get(".*", route);
  server_->Post(".*", route);
}

int ControlService::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  serverThread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void ControlService::listen(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  server_->listen_after_bind();
}

void ControlService::stop() {
  if (stopping_.exchange(true)) return;
  std::vector<std::uint64_t> ids;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, s] : sims_) ids.push_back(id);
  }
  for (auto id : ids) stopSimulation(id);
  hub_.closeAll(kCloseGoingAway, "server shutdown");
  // Give stream handlers one poll interval to flush the close message.
  std::this_thread::sleep_for(std::chrono::milliseconds(250));
  server_->stop();
}

}  // namespace wmsn
