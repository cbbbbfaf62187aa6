#include "wmsn/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace wmsn {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string keyPath(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* take(std::string_view key) {
    seen_.emplace(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void read(std::string_view key, std::int64_t& out, std::int64_t min = INT64_MIN) {
    if (const auto* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(keyPath(key), "expected an integer");
      out = v->get<std::int64_t>();
      if (out < min) throw ConfigError(keyPath(key), "must be >= " + std::to_string(min));
    }
  }

  void read(std::string_view key, int& out, std::int64_t min = INT32_MIN) {
    std::int64_t v = out;
    read(key, v, min);
    if (v > INT32_MAX) throw ConfigError(keyPath(key), "out of range");
    out = static_cast<int>(v);
  }

  void readSize(std::string_view key, std::size_t& out, std::int64_t min) {
    std::int64_t v = static_cast<std::int64_t>(out);
    read(key, v, min);
    out = static_cast<std::size_t>(v);
  }

  void read(std::string_view key, std::uint64_t& out) {
    if (const auto* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(keyPath(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void read(std::string_view key, double& out) {
    if (const auto* v = take(key)) {
      if (!v->is_number()) throw ConfigError(keyPath(key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(std::string_view key, bool& out) {
    if (const auto* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(keyPath(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(std::string_view key, std::string& out) {
    if (const auto* v = take(key)) {
      if (!v->is_string()) throw ConfigError(keyPath(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  /// Calls fn(Reader&) on a nested object when present.
  template <typename Fn>
  void section(std::string_view key, Fn&& fn) {
    if (const auto* v = take(key)) {
      Reader child(*v, keyPath(key));
      fn(child);
      child.finish();
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError(keyPath(key), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

std::string_view modeName(PipelineMode m) {
  return m == PipelineMode::Concurrent ? "concurrent" : "single-threaded";
}

}  // namespace

RunConfig parseRunConfig(const json& doc) {
  RunConfig cfg;
  auto& s = cfg.setup;
  Reader root(doc, "");
  root.read("seed", s.seed);
  root.section("topology", [&](Reader& r) {
    r.read("clustersPerSide", s.topology.clustersPerSide, 1);
    r.read("nodesPerClusterSide", s.topology.nodesPerClusterSide, 1);
    r.read("nodeSpacing", s.topology.nodeSpacing);
    if (!(s.topology.nodeSpacing > 0)) throw ConfigError("topology.nodeSpacing", "must be > 0");
    r.read("gatewayHops", s.topology.gatewayHops);
  });
  root.section("datagen", [&](Reader& r) {
    r.read("radius", s.datagen.sense.radius);
    if (!(s.datagen.sense.radius > 0)) throw ConfigError("datagen.radius", "must be > 0");
    r.read("emitQuiescent", s.datagen.sense.emitQuiescent);
    r.read("ticksPerMonth", s.datagen.ticksPerMonth, 1);
    r.read("backgroundEntities", s.datagen.backgroundEntities, 0);
    std::string attack(entityType(s.datagen.events.attackType).name);
    r.read("attackType", attack);
    const auto kind = parseEntityKind(attack);
    if (!kind) throw ConfigError("datagen.attackType", "unknown entity type '" + attack + "'");
    s.datagen.events.attackType = *kind;
  });
  root.section("fusion", [&](Reader& r) {
    r.read("level1Threshold", s.fusion.level1Threshold);
    r.read("level2ThresholdPct", s.fusion.level2ThresholdPct);
    r.read("level3Threshold", s.fusion.level3Threshold);
    r.read("mediaSeed", s.fusion.mediaSeed);
    std::string profile = s.fusion.profile.name;
    r.read("profile", profile);
    auto named = ClassificationProfile::named(profile);
    if (!named) throw ConfigError("fusion.profile", "unknown profile '" + profile + "'");
    s.fusion.profile = std::move(*named);
    try {
      s.fusion.validate();
    } catch (const FusionError& e) {
      throw ConfigError("fusion", e.what());
    }
  });
  root.section("pipeline", [&](Reader& r) {
    std::string mode(modeName(s.mode));
    r.read("mode", mode);
    if (mode == "concurrent") {
      s.mode = PipelineMode::Concurrent;
    } else if (mode == "single-threaded") {
      s.mode = PipelineMode::SingleThreaded;
    } else {
      throw ConfigError("pipeline.mode", "expected 'concurrent' or 'single-threaded'");
    }
    r.section("queues", [&](Reader& q) {
      q.readSize("scalarData", s.queues.scalarData, 1);
      q.readSize("fused", s.queues.fused, 1);
      q.readSize("forward", s.queues.forward, 1);
      q.readSize("action", s.queues.action, 1);
      std::int64_t stall = s.queues.stallTimeout.count();
      q.read("stallTimeoutMs", stall, 1);
      s.queues.stallTimeout = std::chrono::milliseconds(stall);
    });
  });
  root.section("simulation", [&](Reader& r) {
    r.read("ticks", cfg.ticks, 0);
    if (const auto* events = r.take("events")) {
      if (!events->is_array()) throw ConfigError("simulation.events", "expected an array");
      for (std::size_t i = 0; i < events->size(); ++i) {
        const std::string path = "simulation.events[" + std::to_string(i) + "]";
        Reader e((*events)[i], path);
        ScheduledEvent ev;
        e.read("tick", ev.tick, 0);
        std::string kind;
        e.read("kind", kind);
        const auto parsed = parseEventKind(kind);
        if (!parsed) throw ConfigError(path + ".kind", "expected 'Attack' or 'Smuggling'");
        ev.kind = *parsed;
        e.finish();
        s.events.push_back(ev);
      }
    }
  });
  root.section("benchmark", [&](Reader& r) {
    r.read("repetitions", cfg.benchmark.repetitions, 5);
    r.read("warmup", cfg.benchmark.warmup, 0);
    r.section("queries", [&](Reader& q) {
      auto& p = cfg.benchmark.params;
      q.read("q1Concept", p.q1Concept);
      q.read("q1MinWeight", p.q1MinWeight);
      q.read("q2MinAcoustic", p.q2MinAcoustic);
      q.read("q2ChainLen", p.q2ChainLen, 1);
      q.read("q3Concept", p.q3Concept);
      q.read("q3MinWeight", p.q3MinWeight);
      for (const auto& [key, value] : {std::pair{"q1Concept", p.q1Concept}, {"q3Concept", p.q3Concept}}) {
        if (!parseConcept(value)) throw ConfigError(std::string("benchmark.queries.") + key, "unknown concept");
      }
    });
  });
  root.section("service", [&](Reader& r) {
    r.read("host", cfg.service.host);
    r.read("port", cfg.service.port, 0);
    if (cfg.service.port > 65535) throw ConfigError("service.port", "must be <= 65535");
    r.read("tickMillis", cfg.service.tickMillis, 0);
    r.read("maxTicks", cfg.service.maxTicks, 1);
  });
  root.finish();

  try {
    s.topology.validate();
  } catch (const TopologyError& e) {
    throw ConfigError("topology", e.what());
  }
  return cfg;
}

RunConfig parseRunConfig(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parseRunConfig(doc);
}

RunConfig loadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parseRunConfig(text.str());
}

json toJson(const RunConfig& cfg) {
  const auto& s = cfg.setup;
  json events = json::array();
  for (const auto& e : s.events) events.push_back({{"tick", e.tick}, {"kind", toString(e.kind)}});
  const auto& p = cfg.benchmark.params;
  return {
      {"seed", s.seed},
      {"topology",
       {{"clustersPerSide", s.topology.clustersPerSide},
        {"nodesPerClusterSide", s.topology.nodesPerClusterSide},
        {"nodeSpacing", s.topology.nodeSpacing},
        {"gatewayHops", s.topology.gatewayHops}}},
      {"datagen",
       {{"radius", s.datagen.sense.radius},
        {"emitQuiescent", s.datagen.sense.emitQuiescent},
        {"ticksPerMonth", s.datagen.ticksPerMonth},
        {"backgroundEntities", s.datagen.backgroundEntities},
        {"attackType", entityType(s.datagen.events.attackType).name}}},
      {"fusion",
       {{"level1Threshold", s.fusion.level1Threshold},
        {"level2ThresholdPct", s.fusion.level2ThresholdPct},
        {"level3Threshold", s.fusion.level3Threshold},
        {"profile", s.fusion.profile.name},
        {"mediaSeed", s.fusion.mediaSeed}}},
      {"pipeline",
       {{"mode", modeName(s.mode)},
        {"queues",
         {{"scalarData", s.queues.scalarData},
          {"fused", s.queues.fused},
          {"forward", s.queues.forward},
          {"action", s.queues.action},
          {"stallTimeoutMs", s.queues.stallTimeout.count()}}}}},
      {"simulation", {{"ticks", cfg.ticks}, {"events", events}}},
      {"benchmark",
       {{"repetitions", cfg.benchmark.repetitions},
        {"warmup", cfg.benchmark.warmup},
        {"queries",
         {{"q1Concept", p.q1Concept},
          {"q1MinWeight", p.q1MinWeight},
          {"q2MinAcoustic", p.q2MinAcoustic},
          {"q2ChainLen", p.q2ChainLen},
          {"q3Concept", p.q3Concept},
          {"q3MinWeight", p.q3MinWeight}}}}},
      {"service",
       {{"host", cfg.service.host},
        {"port", cfg.service.port},
        {"tickMillis", cfg.service.tickMillis},
        {"maxTicks", cfg.service.maxTicks}}},
  };
}

std::optional<std::filesystem::path> resolveConfigPath(const std::optional<std::string>& cliPath) {
  if (cliPath && !cliPath->empty()) return std::filesystem::path(*cliPath);
  if (const char* env = std::getenv("WMSN_CONFIG"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

}  // namespace wmsn
