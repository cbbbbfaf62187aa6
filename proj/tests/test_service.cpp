#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "wmsn/service.hpp"

using namespace wmsn;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

RunConfig quietConfig() {
  RunConfig cfg;
  cfg.setup.datagen.backgroundEntities = 0;
  cfg.service.tickMillis = 0;
  cfg.service.maxTicks = 60;
  return cfg;
}

json post(ControlService& svc, const std::string& path, const json& body, int expect) {
  const auto res = svc.handle("POST", path, body.dump());
  CHECK_MESSAGE(res.status == expect, path << " -> " << res.body.dump());
  return res.body;
}

void waitFinished(ControlService& svc, std::uint64_t id) {
  for (int i = 0; i < 2000; ++i) {
    if (svc.handle("GET", "/simulations/" + std::to_string(id), "").body["state"] == "Finished") return;
    std::this_thread::sleep_for(5ms);
  }
  FAIL("simulation did not finish");
}

std::vector<json> drain(StreamHub::Subscription& sub) {
  std::vector<json> out;
  for (;;) {
    const auto batch = sub.next(50ms);
    if (batch.empty()) return out;
    for (const auto& m : batch) out.push_back(json::parse(m));
  }
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("control routes and status codes") {
  ControlService svc(quietConfig());
  const auto topo = post(svc, "/topology", json::object(), 201);
  CHECK(topo["nodes"] == 154);
  CHECK(topo["edges"] == 153);
  CHECK_FALSE(topo.contains("v"));

  const auto sim = post(svc, "/simulations", {{"entityType", "Human"}, {"tickMillis", 5}, {"maxTicks", 400}}, 201);
  const auto id = sim["simId"].get<std::uint64_t>();
  CHECK(sim["state"] == "Running");
  const auto path = "/simulations/" + std::to_string(id);

  post(svc, path + "/events", {{"kind", "Attack"}}, 202);
  post(svc, path + "/events", {{"type", "Animal"}, {"speed", 2}}, 202);
  post(svc, path + "/events", {{"kind", "Parade"}}, 400);
  post(svc, path + "/events", {{"kind", "Attack"}, {"extra", 1}}, 400);
  post(svc, "/simulations/999/events", {{"kind", "Attack"}}, 404);
  post(svc, "/simulations", {{"entityType", "Dragon"}}, 400);
  post(svc, "/simulations", {{"topologyId", 77}}, 404);
  post(svc, "/topology", {{"clustersPerSide", 0}}, 400);
  CHECK(svc.handle("POST", "/simulations", "{not json").status == 400);
  CHECK(svc.handle("GET", "/nowhere", "").status == 404);
  CHECK(svc.handle("GET", "/simulations/999", "").status == 404);

  post(svc, path + "/stop", json::object(), 200);
  CHECK(svc.handle("GET", path, "").body["state"] == "Finished");
  post(svc, path + "/events", {{"kind", "Attack"}}, 409);
  post(svc, path + "/stop", json::object(), 200);

  const auto metrics = svc.handle("GET", "/metrics", "").body;
  CHECK(metrics["simulations"] == 1);
  CHECK(metrics["running"] == 0);
  CHECK(metrics["streamVersion"] == kStreamVersion);
}

TEST_CASE("stopped simulation leaves a queryable store that both backends agree on") {
  auto cfg = quietConfig();
  cfg.setup.datagen.backgroundEntities = 10;
  ControlService svc(cfg);
  const auto id = post(svc, "/simulations", {{"tickMillis", 1}, {"maxTicks", 5000}}, 201)["simId"];
  std::this_thread::sleep_for(150ms);
  post(svc, "/simulations/" + id.dump() + "/stop", json::object(), 200);
  for (const char* q : {"q1", "q2", "q3"}) {
    json body{{"simId", id}, {"minWeight", 0.0}, {"concept", "Human"}};
    const auto g = post(svc, std::string("/queries/") + q, body, 200);
    body["backend"] = "relational";
    const auto r = post(svc, std::string("/queries/") + q, body, 200);
    CHECK(g["rows"] == r["rows"]);
    CHECK(g["columns"] == r["columns"]);
  }
  post(svc, "/queries/q9", {{"simId", id}}, 404);
  post(svc, "/queries/q1", json::object(), 400);
  post(svc, "/queries/q1", {{"simId", id}, {"concept", "Dragon"}}, 400);
}

TEST_CASE("attack raises actions visible over /actions and in the same tick's stream flush") {
  ControlService svc(quietConfig());
  auto sub = svc.stream().subscribe(svc.topologyMessage());
  const auto sim = post(svc, "/simulations", {{"fusion", {{"level3Threshold", 10}}}, {"maxTicks", 40}}, 201);
  const auto id = sim["simId"].get<std::uint64_t>();
  post(svc, "/simulations/" + std::to_string(id) + "/events", {{"kind", "Attack"}}, 202);
  waitFinished(svc, id);

  const auto actions = svc.handle("GET", "/actions?simId=" + std::to_string(id), "").body;
  REQUIRE(actions.is_array());
  REQUIRE(actions.size() >= 1);
  const auto& a = actions[0];
  for (const char* key : {"simId", "tick", "concept", "weight", "acoustic", "gateway", "node", "actionKind"}) {
    CHECK_MESSAGE(a.contains(key), key);
  }

  const auto messages = drain(*sub);
  REQUIRE_FALSE(messages.empty());
  CHECK(messages.front()["type"] == "topology");
  std::optional<std::int64_t> lastTick;
  std::size_t streamed = 0;
  for (const auto& m : messages) {
    CHECK(m["v"] == kStreamVersion);
    if (m["type"] == "tick") lastTick = m["tick"].get<std::int64_t>();
    if (m["type"] == "action") {
      ++streamed;
      REQUIRE(lastTick);
      CHECK(m["tick"] == *lastTick);
    }
  }
  CHECK(streamed == actions.size());
}

TEST_CASE("two subscribers see identical sequences") {
  ControlService svc(quietConfig());
  auto a = svc.stream().subscribe(svc.topologyMessage());
  auto b = svc.stream().subscribe(svc.topologyMessage());
  const auto id = post(svc, "/simulations", {{"entityType", "Vehicle"}, {"maxTicks", 30}}, 201)["simId"];
  waitFinished(svc, id.get<std::uint64_t>());
  const auto ma = drain(*a);
  const auto mb = drain(*b);
  CHECK(ma.size() > 4);
  CHECK(ma == mb);
}

TEST_CASE("every control verb routes over HTTP and over the stream channel") {
  for (const auto& v : kControlVerbs) {
    ControlService viaHttp(quietConfig());
    ControlService viaStream(quietConfig());
    const auto prepare = [](ControlService& svc) {
      return post(svc, "/simulations", {{"entityType", "Human"}, {"tickMillis", 2}, {"maxTicks", 2000}}, 201)["simId"];
    };
    const auto idHttp = prepare(viaHttp);
    const auto idStream = prepare(viaStream);
    REQUIRE(idHttp == idStream);

    json body = json::object();
    if (v.verb == "injectEvent") body = {{"kind", "Smuggling"}};
    std::string path(v.path);
    if (const auto pos = path.find("{id}"); pos != std::string::npos) path.replace(pos, 4, idHttp.dump());

    const auto direct = viaHttp.handle(v.method, path, body.dump());
    json envelope{{"verb", v.verb}, {"body", body}};
    if (std::string(v.path).find("{id}") != std::string::npos) envelope["simId"] = idStream;
    const auto relayed = viaStream.handle("POST", "/stream", envelope.dump());
    CHECK_MESSAGE(direct.status < 300, v.verb);
    CHECK(relayed.status == direct.status);
    CHECK(relayed.body["status"] == direct.status);
    CHECK(relayed.body["verb"] == v.verb);
    viaHttp.stop();
    viaStream.stop();
  }
  ControlService svc(quietConfig());
  CHECK(svc.handle("POST", "/stream", R"({"verb":"explode"})").status == 400);
  CHECK(svc.handle("POST", "/stream", R"({"verb":"stopSimulation"})").status == 400);
}

TEST_CASE("real HTTP: topology first on /stream, close 1001 on shutdown") {
  ControlService svc(quietConfig());
  const int port = svc.start("127.0.0.1", 0);
  REQUIRE(port > 0);

  httplib::Client cli("127.0.0.1", port);
  const auto topo = cli.Post("/topology", R"({"clustersPerSide":2,"nodesPerClusterSide":2})", "application/json");
  REQUIRE(topo);
  CHECK(topo->status == 201);
  CHECK(json::parse(topo->body)["nodes"] == 1 + 4 + 16);
  const auto bad = cli.Post("/simulations/5/events", R"({"kind":"Attack"})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 404);

  std::mutex m;
  std::string received;
  std::thread reader([&] {
    httplib::Client sse("127.0.0.1", port);
    sse.set_read_timeout(10, 0);
    sse.Get("/stream", [&](const char* data, std::size_t len) {
      std::lock_guard lock(m);
      received.append(data, len);
      return true;
    });
  });
  for (int i = 0; i < 400; ++i) {
    {
      std::lock_guard lock(m);
      if (!received.empty()) break;
    }
    std::this_thread::sleep_for(5ms);
  }
  svc.stop();
  reader.join();

  std::vector<json> events;
  for (std::size_t pos = 0; (pos = received.find("data: ", pos)) != std::string::npos;) {
    const auto end = received.find("\n\n", pos);
    REQUIRE(end != std::string::npos);
    events.push_back(json::parse(received.substr(pos + 6, end - pos - 6)));
    pos = end;
  }
  REQUIRE(events.size() >= 2);
  CHECK(events.front()["type"] == "topology");
  CHECK(events.front()["nodes"].size() == 21);
  CHECK(events.back()["type"] == "close");
  CHECK(events.back()["code"] == kCloseGoingAway);
}

}
