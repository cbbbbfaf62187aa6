#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wmsn/config.hpp"

namespace httplib {
class Server;
}

namespace wmsn {

inline constexpr int kStreamVersion = 1;
/// Close code sent on the stream when the service shuts down.
inline constexpr int kCloseGoingAway = 1001;

/// One state-changing operation, reachable both over HTTP and as a /stream control verb.
struct ControlVerb {
  std::string_view verb;
  std::string_view method;
  std::string_view path;  // {id} marks the simulation id
};

inline constexpr std::array<ControlVerb, 4> kControlVerbs{{
    {"createTopology", "POST", "/topology"},
    {"startSimulation", "POST", "/simulations"},
    {"stopSimulation", "POST", "/simulations/{id}/stop"},
    {"injectEvent", "POST", "/simulations/{id}/events"},
}};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// Ordered fan-out of stream messages. Each subscriber gets every message
/// published after it subscribed, in publish order.
class StreamHub {
 public:
  class Subscription {
   public:
    /// Waits up to `wait` for messages; empty once closed and drained.
    std::vector<std::string> next(std::chrono::milliseconds wait);
    bool closed() const;

   private:
    friend class StreamHub;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::string> pending_;
    bool closed_ = false;
  };

  /// `first` is queued before anything published later.
  std::shared_ptr<Subscription> subscribe(const std::string& first);
  void unsubscribe(const std::shared_ptr<Subscription>& sub);
  void publish(const std::vector<nlohmann::json>& messages);
  /// Sends a final close message and ends every subscription.
  void closeAll(int code, std::string_view reason);
  std::size_t subscriberCount() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<Subscription>> subs_;
  bool closed_ = false;
};

enum class SimState { Idle, Running, Finished };
std::string_view toString(SimState s);

/// Hosts simulations and answers control, query and stream requests.
///
/// Each simulation runs on its own thread and steps the single-threaded
/// pipeline; control verbs reach it through a per-simulation command queue.
class ControlService {
 public:
  explicit ControlService(RunConfig config);
  ~ControlService();
  ControlService(const ControlService&) = delete;
  ControlService& operator=(const ControlService&) = delete;

  /// Routes one request; used by the HTTP layer, the stream control channel and tests.
  ServiceResponse handle(std::string_view method, std::string_view path, std::string_view body);

  StreamHub& stream() { return hub_; }
  /// The message every new stream subscriber receives first.
  std::string topologyMessage() const;

  /// Binds and serves on a background thread; port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread until stop().
  void listen(const std::string& host, int port);
  /// Stops simulations, closes streams with kCloseGoingAway and stops the HTTP server.
  void stop();

 private:
  struct Simulation;
  struct Run;

  ServiceResponse createTopology(const nlohmann::json& body);
  ServiceResponse startSimulation(const nlohmann::json& body);
  ServiceResponse stopSimulation(std::uint64_t id);
  ServiceResponse injectEvent(std::uint64_t id, const nlohmann::json& body);
  ServiceResponse getSimulation(std::uint64_t id);
  ServiceResponse listActions(std::optional<std::uint64_t> simId);
  ServiceResponse runQuery(std::string_view q, const nlohmann::json& body);
  ServiceResponse metrics();
  ServiceResponse streamControl(const nlohmann::json& body);

  std::shared_ptr<Simulation> findSimulation(std::uint64_t id);
  std::shared_ptr<Run> newRun(const Simulation& sim, int runIndex) const;
  void runLoop(const std::shared_ptr<Simulation>& sim);
  void publishTick(const Simulation& sim, const Run& run, const TickOutput& out);
  nlohmann::json simulationJson(const Simulation& sim);
  void installRoutes();

  RunConfig config_;
  StreamHub hub_;

  mutable std::mutex mutex_;
  std::map<std::uint64_t, TopologyConfig> topologies_;
  std::uint64_t currentTopology_ = 0;
  std::uint64_t nextTopologyId_ = 1;
  std::string topologyMessage_;
  std::map<std::uint64_t, std::shared_ptr<Simulation>> sims_;
  std::uint64_t nextSimId_ = 1;
  std::vector<nlohmann::json> actions_;
  std::atomic<bool> stopping_{false};

  std::unique_ptr<httplib::Server> server_;
  std::thread serverThread_;
};

}  // namespace wmsn
