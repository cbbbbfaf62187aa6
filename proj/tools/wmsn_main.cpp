#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wmsn/config.hpp"
#include "wmsn/service.hpp"

namespace {

using namespace wmsn;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

RunConfig loadConfig(const std::optional<std::string>& path) {
  const auto resolved = resolveConfigPath(path);
  return resolved ? loadRunConfig(*resolved) : RunConfig{};
}

/// "1..5", "3" or "1,2,4".
std::vector<int> parseMonths(const std::string& text) {
  std::vector<int> months;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo < 1 || hi < lo) throw ConfigError("months", "expected lo..hi with 1 <= lo <= hi");
    for (int m = lo; m <= hi; ++m) months.push_back(m);
    return months;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const int m = std::stoi(item);
    if (m < 1) throw ConfigError("months", "months must be >= 1");
    months.push_back(m);
  }
  if (months.empty()) throw ConfigError("months", "no months given");
  return months;
}

int runSimulate(const std::optional<std::string>& configPath, std::optional<std::int64_t> ticks,
                std::optional<std::uint64_t> seed, const std::optional<std::string>& exportDir) {
  auto cfg = loadConfig(configPath);
  if (ticks) cfg.ticks = *ticks;
  if (seed) cfg.setup.seed = *seed;
  if (cfg.ticks < 0) throw ConfigError("ticks", "must be >= 0");

  std::ofstream trace;
  if (exportDir) {
    std::filesystem::create_directories(*exportDir);
    trace.open(std::filesystem::path(*exportDir) / "trace.jsonl", std::ios::binary);
    if (!trace) throw std::runtime_error("cannot write " + *exportDir + "/trace.jsonl");
  }
  const auto data = simulate(cfg.setup, cfg.ticks, exportDir ? &trace : nullptr);
  if (exportDir) {
    const std::filesystem::path dir(*exportDir);
    trace.close();
    if (!trace) throw std::runtime_error("failed writing trace.jsonl");
    data.store->exportSnapshot(dir / "snapshot.wmsn");
    std::ofstream resolved(dir / "config.json", std::ios::binary);
    resolved << toJson(cfg).dump(2) << '\n';
    if (!resolved) throw std::runtime_error("failed writing config.json");
  }
  const auto& s = data.stats;
  std::cout << "ticks " << s.ticks << "\nraw readings " << s.rawReadings << "\nsensor fusions " << s.snFused
            << "\ngateway fusions " << s.gwFused << "\nduplicates dropped " << s.duplicatesDropped
            << "\nforward hops " << s.forwardHops << "\nactions " << s.actions << "\nnodes "
            << data.store->nodeCount() << "\nedges " << data.store->edgeCount() << '\n';
  if (exportDir) std::cout << "exported to " << *exportDir << '\n';
  return 0;
}

int runBench(const std::optional<std::string>& configPath, const std::string& monthsText,
             const std::optional<std::string>& snapshot, const std::optional<std::string>& csvPath) {
  const auto cfg = loadConfig(configPath);
  cfg.benchmark.validate();
  BenchmarkReport report;
  if (snapshot) {
    const auto store = GraphStore::importSnapshot(*snapshot);
    report = runBenchmark(store, cfg.benchmark);
  } else {
    report = runScalingExperiment(cfg.setup, parseMonths(monthsText), cfg.benchmark, &std::cerr);
  }
  report.printTable(std::cout);
  if (csvPath) {
    std::ofstream out(*csvPath, std::ios::binary);
    report.writeCsv(out);
    if (!out) throw std::runtime_error("cannot write " + *csvPath);
    std::cout << "csv written to " << *csvPath << '\n';
  } else {
    std::cout << '\n';
    report.writeCsv(std::cout);
  }
  return 0;
}

int runServe(const std::optional<std::string>& configPath, std::optional<std::string> host,
             std::optional<int> port) {
  auto cfg = loadConfig(configPath);
  if (host) cfg.service.host = *host;
  if (port) cfg.service.port = *port;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const auto bindHost = cfg.service.host;
  const int requested = cfg.service.port;
  ControlService service(std::move(cfg));
  const int bound = service.start(bindHost, requested);
  std::cout << "listening on " << bindHost << ':' << bound << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  std::cout << "shutting down" << std::endl;
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WMSN surveillance simulator, fusion pipeline and query benchmark"};
  app.require_subcommand(1);

  std::optional<std::string> configPath;
  std::optional<std::int64_t> ticks;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> exportDir;
  auto* sim = app.add_subcommand("simulate", "Run the pipeline and optionally export snapshot and trace");
  sim->add_option("--config", configPath, "Run config JSON (default: $WMSN_CONFIG, else built-in)");
  sim->add_option("--ticks", ticks, "Ticks to simulate (overrides simulation.ticks)");
  sim->add_option("--seed", seed, "Seed (overrides seed)");
  sim->add_option("--export", exportDir, "Directory for snapshot.wmsn, trace.jsonl and config.json");

  std::string months = "1..5";
  std::optional<std::string> snapshot;
  std::optional<std::string> csvPath;
  auto* bench = app.add_subcommand("bench", "Time Q1-Q3 on the graph engine and the relational baseline");
  bench->add_option("--config", configPath, "Run config JSON");
  bench->add_option("--months", months, "Durations in months: lo..hi or a comma list")->capture_default_str();
  bench->add_option("--snapshot", snapshot, "Benchmark an exported snapshot instead of simulating");
  bench->add_option("--csv", csvPath, "Write the CSV report here (default: stdout)");

  std::optional<std::string> host;
  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "Run the control service until SIGINT/SIGTERM");
  serve->add_option("--config", configPath, "Run config JSON");
  serve->add_option("--host", host, "Bind address (overrides service.host)");
  serve->add_option("--port", port, "Port, 0 picks a free one (overrides service.port)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return runSimulate(configPath, ticks, seed, exportDir);
    if (*bench) return runBench(configPath, months, snapshot, csvPath);
    if (*serve) return runServe(configPath, host, port);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BenchmarkError& e) {
    if (e.code() == BenchmarkError::Code::InvalidConfig) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    std::cerr << "benchmark failed: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
