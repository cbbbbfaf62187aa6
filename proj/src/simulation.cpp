#include "wmsn/simulation.hpp"

#include <ostream>

namespace wmsn {

Dataset simulate(const SimulationSetup& setup, Tick ticks, std::ostream* trace) {
  setup.fusion.validate();
  Dataset data;
  data.topology = buildTopology(setup.topology, *data.store);

  Scenario scenario(data.topology, setup.datagen, setup.seed);
  for (const auto& e : setup.events) scenario.scheduleEvent(e.kind, e.tick);

  PipelineOptions options;
  options.fusion = setup.fusion;
  options.queues = setup.queues;
  options.mode = setup.mode;
  if (trace != nullptr) {
    options.onTick = [&](const TickOutput& out) {
      for (const auto& r : out.raw) writeTraceLine(*trace, data.topology, r);
    };
  }
  data.stats = runPipeline(data.topology, scenario, *data.store, options, ticks);
  return data;
}

}  // namespace wmsn
