// streamprof: generate, instrument and simulate randomly interconnected
// networks and report FIFO fullness.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "streamprof/app.hpp"

namespace fs = std::filesystem;
using namespace streamprof;
using namespace streamprof::app;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> run_id;
  bool force = false;
};

Config load(const Globals& g) {
  Config c;
  if (!g.config.empty()) c = load_config(g.config);
  if (g.seed) c.rinn.seed = *g.seed;
  return c;
}

fs::path out_root(const Globals& g) {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return "runs";
}

// Stage commands write into a plain directory; existing files need --force.
fs::path stage_dir(const Globals& g, std::initializer_list<const char*> files) {
  fs::path dir = out_root(g);
  fs::create_directories(dir);
  if (!g.force)
    for (const char* f : files)
      if (fs::exists(dir / f))
        throw std::runtime_error((dir / f).string() + " exists (use --force)");
  return dir;
}

Instrumented instrumented_from(const Config& c, const std::string& graph_path) {
  if (graph_path.empty()) return prepare(c).inst;
  auto plain = graph_from_json(read_json(graph_path));
  auto inst = inject_profiling(plain, c.profiling.pf_bitwidth, c.profiling.kinds);
  if (c.profiling.max_token_len)
    inst = shortcut_optimize(inst.graph, inst.labels, c.profiling.max_token_len);
  return inst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FIFO fullness profiling for streaming dataflow networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--out", g.out, std::string("output root (default $") + kOutEnv + " or ./runs)");
  app.add_option("--seed", g.seed, "override rinn.seed");
  app.add_option("--workers", g.workers, "concurrent runs for batch/sweep");
  app.add_option("--run-id", g.run_id, "run id instead of <timestamp>-seed<N>");
  app.add_flag("--force", g.force, "overwrite existing outputs");

  auto* gen = app.add_subcommand("gen", "write graph.json for the configured network");
  std::string graph_path, labels_path, run_dir;
  auto* inst = app.add_subcommand("instrument", "write instrumented.json and labels.json");
  inst->add_option("--graph", graph_path, "plain graph.json (default: generate)");
  auto* sim = app.add_subcommand("sim", "simulate an instrumented graph");
  sim->add_option("--graph", graph_path, "instrumented.json")->required();
  sim->add_option("--labels", labels_path, "labels.json")->required();
  auto* rep = app.add_subcommand("report", "summarize a run directory");
  rep->add_option("--run", run_dir, "run directory")->required();
  auto* pipe = app.add_subcommand("pipeline", "generate, instrument, simulate and report");
  auto* batch = app.add_subcommand("batch", "pipeline over sweep.seed_range");
  auto* sweep = app.add_subcommand("sweep", "sweep one generator parameter");

  CLI11_PARSE(app, argc, argv);

  try {
    const Config c = load(g);
    const unsigned workers = g.workers.value_or(c.sweep.workers);
    RunOptions opts{out_root(g), g.run_id, g.force};

    if (gen->parsed()) {
      const auto dir = stage_dir(g, {"graph.json"});
      write_json(dir / "graph.json", graph_to_json(prepare(c).plain));
      std::cout << (dir / "graph.json").string() << '\n';
      return kExitCompleted;
    }
    if (inst->parsed()) {
      const auto dir = stage_dir(g, {"instrumented.json", "labels.json"});
      const auto i = instrumented_from(c, graph_path);
      write_json(dir / "instrumented.json", graph_to_json(i.graph));
      write_json(dir / "labels.json", labels_to_json(i.labels));
      std::cout << i.labels.signal_count() << " signals, " << shortcut_count(i.graph)
                << " shortcuts\n";
      return kExitCompleted;
    }
    if (sim->parsed()) {
      const auto dir = stage_dir(g, {"fifostats.csv", "summary.json"});
      const auto graph = graph_from_json(read_json(graph_path));
      const auto labels = labels_from_json(read_json(labels_path));
      const auto r = run_simulation(graph, labels, c.sim.sim);
      std::ofstream(dir / "fifostats.csv", std::ios::binary) << fifostats_csv(graph, r);
      // No plain graph here; overhead is reported against the data nodes.
      write_json(dir / "summary.json", summary_json(graph, {graph, labels}, r));
      if (c.sim.sim.trace_sampling)
        std::ofstream(dir / "trace.csv", std::ios::binary) << trace_csv(r);
      std::cout << to_string(r.trace.termination.status) << " after " << r.trace.cycles
                << " cycles\n";
      return exit_code(r.trace.termination.status);
    }
    if (rep->parsed()) {
      std::cout << report(run_dir);
      return kExitCompleted;
    }
    if (pipe->parsed()) {
      const auto o = cmd_pipeline(c, opts);
      if (!o.error.empty()) std::cerr << "pipeline: " << o.error << '\n';
      if (o.status)
        std::cout << o.dir.string() << ": " << to_string(*o.status) << " after " << o.cycles
                  << " cycles\n";
      return o.exit;
    }
    if (batch->parsed()) {
      fs::path dir;
      const int rc = cmd_batch(c, opts, workers, &dir);
      std::cout << (dir / "aggregate.csv").string() << '\n';
      return rc;
    }
    if (sweep->parsed()) {
      fs::path dir;
      const int rc = cmd_sweep(c, opts, workers, &dir);
      std::cout << (dir / "sweep.csv").string() << '\n';
      return rc;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
