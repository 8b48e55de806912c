#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "streamprof/graph.hpp"
#include "streamprof/instrument.hpp"

namespace streamprof {

class SimError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Simulator timing of one layer actor.
///
/// A firing is one token for streaming layers (Conv2D, merges, activations,
/// Clone) and one whole inference for gathering layers (Dense, Reshape,
/// Flatten). Dense is modelled at element granularity: it consumes its
/// input elements at one per cycle, then completes one output element every
/// reuse_factor cycles.
struct ActorTiming {
  std::vector<std::int64_t> tokens_consumed_per_firing;
  std::vector<std::int64_t> tokens_produced_per_firing;
  std::int64_t first_output_latency = 1;
  std::int64_t output_initiation_interval = 1;
  std::int64_t consume_cycles = 1;
  std::int64_t elements_produced = 1;
};

/// Throws SimError on shape/kind mismatch (e.g. a kernel wider than the map).
ActorTiming actor_timing(const LayerParams& params, const Shape& input_shape);

struct SimConfig {
  std::uint64_t max_cycles = 1'000'000;
  bool interference_enabled = false;
  int pf_channel_capacity = kDefaultPfCapacity;
  int inference_count = 1;
  // Reserved for stochastic jitter; the timing model is deterministic and
  // does not consume it.
  std::optional<std::uint64_t> seed;
  bool trace_sampling = false;
};

enum class TerminationStatus { Completed, Deadlock, BudgetExhausted };
std::string_view to_string(TerminationStatus s);

struct Termination {
  TerminationStatus status = TerminationStatus::Completed;
  std::uint64_t cycle = 0;
};

struct BlockedActor {
  NodeId node = -1;
  bool on_full = false;  // otherwise blocked on an empty/insufficient input
  ChannelId channel = -1;
  friend bool operator==(const BlockedActor&, const BlockedActor&) = default;
};

struct DeadlockReport {
  // Actors stalled on one port while another port of the same direction is
  // ready: the splits and merges whose imbalance closes the wait cycle.
  std::vector<BlockedActor> core;
  // Every actor with outstanding work, including ones merely starved or
  // back-pressured by the core.
  std::vector<BlockedActor> blocked;

  [[nodiscard]] std::set<NodeId> core_nodes() const;
};

struct OccupancySample {
  ChannelId channel = -1;
  std::uint64_t cycle = 0;
  std::int64_t occupancy = 0;
};

struct FifoStats {
  ChannelId channel_id = -1;
  std::uint64_t pushes = 0;
  std::uint64_t pops = 0;
  std::int64_t oracle_max = 0;
  // Largest occupancy sampled right before a pop.
  std::int64_t profiled_max = 0;
  std::int64_t final_occupancy = 0;
  // Whether the consumer records this channel into the profiling stream,
  // and the value recovered from it (max over inferences).
  bool measured = false;
  std::optional<std::uint64_t> decoded;
  bool overflowed = false;
};

struct SimTrace {
  std::vector<OccupancySample> samples;
  Termination termination;
  std::uint64_t cycles = 0;
  std::vector<ProfilingToken> tokens;  // collector token per inference
  std::vector<std::map<ChannelId, std::uint64_t>> decoded;  // per inference
  std::optional<DeadlockReport> deadlock;
  std::set<ChannelId> overflowed;
};

struct SimResult {
  SimTrace trace;
  std::map<ChannelId, FifoStats> stats;  // data channels only

  /// Channel -> max decoded value over all inferences.
  [[nodiscard]] std::map<ChannelId, std::uint64_t> decoded_max() const;
  [[nodiscard]] std::map<ChannelId, std::uint64_t> oracle() const;
};

/// Cycle-stepped engine. Each cycle commits all pops (consumers see the
/// occupancy of the previous cycle boundary), then all pushes against the
/// post-pop occupancy; tokens pushed in a cycle become visible next cycle.
class Engine {
public:
  Engine(const DataflowGraph& graph, const LabelList& labels, const SimConfig& config);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Advances one cycle. Returns false once terminated.
  bool step();
  void run();

  [[nodiscard]] bool terminated() const;
  [[nodiscard]] bool complete() const;
  [[nodiscard]] std::uint64_t cycle() const;
  [[nodiscard]] std::int64_t occupancy(ChannelId c) const;

  /// None if the run is complete or the last cycle made (or is waiting on
  /// timed) progress; otherwise the blocked actors.
  [[nodiscard]] std::optional<DeadlockReport> detect_deadlock() const;

  [[nodiscard]] SimResult result() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs to termination. Throws SimError if labels do not belong to graph or
/// the config is invalid.
SimResult run_simulation(const DataflowGraph& graph, const LabelList& labels,
                         const SimConfig& config);

}  // namespace streamprof
