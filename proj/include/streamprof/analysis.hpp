#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "streamprof/graph.hpp"
#include "streamprof/instrument.hpp"
#include "streamprof/rinn.hpp"
#include "streamprof/sim.hpp"

namespace streamprof {

class AnalysisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DiffStats {
  std::map<ChannelId, std::int64_t> per_channel_diff;  // oracle - profiled
  double avg_abs_diff = 0.0;
  std::int64_t max_abs_diff = 0;
  std::size_t num_channels = 0;
};

/// Throws AnalysisError when the key sets differ.
DiffStats compare(const std::map<ChannelId, std::uint64_t>& oracle,
                  const std::map<ChannelId, std::uint64_t>& profiled);

// ---- capacities -------------------------------------------------------------

enum class CapacityMode {
  Default,  // the per-kind defaults stored in the graph
  Deep,     // every channel can hold all tokens it will ever carry
};

std::string_view to_string(CapacityMode m);
CapacityMode capacity_mode_from_string(std::string_view s);

/// Copy of `graph` with data-channel capacities set per mode. Deep sizes a
/// channel to tokens-per-inference * inference_count.
DataflowGraph with_capacity_mode(const DataflowGraph& graph, CapacityMode mode,
                                 int inference_count);

// ---- sweeps -----------------------------------------------------------------

struct Summary {
  std::int64_t min = 0;
  double median = 0.0;
  std::int64_t max = 0;
  std::size_t count = 0;
  friend bool operator==(const Summary&, const Summary&) = default;
};

Summary summarize(std::vector<std::int64_t> values);

struct SweepPoint {
  nlohmann::json value;
  TerminationStatus status = TerminationStatus::Completed;
  std::uint64_t cycles = 0;
  std::map<std::string, Summary> groups;  // consumer kind -> profiled_max
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;  // one per value, in input order
  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct SweepOptions {
  int pf_bitwidth = 16;
  ProfileKinds kinds = all_profile_kinds();
  CapacityMode capacity_mode = CapacityMode::Deep;
  unsigned workers = 1;
};

inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{
      "kernel", "filters", "reuse_factor", "data_bitwidth",
      "density", "pattern", "num_hidden_layers"};
  return names;
}

/// Returns `base` with one field replaced. Throws invalid_argument for an
/// unknown parameter or a value of the wrong type.
RinnSpec with_parameter(const RinnSpec& base, const std::string& parameter,
                        const nlohmann::json& value);

/// Groups the decoded profiled value of each measured channel by consumer
/// kind. Unmeasured channels are skipped.
std::map<std::string, Summary> group_profiled(const DataflowGraph& graph,
                                              const SimResult& result);

/// Throws AnalysisError naming the value if generation or simulation fails.
SweepResult run_sweep(const RinnSpec& base, const std::string& parameter,
                      const std::vector<nlohmann::json>& values, const SimConfig& config,
                      const SweepOptions& options = {});

// ---- depth recommendations ---------------------------------------------------

struct Exact {};
struct Headroom {
  double multiplier = 1.5;
};
struct PatternAware {
  double multiplier = 1.5;
};
using DepthPolicy = std::variant<Exact, Headroom, PatternAware>;

struct DepthRecommendation {
  std::map<ChannelId, std::int64_t> depth;
  std::string policy;
  double headroom = 1.0;
};

/// Layer-index distance of a data channel: producer to consumer layer
/// index, or nullopt when either end has none.
std::optional<int> layer_span(const DataflowGraph& graph, ChannelId c);

/// Throws AnalysisError unless `result` completed.
DepthRecommendation recommend_depths(const DataflowGraph& graph, const SimResult& result,
                                     const DepthPolicy& policy);

// ---- overhead ---------------------------------------------------------------

struct OverheadReport {
  std::size_t pf_channels = 0;
  std::uint64_t total_pf_bits = 0;  // sum over pf channels of length * w
  std::map<NodeId, std::size_t> appended_values;  // per profiled node
  std::size_t measured_signals = 0;
  std::uint64_t collector_token_bits = 0;
};

/// Throws AnalysisError when the data node sets differ.
OverheadReport overhead_accounting(const DataflowGraph& plain,
                                   const DataflowGraph& instrumented, int pf_bitwidth);

// ---- the 79-signal table ------------------------------------------------------

struct TableRow {
  std::string layer;
  std::int64_t hls4ml_default = 0;
  std::vector<std::int64_t> cosim;     // one entry per sub-column
  std::vector<std::int64_t> profiled;  // same length as cosim
  std::vector<std::int64_t> signals;   // same length as cosim
};

const std::vector<TableRow>& table1_rows();

struct TableChannels {
  std::map<ChannelId, std::uint64_t> cosim;
  std::map<ChannelId, std::uint64_t> profiled;
  std::map<ChannelId, std::string> layer;
};

/// Expands rows into one synthetic channel per signal, numbered in row order.
TableChannels expand_table(const std::vector<TableRow>& rows);

}  // namespace streamprof
