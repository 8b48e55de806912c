#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamprof/graph.hpp"

namespace streamprof {

class InstrumentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultPfCapacity = 2;

/// One recorded value in a profiling token.
struct ProfilingValue {
  std::uint64_t raw = 0;
  int bitwidth = 16;
  bool is_placeholder = false;

  static ProfilingValue placeholder(int w);
  friend bool operator==(const ProfilingValue&, const ProfilingValue&) = default;
};

std::uint64_t placeholder_pattern(int w);

struct ProfilingToken {
  std::vector<ProfilingValue> values;
  friend bool operator==(const ProfilingToken&, const ProfilingToken&) = default;
};

struct WrappedValue {
  ProfilingValue value;
  bool overflowed = false;
};

/// Hardware-style truncation of a depth to w bits.
WrappedValue saturate_or_wrap(std::uint64_t depth, int w);

struct ProfileLabel {
  int position = 0;
  std::optional<ChannelId> channel_id;  // absent for placeholders
  NodeId measuring_node = -1;
  bool is_placeholder = false;
  friend bool operator==(const ProfileLabel&, const ProfileLabel&) = default;
};

struct LabelList {
  std::vector<ProfileLabel> labels;
  int pf_bitwidth = 16;

  [[nodiscard]] std::size_t signal_count() const;
  friend bool operator==(const LabelList&, const LabelList&) = default;
};

struct Instrumented {
  DataflowGraph graph;
  LabelList labels;
};

/// Which layer kinds record measurements. Input and Output are interface
/// endpoints and never measure.
using ProfileKinds = std::set<LayerType>;

/// Every layer kind that may carry measurements.
ProfileKinds all_profile_kinds();

/// Adds a profiling stream mirroring the data topology. Throws
/// InstrumentError for multi-sink graphs, invalid graphs, or a kind set that
/// leaves a split/merge kind present in the graph unprofiled.
Instrumented inject_profiling(const DataflowGraph& graph, int pf_bitwidth,
                              const ProfileKinds& kinds);

/// Symbolic content of one position of a profiling token.
struct Slot {
  bool placeholder = false;
  ChannelId channel = -1;
  NodeId node = -1;
  friend bool operator==(const Slot&, const Slot&) = default;
};

/// Symbolic token carried by each profiling channel.
std::map<ChannelId, std::vector<Slot>> evaluate_pf_tokens(const DataflowGraph& graph);

/// Label list of an instrumented graph; pf_bitwidth is copied through.
LabelList compute_labels(const DataflowGraph& instrumented, int pf_bitwidth);

/// Profiling-channel wiring of one node, resolved from the graph.
struct PfPorts {
  // Indexed like the node's data inputs; for sources holds the seed link.
  std::vector<ChannelId> inputs;
  // One slot per data output (one for the data sink, feeding the
  // collector). Each slot has the companion channel and optionally a
  // shortcut that carries the slot's payload instead.
  struct OutSlot {
    ChannelId companion = -1;
    ChannelId shortcut = -1;
  };
  std::vector<OutSlot> outputs;
};

PfPorts pf_ports(const DataflowGraph& g, NodeId node);

/// Collector input order: main stream first, then shortcuts by channel id.
std::vector<ChannelId> collector_inputs(const DataflowGraph& g, NodeId collector);

NodeId find_collector(const DataflowGraph& g);
NodeId find_seed(const DataflowGraph& g);

/// The per-node stream rule: concat the incoming tokens in data-input order,
/// append own measurements, hand the result to the first output slot and a
/// single placeholder to every other slot, then let shortcuts take their
/// slot's payload while the companion restarts from a placeholder.
/// Returns the token per outgoing pf channel.
template <class T>
std::map<ChannelId, std::vector<T>> apply_pf_rule(const PfPorts& ports,
                                                  const std::vector<std::vector<T>>& in,
                                                  const std::vector<T>& own,
                                                  const T& placeholder) {
  std::vector<T> acc;
  for (const auto& t : in) acc.insert(acc.end(), t.begin(), t.end());
  acc.insert(acc.end(), own.begin(), own.end());
  std::map<ChannelId, std::vector<T>> out;
  for (std::size_t k = 0; k < ports.outputs.size(); ++k) {
    std::vector<T> payload = k == 0 ? acc : std::vector<T>{placeholder};
    const auto& slot = ports.outputs[k];
    if (slot.shortcut >= 0) {
      out[slot.shortcut] = std::move(payload);
      out[slot.companion] = {placeholder};
    } else {
      out[slot.companion] = std::move(payload);
    }
  }
  return out;
}

/// Pairs token positions with labels and drops placeholders. Values are
/// returned as carried (wraparound already applied upstream is not undone).
std::map<ChannelId, std::uint64_t> decode_profile_stream(const ProfilingToken& token,
                                                         const LabelList& labels);

/// Reroutes every profiling stream longer than max_token_len straight to the
/// collector and restarts it from a placeholder. nullopt means unbounded.
Instrumented shortcut_optimize(const DataflowGraph& instrumented,
                               const LabelList& labels,
                               std::optional<std::size_t> max_token_len);

/// Number of shortcut channels in an instrumented graph.
std::size_t shortcut_count(const DataflowGraph& g);

nlohmann::json labels_to_json(const LabelList& labels);
LabelList labels_from_json(const nlohmann::json& doc);

}  // namespace streamprof
