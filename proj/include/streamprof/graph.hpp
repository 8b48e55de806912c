#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace streamprof {

/// Raised for malformed graphs, bad construction requests and unreadable
/// graph documents.
class GraphError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using NodeId = int;
using ChannelId = int;

enum class LayerType {
  Input,
  Output,
  Dense,
  Conv2D,
  Add,
  Concatenate,
  ReLU,
  Sigmoid,
  Clone,
  Reshape,
  Flatten,
  // Endpoints of the profiling network; only present after instrumentation.
  ProfileSeed,
  ProfileCollector,
};

std::string_view to_string(LayerType type);
LayerType layer_type_from_string(std::string_view name);

/// Token payload shape. A channel streams H*W tokens per inference, each
/// token packing C elements.
struct Shape {
  int h = 1;
  int w = 1;
  int c = 1;

  [[nodiscard]] std::int64_t tokens() const { return std::int64_t{h} * w; }
  [[nodiscard]] std::int64_t elements() const { return tokens() * c; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct LayerKind {
  LayerType type = LayerType::ReLU;
  int out_units = 0;  // Dense
  int kernel = 0;     // Conv2D
  int filters = 0;    // Conv2D
  int arity = 0;      // Add, Concatenate
  int fanout = 0;     // Clone
  Shape target;       // Reshape

  static LayerKind input() { return {LayerType::Input}; }
  static LayerKind output() { return {LayerType::Output}; }
  static LayerKind dense(int units) { return {LayerType::Dense, units}; }
  static LayerKind conv2d(int kernel, int filters) {
    return {LayerType::Conv2D, 0, kernel, filters};
  }
  static LayerKind add(int arity) { return {LayerType::Add, 0, 0, 0, arity}; }
  static LayerKind concatenate(int arity) {
    return {LayerType::Concatenate, 0, 0, 0, arity};
  }
  static LayerKind relu() { return {LayerType::ReLU}; }
  static LayerKind sigmoid() { return {LayerType::Sigmoid}; }
  static LayerKind clone(int fanout) {
    return {LayerType::Clone, 0, 0, 0, 0, fanout};
  }
  static LayerKind reshape(Shape target) {
    return {LayerType::Reshape, 0, 0, 0, 0, 0, target};
  }
  static LayerKind flatten() { return {LayerType::Flatten}; }

  friend bool operator==(const LayerKind&, const LayerKind&) = default;
};

/// ap_fixed<W, I> style data precision.
struct Bitwidth {
  int total = 16;
  int integer = 6;
  friend bool operator==(const Bitwidth&, const Bitwidth&) = default;
};

struct LayerParams {
  int reuse_factor = 1;
  Bitwidth data_bitwidth;
  LayerKind layer_kind;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct LayerNode {
  NodeId id = 0;
  LayerParams params;
  std::vector<ChannelId> input_channel_ids;
  std::vector<ChannelId> output_channel_ids;
  bool profiled = false;
  // Position in the randomly wired hidden stack, -1 outside of it. Used for
  // connection-span reasoning.
  int layer_index = -1;

  [[nodiscard]] LayerType type() const { return params.layer_kind.type; }
  friend bool operator==(const LayerNode&, const LayerNode&) = default;
};

struct Channel {
  ChannelId id = 0;
  NodeId producer = 0;
  NodeId consumer = 0;
  int capacity = 1;
  Shape element_shape;
  bool is_profiling = false;
  // For profiling channels: the data channel this one runs alongside, or -1
  // for the seed and collector links.
  ChannelId pf_companion = -1;
  // For profiling shortcut channels: the data channel whose accumulated
  // stream was forwarded straight to the collector.
  ChannelId pf_shortcut_for = -1;

  friend bool operator==(const Channel&, const Channel&) = default;
};

/// Default FIFO depth of a data channel, keyed by the consuming layer.
int default_capacity(LayerType consumer);

struct DataflowGraph {
  std::map<NodeId, LayerNode> nodes;
  std::map<ChannelId, Channel> channels;

  NodeId add_node(LayerParams params, int layer_index = -1);
  NodeId add_node(LayerKind kind, int layer_index = -1);
  /// Appends a channel to the producer's outputs and the consumer's inputs.
  /// A capacity of 0 selects default_capacity() of the consumer.
  ChannelId connect(NodeId producer, NodeId consumer, Shape shape,
                    int capacity = 0);

  [[nodiscard]] const LayerNode& node(NodeId id) const;
  [[nodiscard]] LayerNode& node(NodeId id);
  [[nodiscard]] const Channel& channel(ChannelId id) const;
  [[nodiscard]] Channel& channel(ChannelId id);

  /// Data-only port lists, in port order.
  [[nodiscard]] std::vector<ChannelId> data_inputs(NodeId id) const;
  [[nodiscard]] std::vector<ChannelId> data_outputs(NodeId id) const;

  /// Nodes without any incoming or outgoing channel respectively.
  [[nodiscard]] std::vector<NodeId> source_ids() const;
  [[nodiscard]] std::vector<NodeId> sink_ids() const;
  /// Output-kind nodes.
  [[nodiscard]] std::vector<NodeId> data_sink_ids() const;
  [[nodiscard]] bool is_instrumented() const;

  [[nodiscard]] NodeId next_node_id() const;
  [[nodiscard]] ChannelId next_channel_id() const;

  friend bool operator==(const DataflowGraph&, const DataflowGraph&) = default;
};

/// Output shape of a layer given its data input shapes.
Shape infer_output_shape(const LayerKind& kind, const std::vector<Shape>& inputs);

enum class ViolationKind {
  DanglingEndpoint,
  EndpointAsymmetry,
  Cycle,
  ArityMismatch,
  DuplicateId,
  BadParameter,
  SelfLoop,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string message;
  std::vector<int> ids;  // offending nodes or channels
};

using ValidationReport = std::vector<Violation>;

/// Every structural invariant violation; an empty report means well-formed.
ValidationReport validate(const DataflowGraph& graph);

/// Producers before consumers; ties broken by ascending node id.
/// Throws GraphError on cyclic graphs.
std::vector<NodeId> topo_order(const DataflowGraph& graph);

void to_json(nlohmann::json& j, const Shape& s);
void from_json(const nlohmann::json& j, Shape& s);
void to_json(nlohmann::json& j, const LayerKind& k);
void from_json(const nlohmann::json& j, LayerKind& k);
void to_json(nlohmann::json& j, const Bitwidth& b);
void from_json(const nlohmann::json& j, Bitwidth& b);

nlohmann::json graph_to_json(const DataflowGraph& graph);
/// Throws GraphError on missing fields or duplicate ids.
DataflowGraph graph_from_json(const nlohmann::json& doc);

}  // namespace streamprof
