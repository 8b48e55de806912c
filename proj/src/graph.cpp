#include "streamprof/graph.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

namespace streamprof {

namespace {

constexpr std::array<std::pair<LayerType, std::string_view>, 13> kTypeNames{{
    {LayerType::Input, "Input"},
    {LayerType::Output, "Output"},
    {LayerType::Dense, "Dense"},
    {LayerType::Conv2D, "Conv2D"},
    {LayerType::Add, "Add"},
    {LayerType::Concatenate, "Concatenate"},
    {LayerType::ReLU, "ReLU"},
    {LayerType::Sigmoid, "Sigmoid"},
    {LayerType::Clone, "Clone"},
    {LayerType::Reshape, "Reshape"},
    {LayerType::Flatten, "Flatten"},
    {LayerType::ProfileSeed, "ProfileSeed"},
    {LayerType::ProfileCollector, "ProfileCollector"},
}};

std::string join_ids(const std::vector<int>& ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
  return os.str();
}

bool is_profile_endpoint(LayerType t) {
  return t == LayerType::ProfileSeed || t == LayerType::ProfileCollector;
}

}  // namespace

std::string_view to_string(LayerType type) {
  for (const auto& [t, name] : kTypeNames)
    if (t == type) return name;
  return "?";
}

LayerType layer_type_from_string(std::string_view name) {
  for (const auto& [t, n] : kTypeNames)
    if (n == name) return t;
  throw GraphError("unknown layer type '" + std::string(name) + "'");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DanglingEndpoint: return "dangling endpoint";
    case ViolationKind::EndpointAsymmetry: return "endpoint asymmetry";
    case ViolationKind::Cycle: return "cycle detected";
    case ViolationKind::ArityMismatch: return "arity mismatch";
    case ViolationKind::DuplicateId: return "duplicate id";
    case ViolationKind::BadParameter: return "bad parameter";
    case ViolationKind::SelfLoop: return "self loop";
  }
  return "?";
}

int default_capacity(LayerType consumer) {
  switch (consumer) {
    case LayerType::Add: return 16;
    case LayerType::Conv2D: return 36;
    case LayerType::Clone: return 16;
    case LayerType::ReLU: return 16;
    case LayerType::Dense: return 1;
    default: return 16;
  }
}

NodeId DataflowGraph::add_node(LayerParams params, int layer_index) {
  LayerNode n;
  n.id = next_node_id();
  n.params = std::move(params);
  n.layer_index = layer_index;
  nodes.emplace(n.id, n);
  return n.id;
}

NodeId DataflowGraph::add_node(LayerKind kind, int layer_index) {
  LayerParams p;
  p.layer_kind = kind;
  return add_node(p, layer_index);
}

ChannelId DataflowGraph::connect(NodeId producer, NodeId consumer, Shape shape,
                                 int capacity) {
  auto& from = node(producer);
  auto& to = node(consumer);
  Channel c;
  c.id = next_channel_id();
  c.producer = producer;
  c.consumer = consumer;
  c.capacity = capacity > 0 ? capacity : default_capacity(to.type());
  c.element_shape = shape;
  channels.emplace(c.id, c);
  from.output_channel_ids.push_back(c.id);
  to.input_channel_ids.push_back(c.id);
  return c.id;
}

const LayerNode& DataflowGraph::node(NodeId id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw GraphError("no node " + std::to_string(id));
  return it->second;
}

LayerNode& DataflowGraph::node(NodeId id) {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw GraphError("no node " + std::to_string(id));
  return it->second;
}

const Channel& DataflowGraph::channel(ChannelId id) const {
  auto it = channels.find(id);
  if (it == channels.end()) throw GraphError("no channel " + std::to_string(id));
  return it->second;
}

Channel& DataflowGraph::channel(ChannelId id) {
  auto it = channels.find(id);
  if (it == channels.end()) throw GraphError("no channel " + std::to_string(id));
  return it->second;
}

std::vector<ChannelId> DataflowGraph::data_inputs(NodeId id) const {
  std::vector<ChannelId> out;
  for (ChannelId c : node(id).input_channel_ids) {
    auto it = channels.find(c);
    if (it != channels.end() && !it->second.is_profiling) out.push_back(c);
  }
  return out;
}

std::vector<ChannelId> DataflowGraph::data_outputs(NodeId id) const {
  std::vector<ChannelId> out;
  for (ChannelId c : node(id).output_channel_ids) {
    auto it = channels.find(c);
    if (it != channels.end() && !it->second.is_profiling) out.push_back(c);
  }
  return out;
}

std::vector<NodeId> DataflowGraph::source_ids() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes)
    if (n.input_channel_ids.empty()) out.push_back(id);
  return out;
}

std::vector<NodeId> DataflowGraph::sink_ids() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes)
    if (n.output_channel_ids.empty()) out.push_back(id);
  return out;
}

std::vector<NodeId> DataflowGraph::data_sink_ids() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes)
    if (n.type() == LayerType::Output) out.push_back(id);
  return out;
}

bool DataflowGraph::is_instrumented() const {
  return std::any_of(channels.begin(), channels.end(),
                     [](const auto& kv) { return kv.second.is_profiling; });
}

NodeId DataflowGraph::next_node_id() const {
  return nodes.empty() ? 0 : nodes.rbegin()->first + 1;
}

ChannelId DataflowGraph::next_channel_id() const {
  return channels.empty() ? 0 : channels.rbegin()->first + 1;
}

Shape infer_output_shape(const LayerKind& kind, const std::vector<Shape>& in) {
  auto need = [&](std::size_t n) {
    if (in.size() != n)
      throw GraphError(std::string(to_string(kind.type)) + " expects " +
                       std::to_string(n) + " input(s)");
  };
  switch (kind.type) {
    case LayerType::Input:
    case LayerType::ProfileSeed:
      throw GraphError("source layers have no input shape");
    case LayerType::Output:
    case LayerType::ReLU:
    case LayerType::Sigmoid:
    case LayerType::Clone:
    case LayerType::ProfileCollector:
      need(1);
      return in[0];
    case LayerType::Dense:
      need(1);
      return {1, 1, kind.out_units};
    case LayerType::Conv2D:
      need(1);
      if (in[0].h < kind.kernel || in[0].w < kind.kernel)
        throw GraphError("Conv2D kernel larger than its input map");
      return {in[0].h, in[0].w, kind.filters};
    case LayerType::Add:
      if (in.size() < 2) throw GraphError("Add needs at least two inputs");
      for (const auto& s : in)
        if (!(s == in[0])) throw GraphError("Add inputs differ in shape");
      return in[0];
    case LayerType::Concatenate: {
      if (in.size() < 2) throw GraphError("Concatenate needs at least two inputs");
      Shape s = in[0];
      s.c = 0;
      for (const auto& x : in) {
        if (x.h != s.h || x.w != s.w)
          throw GraphError("Concatenate inputs differ in spatial shape");
        s.c += x.c;
      }
      return s;
    }
    case LayerType::Reshape:
      need(1);
      if (in[0].elements() != kind.target.elements())
        throw GraphError("Reshape changes the element count");
      return kind.target;
    case LayerType::Flatten:
      need(1);
      return {1, 1, static_cast<int>(in[0].elements())};
  }
  throw GraphError("unhandled layer type");
}

ValidationReport validate(const DataflowGraph& g) {
  ValidationReport report;
  auto add = [&](ViolationKind k, std::string msg, std::vector<int> ids) {
    report.push_back({k, std::move(msg), std::move(ids)});
  };

  for (const auto& [id, c] : g.channels) {
    bool prod = g.nodes.count(c.producer) != 0;
    bool cons = g.nodes.count(c.consumer) != 0;
    if (!prod || !cons) {
      add(ViolationKind::DanglingEndpoint,
          "channel " + std::to_string(id) + " references missing " +
              (!prod ? "producer " + std::to_string(c.producer)
                     : "consumer " + std::to_string(c.consumer)),
          {id});
    }
    if (c.producer == c.consumer)
      add(ViolationKind::SelfLoop, "channel " + std::to_string(id) + " is a self loop",
          {id});
    if (c.capacity < 1)
      add(ViolationKind::BadParameter,
          "channel " + std::to_string(id) + " has capacity < 1", {id});
    if (prod) {
      const auto& outs = g.nodes.at(c.producer).output_channel_ids;
      if (std::find(outs.begin(), outs.end(), id) == outs.end())
        add(ViolationKind::EndpointAsymmetry,
            "channel " + std::to_string(id) + " missing from producer outputs", {id});
    }
    if (cons) {
      const auto& ins = g.nodes.at(c.consumer).input_channel_ids;
      if (std::find(ins.begin(), ins.end(), id) == ins.end())
        add(ViolationKind::EndpointAsymmetry,
            "channel " + std::to_string(id) + " missing from consumer inputs", {id});
    }
  }

  for (const auto& [id, n] : g.nodes) {
    auto check_list = [&](const std::vector<ChannelId>& list, bool inputs) {
      std::set<ChannelId> seen;
      for (ChannelId c : list) {
        if (!seen.insert(c).second)
          add(ViolationKind::DuplicateId,
              "node " + std::to_string(id) + " lists channel " + std::to_string(c) +
                  " twice",
              {id, c});
        auto it = g.channels.find(c);
        if (it == g.channels.end()) {
          add(ViolationKind::DanglingEndpoint,
              "node " + std::to_string(id) + " references missing channel " +
                  std::to_string(c),
              {id, c});
        } else if ((inputs ? it->second.consumer : it->second.producer) != id) {
          add(ViolationKind::EndpointAsymmetry,
              "node " + std::to_string(id) + " lists channel " + std::to_string(c) +
                  " it does not terminate",
              {id, c});
        }
      }
    };
    check_list(n.input_channel_ids, true);
    check_list(n.output_channel_ids, false);

    const auto& p = n.params;
    const auto& k = p.layer_kind;
    if (p.reuse_factor < 1)
      add(ViolationKind::BadParameter, "node " + std::to_string(id) + " reuse_factor < 1",
          {id});
    if (p.data_bitwidth.integer < 1 || p.data_bitwidth.total < p.data_bitwidth.integer)
      add(ViolationKind::BadParameter,
          "node " + std::to_string(id) + " bitwidth violates W >= I >= 1", {id});
    if (k.type == LayerType::Conv2D && (k.kernel < 1 || k.filters < 1))
      add(ViolationKind::BadParameter,
          "node " + std::to_string(id) + " Conv2D kernel/filters < 1", {id});
    if (k.type == LayerType::Dense && k.out_units < 1)
      add(ViolationKind::BadParameter, "node " + std::to_string(id) + " Dense units < 1",
          {id});

    if (is_profile_endpoint(k.type)) continue;
    // Arity is counted over data ports only.
    std::size_t din = 0, dout = 0;
    for (ChannelId c : n.input_channel_ids) {
      auto it = g.channels.find(c);
      if (it != g.channels.end() && !it->second.is_profiling) ++din;
    }
    for (ChannelId c : n.output_channel_ids) {
      auto it = g.channels.find(c);
      if (it != g.channels.end() && !it->second.is_profiling) ++dout;
    }
    std::size_t want_in = 1, want_out = 1;
    switch (k.type) {
      case LayerType::Input: want_in = 0; break;
      case LayerType::Output: want_out = 0; break;
      case LayerType::Add:
      case LayerType::Concatenate:
        if (k.arity < 2)
          add(ViolationKind::BadParameter,
              "node " + std::to_string(id) + " merge arity < 2", {id});
        want_in = static_cast<std::size_t>(std::max(k.arity, 0));
        break;
      case LayerType::Clone:
        if (k.fanout < 2)
          add(ViolationKind::BadParameter,
              "node " + std::to_string(id) + " clone fanout < 2", {id});
        want_out = static_cast<std::size_t>(std::max(k.fanout, 0));
        break;
      default: break;
    }
    if (din != want_in || dout != want_out) {
      add(ViolationKind::ArityMismatch,
          "node " + std::to_string(id) + " (" + std::string(to_string(k.type)) +
              ") has " + std::to_string(din) + " in/" + std::to_string(dout) +
              " out, expected " + std::to_string(want_in) + "/" +
              std::to_string(want_out),
          {id});
    }
  }

  // Tarjan SCC over well-formed channels; each non-trivial component is one
  // cycle violation.
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& [id, c] : g.channels)
    if (g.nodes.count(c.producer) && g.nodes.count(c.consumer) && c.producer != c.consumer)
      succ[c.producer].push_back(c.consumer);
  std::map<NodeId, int> index, low;
  std::set<NodeId> on_stack;
  std::vector<NodeId> stack;
  int counter = 0;
  std::function<void(NodeId)> strong = [&](NodeId v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (NodeId w : succ[v]) {
      if (!index.count(w)) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      NodeId w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      if (comp.size() > 1) {
        std::sort(comp.begin(), comp.end());
        add(ViolationKind::Cycle, "cycle through nodes {" + join_ids(comp) + "}", comp);
      }
    }
  };
  for (const auto& [id, n] : g.nodes)
    if (!index.count(id)) strong(id);

  return report;
}

std::vector<NodeId> topo_order(const DataflowGraph& g) {
  std::map<NodeId, int> indegree;
  for (const auto& [id, n] : g.nodes) indegree[id] = 0;
  for (const auto& [id, c] : g.channels) {
    if (!g.nodes.count(c.producer) || !g.nodes.count(c.consumer))
      throw GraphError("channel " + std::to_string(id) + " has a dangling endpoint");
    ++indegree[c.consumer];
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.push(id);
  std::vector<NodeId> order;
  order.reserve(g.nodes.size());
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (ChannelId c : g.node(v).output_channel_ids) {
      NodeId w = g.channel(c).consumer;
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (order.size() != g.nodes.size()) throw GraphError("graph contains a cycle");
  return order;
}

// ---- JSON ------------------------------------------------------------------

void to_json(nlohmann::json& j, const Shape& s) { j = nlohmann::json::array({s.h, s.w, s.c}); }

void from_json(const nlohmann::json& j, Shape& s) {
  if (!j.is_array() || j.size() != 3) throw GraphError("shape must be [H, W, C]");
  s = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

void to_json(nlohmann::json& j, const Bitwidth& b) {
  j = nlohmann::json::array({b.total, b.integer});
}

void from_json(const nlohmann::json& j, Bitwidth& b) {
  if (!j.is_array() || j.size() != 2) throw GraphError("bitwidth must be [W, I]");
  b = {j[0].get<int>(), j[1].get<int>()};
}

void to_json(nlohmann::json& j, const LayerKind& k) {
  j = nlohmann::json{{"type", to_string(k.type)}};
  switch (k.type) {
    case LayerType::Dense: j["out_units"] = k.out_units; break;
    case LayerType::Conv2D:
      j["kernel"] = k.kernel;
      j["filters"] = k.filters;
      break;
    case LayerType::Add:
    case LayerType::Concatenate: j["arity"] = k.arity; break;
    case LayerType::Clone: j["fanout"] = k.fanout; break;
    case LayerType::Reshape: j["target"] = k.target; break;
    default: break;
  }
}

void from_json(const nlohmann::json& j, LayerKind& k) {
  k = LayerKind{};
  k.type = layer_type_from_string(j.at("type").get<std::string>());
  switch (k.type) {
    case LayerType::Dense: k.out_units = j.at("out_units").get<int>(); break;
    case LayerType::Conv2D:
      k.kernel = j.at("kernel").get<int>();
      k.filters = j.at("filters").get<int>();
      break;
    case LayerType::Add:
    case LayerType::Concatenate: k.arity = j.at("arity").get<int>(); break;
    case LayerType::Clone: k.fanout = j.at("fanout").get<int>(); break;
    case LayerType::Reshape: k.target = j.at("target").get<Shape>(); break;
    default: break;
  }
}

nlohmann::json graph_to_json(const DataflowGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [id, n] : g.nodes) {
    nodes.push_back({
        {"id", n.id},
        {"params",
         {{"reuse_factor", n.params.reuse_factor},
          {"data_bitwidth", n.params.data_bitwidth},
          {"layer_kind", n.params.layer_kind}}},
        {"input_channel_ids", n.input_channel_ids},
        {"output_channel_ids", n.output_channel_ids},
        {"profiled", n.profiled},
        {"layer_index", n.layer_index},
    });
  }
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& [id, c] : g.channels) {
    channels.push_back({
        {"id", c.id},
        {"producer", c.producer},
        {"consumer", c.consumer},
        {"capacity", c.capacity},
        {"element_shape", c.element_shape},
        {"is_profiling", c.is_profiling},
        {"pf_companion", c.pf_companion},
        {"pf_shortcut_for", c.pf_shortcut_for},
    });
  }
  return {{"nodes", nodes}, {"channels", channels}};
}

DataflowGraph graph_from_json(const nlohmann::json& doc) {
  DataflowGraph g;
  try {
    for (const auto& jn : doc.at("nodes")) {
      LayerNode n;
      n.id = jn.at("id").get<int>();
      const auto& p = jn.at("params");
      n.params.reuse_factor = p.at("reuse_factor").get<int>();
      n.params.data_bitwidth = p.at("data_bitwidth").get<Bitwidth>();
      n.params.layer_kind = p.at("layer_kind").get<LayerKind>();
      n.input_channel_ids = jn.at("input_channel_ids").get<std::vector<int>>();
      n.output_channel_ids = jn.at("output_channel_ids").get<std::vector<int>>();
      n.profiled = jn.value("profiled", false);
      n.layer_index = jn.value("layer_index", -1);
      if (!g.nodes.emplace(n.id, n).second)
        throw GraphError("duplicate node id " + std::to_string(n.id));
    }
    for (const auto& jc : doc.at("channels")) {
      Channel c;
      c.id = jc.at("id").get<int>();
      c.producer = jc.at("producer").get<int>();
      c.consumer = jc.at("consumer").get<int>();
      c.capacity = jc.at("capacity").get<int>();
      c.element_shape = jc.at("element_shape").get<Shape>();
      c.is_profiling = jc.value("is_profiling", false);
      c.pf_companion = jc.value("pf_companion", -1);
      c.pf_shortcut_for = jc.value("pf_shortcut_for", -1);
      if (!g.channels.emplace(c.id, c).second)
        throw GraphError("duplicate channel id " + std::to_string(c.id));
    }
  } catch (const nlohmann::json::exception& e) {
    throw GraphError(std::string("malformed graph document: ") + e.what());
  }
  return g;
}

}  // namespace streamprof
