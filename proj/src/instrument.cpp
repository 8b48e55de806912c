#include "streamprof/instrument.hpp"

#include <algorithm>
#include <string>

namespace streamprof {

std::uint64_t placeholder_pattern(int w) {
  return w >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << w) - 1;
}

ProfilingValue ProfilingValue::placeholder(int w) {
  return {placeholder_pattern(w), w, true};
}

WrappedValue saturate_or_wrap(std::uint64_t depth, int w) {
  if (w < 1) throw std::invalid_argument("profiling bitwidth must be >= 1");
  if (w >= 64) return {{depth, w, false}, false};
  const std::uint64_t modulus = std::uint64_t{1} << w;
  return {{depth & (modulus - 1), w, false}, depth >= modulus};
}

std::size_t LabelList::signal_count() const {
  return static_cast<std::size_t>(std::count_if(
      labels.begin(), labels.end(), [](const auto& l) { return !l.is_placeholder; }));
}

ProfileKinds all_profile_kinds() {
  return {LayerType::Dense,   LayerType::Conv2D,  LayerType::Add,
          LayerType::Concatenate, LayerType::ReLU, LayerType::Sigmoid,
          LayerType::Clone,   LayerType::Reshape, LayerType::Flatten};
}

NodeId find_collector(const DataflowGraph& g) {
  for (const auto& [id, n] : g.nodes)
    if (n.type() == LayerType::ProfileCollector) return id;
  throw InstrumentError("graph has no profile collector");
}

NodeId find_seed(const DataflowGraph& g) {
  for (const auto& [id, n] : g.nodes)
    if (n.type() == LayerType::ProfileSeed) return id;
  throw InstrumentError("graph has no profile seed");
}

PfPorts pf_ports(const DataflowGraph& g, NodeId id) {
  const auto& node = g.node(id);
  PfPorts ports;
  const auto din = g.data_inputs(id);
  const auto dout = g.data_outputs(id);

  std::map<ChannelId, ChannelId> in_by_companion;
  ChannelId in_plain = -1;
  for (ChannelId c : node.input_channel_ids) {
    const auto& ch = g.channel(c);
    if (!ch.is_profiling) continue;
    if (ch.pf_companion >= 0) in_by_companion[ch.pf_companion] = c;
    else in_plain = c;
  }
  if (din.empty()) {
    if (in_plain >= 0) ports.inputs.push_back(in_plain);
  } else {
    for (ChannelId c : din) {
      auto it = in_by_companion.find(c);
      if (it == in_by_companion.end())
        throw InstrumentError("data channel " + std::to_string(c) +
                              " has no profiling companion");
      ports.inputs.push_back(it->second);
    }
  }

  std::map<ChannelId, ChannelId> out_by_companion, out_by_shortcut;
  ChannelId out_plain = -1;
  for (ChannelId c : node.output_channel_ids) {
    const auto& ch = g.channel(c);
    if (!ch.is_profiling) continue;
    if (ch.pf_shortcut_for >= 0) out_by_shortcut[ch.pf_shortcut_for] = c;
    else if (ch.pf_companion >= 0) out_by_companion[ch.pf_companion] = c;
    else out_plain = c;
  }
  if (dout.empty()) {
    if (out_plain >= 0) ports.outputs.push_back({out_plain, -1});
  } else {
    for (ChannelId c : dout) {
      auto it = out_by_companion.find(c);
      if (it == out_by_companion.end())
        throw InstrumentError("data channel " + std::to_string(c) +
                              " has no profiling companion");
      auto sc = out_by_shortcut.find(c);
      ports.outputs.push_back({it->second, sc == out_by_shortcut.end() ? -1 : sc->second});
    }
  }
  return ports;
}

std::vector<ChannelId> collector_inputs(const DataflowGraph& g, NodeId collector) {
  std::vector<ChannelId> main, shortcuts;
  for (ChannelId c : g.node(collector).input_channel_ids)
    (g.channel(c).pf_shortcut_for >= 0 ? shortcuts : main).push_back(c);
  std::sort(shortcuts.begin(), shortcuts.end());
  main.insert(main.end(), shortcuts.begin(), shortcuts.end());
  return main;
}

namespace {

// Token evaluation one node at a time, so shortcut insertion can re-run the
// node it just rewired.
class PfEvaluator {
public:
  explicit PfEvaluator(const DataflowGraph& g) : g_(g) {}

  void evaluate(NodeId id) {
    const auto& node = g_.node(id);
    if (node.type() == LayerType::ProfileCollector) return;
    if (node.type() == LayerType::ProfileSeed) {
      for (ChannelId c : node.output_channel_ids) tokens[c] = {};
      return;
    }
    const auto ports = pf_ports(g_, id);
    std::vector<std::vector<Slot>> in;
    for (ChannelId c : ports.inputs) in.push_back(tokens.at(c));
    std::vector<Slot> own;
    if (node.profiled)
      for (ChannelId c : g_.data_inputs(id)) own.push_back({false, c, id});
    for (auto& [c, t] : apply_pf_rule(ports, in, own, Slot{true, -1, id}))
      tokens[c] = std::move(t);
  }

  std::map<ChannelId, std::vector<Slot>> tokens;

private:
  const DataflowGraph& g_;
};

void resize_pf_shapes(DataflowGraph& g, const std::map<ChannelId, std::vector<Slot>>& tok) {
  for (auto& [id, c] : g.channels)
    if (c.is_profiling) {
      auto it = tok.find(id);
      c.element_shape = {1, 1, it == tok.end() ? 0 : static_cast<int>(it->second.size())};
    }
}

}  // namespace

std::map<ChannelId, std::vector<Slot>> evaluate_pf_tokens(const DataflowGraph& g) {
  PfEvaluator ev(g);
  for (NodeId id : topo_order(g)) ev.evaluate(id);
  return std::move(ev.tokens);
}

LabelList compute_labels(const DataflowGraph& g, int pf_bitwidth) {
  const auto tokens = evaluate_pf_tokens(g);
  LabelList list;
  list.pf_bitwidth = pf_bitwidth;
  for (ChannelId c : collector_inputs(g, find_collector(g))) {
    for (const Slot& s : tokens.at(c)) {
      ProfileLabel l;
      l.position = static_cast<int>(list.labels.size());
      l.is_placeholder = s.placeholder;
      l.measuring_node = s.node;
      if (!s.placeholder) l.channel_id = s.channel;
      list.labels.push_back(l);
    }
  }
  return list;
}

Instrumented inject_profiling(const DataflowGraph& graph, int pf_bitwidth,
                              const ProfileKinds& kinds) {
  if (pf_bitwidth < 1) throw InstrumentError("profiling bitwidth must be >= 1");
  if (auto report = validate(graph); !report.empty())
    throw InstrumentError("graph does not validate: " + report.front().message);
  if (graph.is_instrumented()) throw InstrumentError("graph is already instrumented");
  if (graph.data_sink_ids().size() != 1 || graph.sink_ids().size() != 1)
    throw InstrumentError("profiling requires exactly one data sink");
  if (kinds.empty()) throw InstrumentError("profile kind set is empty");
  for (const auto& [id, n] : graph.nodes) {
    auto t = n.type();
    bool junction =
        t == LayerType::Clone || t == LayerType::Add || t == LayerType::Concatenate;
    if (junction && !kinds.count(t))
      throw InstrumentError("split/merge kind " + std::string(to_string(t)) +
                            " must be profiled");
  }

  Instrumented out;
  DataflowGraph& g = out.graph;
  g = graph;
  for (auto& [id, n] : g.nodes) {
    auto t = n.type();
    n.profiled = t != LayerType::Input && t != LayerType::Output && kinds.count(t) != 0;
  }

  std::vector<ChannelId> data_channels;
  for (const auto& [id, c] : g.channels) data_channels.push_back(id);
  const auto sources = g.source_ids();
  const NodeId sink = g.data_sink_ids().front();
  const NodeId seed = g.add_node(LayerKind{LayerType::ProfileSeed});
  const NodeId collector = g.add_node(LayerKind{LayerType::ProfileCollector});

  auto pf_link = [&](NodeId from, NodeId to, ChannelId companion) {
    ChannelId id = g.connect(from, to, {1, 1, 0}, kDefaultPfCapacity);
    auto& ch = g.channel(id);
    ch.is_profiling = true;
    ch.pf_companion = companion;
  };
  for (NodeId s : sources) pf_link(seed, s, -1);
  for (ChannelId c : data_channels) {
    const auto ch = g.channel(c);
    pf_link(ch.producer, ch.consumer, c);
  }
  pf_link(sink, collector, -1);

  resize_pf_shapes(g, evaluate_pf_tokens(g));
  out.labels = compute_labels(g, pf_bitwidth);
  return out;
}

std::map<ChannelId, std::uint64_t> decode_profile_stream(const ProfilingToken& token,
                                                         const LabelList& labels) {
  if (token.values.size() != labels.labels.size())
    throw DecodeError("token length " + std::to_string(token.values.size()) +
                      " does not match " + std::to_string(labels.labels.size()) +
                      " labels");
  std::map<ChannelId, std::uint64_t> out;
  for (std::size_t i = 0; i < token.values.size(); ++i) {
    const auto& v = token.values[i];
    const auto& l = labels.labels[i];
    if (v.bitwidth != labels.pf_bitwidth)
      throw DecodeError("position " + std::to_string(i) + " has bitwidth " +
                        std::to_string(v.bitwidth) + ", labels expect " +
                        std::to_string(labels.pf_bitwidth));
    if (v.is_placeholder != l.is_placeholder)
      throw DecodeError("placeholder mismatch at position " + std::to_string(i));
    if (l.is_placeholder) continue;
    out[*l.channel_id] = v.raw;
  }
  return out;
}

Instrumented shortcut_optimize(const DataflowGraph& instrumented, const LabelList& labels,
                               std::optional<std::size_t> max_token_len) {
  Instrumented out{instrumented, labels};
  if (!max_token_len) return out;
  DataflowGraph& g = out.graph;
  const NodeId collector = find_collector(g);
  PfEvaluator ev(g);
  for (NodeId id : topo_order(instrumented)) {
    ev.evaluate(id);
    const auto type = g.node(id).type();
    if (type == LayerType::ProfileSeed || type == LayerType::ProfileCollector) continue;
    bool rewired = false;
    for (const auto& slot : pf_ports(g, id).outputs) {
      if (slot.shortcut >= 0) continue;
      const auto& companion = g.channel(slot.companion);
      if (companion.consumer == collector) continue;
      if (ev.tokens.at(slot.companion).size() <= *max_token_len) continue;
      ChannelId data = companion.pf_companion;
      ChannelId sc = g.connect(id, collector, {1, 1, 0}, companion.capacity);
      auto& ch = g.channel(sc);
      ch.is_profiling = true;
      ch.pf_shortcut_for = data;
      rewired = true;
    }
    if (rewired) ev.evaluate(id);
  }
  resize_pf_shapes(g, ev.tokens);
  out.labels = compute_labels(g, labels.pf_bitwidth);
  return out;
}

std::size_t shortcut_count(const DataflowGraph& g) {
  return static_cast<std::size_t>(std::count_if(
      g.channels.begin(), g.channels.end(),
      [](const auto& kv) { return kv.second.pf_shortcut_for >= 0; }));
}

nlohmann::json labels_to_json(const LabelList& list) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : list.labels) {
    arr.push_back({{"position", l.position},
                   {"channel_id", l.channel_id ? nlohmann::json(*l.channel_id)
                                               : nlohmann::json(nullptr)},
                   {"measuring_node", l.measuring_node},
                   {"is_placeholder", l.is_placeholder}});
  }
  return {{"pf_bitwidth", list.pf_bitwidth}, {"labels", arr}};
}

LabelList labels_from_json(const nlohmann::json& doc) {
  LabelList list;
  try {
    list.pf_bitwidth = doc.at("pf_bitwidth").get<int>();
    for (const auto& j : doc.at("labels")) {
      ProfileLabel l;
      l.position = j.at("position").get<int>();
      if (!j.at("channel_id").is_null()) l.channel_id = j.at("channel_id").get<int>();
      l.measuring_node = j.at("measuring_node").get<int>();
      l.is_placeholder = j.at("is_placeholder").get<bool>();
      list.labels.push_back(l);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed label document: ") + e.what());
  }
  return list;
}

}  // namespace streamprof
