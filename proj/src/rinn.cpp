#include "streamprof/rinn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace streamprof {

std::uint64_t Prng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Prng::below bound must be > 0");
  // Largest multiple of bound representable; draws above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % bound;
}

std::string_view to_string(ConnectionPattern p) {
  switch (p) {
    case ConnectionPattern::ShortSkip: return "ShortSkip";
    case ConnectionPattern::LongSkip: return "LongSkip";
    case ConnectionPattern::EndsOnly: return "EndsOnly";
    case ConnectionPattern::UniformRandom: return "UniformRandom";
  }
  return "?";
}

ConnectionPattern connection_pattern_from_string(std::string_view s) {
  for (auto p : {ConnectionPattern::ShortSkip, ConnectionPattern::LongSkip,
                 ConnectionPattern::EndsOnly, ConnectionPattern::UniformRandom})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown connection pattern '" + std::string(s) + "'");
}

std::string_view to_string(RinnVariant v) {
  return v == RinnVariant::ConvStack ? "ConvStack" : "DenseStack";
}

RinnVariant rinn_variant_from_string(std::string_view s) {
  if (s == "ConvStack") return RinnVariant::ConvStack;
  if (s == "DenseStack") return RinnVariant::DenseStack;
  throw std::invalid_argument("unknown RINN variant '" + std::string(s) + "'");
}

void check_rinn_spec(const RinnSpec& s) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("rinn: " + m); };
  if (s.input_width < 1) fail("input_width must be >= 1");
  if (s.output_width < 1) fail("output_width must be >= 1");
  if (s.reshape_side < 1) fail("reshape_side must be >= 1");
  if (s.num_hidden_layers < 1) fail("num_hidden_layers must be >= 1");
  if (!(s.connection_density >= 0.0 && s.connection_density <= 1.0))
    fail("connection_density must lie in [0, 1]");
  if (s.kernel < 1) fail("kernel must be >= 1");
  if (s.filters < 1) fail("filters must be >= 1");
  if (s.reuse_factor < 1) fail("reuse_factor must be >= 1");
  if (s.data_bitwidth.integer < 1 || s.data_bitwidth.total < s.data_bitwidth.integer)
    fail("data_bitwidth must satisfy W >= I >= 1");
  if (s.variant == RinnVariant::ConvStack && s.reshape_side < s.kernel)
    fail("reshape_side must be >= kernel");
}

std::set<LayerEdge> admissible_skip_pairs(ConnectionPattern pattern, int n) {
  std::set<LayerEdge> out;
  const int long_span = (n + 1) / 2;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      bool ok = false;
      switch (pattern) {
        case ConnectionPattern::ShortSkip: ok = j - i <= 2; break;
        case ConnectionPattern::LongSkip: ok = j - i >= long_span; break;
        case ConnectionPattern::EndsOnly: ok = i <= 1 && j >= n - 2; break;
        case ConnectionPattern::UniformRandom: ok = true; break;
      }
      if (ok) out.emplace(i, j);
    }
  }
  return out;
}

std::set<LayerEdge> connection_edges(ConnectionPattern pattern, int n, double density,
                                     std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("connection_edges: num_layers must be >= 1");
  std::set<LayerEdge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace(i, i + 1);

  auto admissible = admissible_skip_pairs(pattern, n);
  std::vector<LayerEdge> pool(admissible.begin(), admissible.end());
  const auto want = static_cast<std::size_t>(
      std::llround(std::clamp(density, 0.0, 1.0) * static_cast<double>(pool.size())));
  Prng rng(seed);
  // Partial Fisher-Yates: the first `want` slots become the sample.
  for (std::size_t k = 0; k < want; ++k) {
    auto pick = k + rng.below(pool.size() - k);
    std::swap(pool[k], pool[pick]);
    edges.insert(pool[k]);
  }
  return edges;
}

namespace {

struct Port {
  NodeId node;
  Shape shape;
};

class Builder {
public:
  explicit Builder(const RinnSpec& spec) : spec_(spec) {}

  NodeId add(LayerKind kind, int layer_index = -1) {
    LayerParams p;
    p.layer_kind = kind;
    p.reuse_factor = spec_.reuse_factor;
    p.data_bitwidth = spec_.data_bitwidth;
    return graph.add_node(p, layer_index);
  }

  void link(const Port& from, NodeId to) { graph.connect(from.node, to, from.shape); }

  // Chains a single-input layer after `from`.
  Port then(const Port& from, LayerKind kind, int layer_index = -1) {
    NodeId id = add(kind, layer_index);
    link(from, id);
    return {id, infer_output_shape(kind, {from.shape})};
  }

  // Reduces several streams to one with a binary tree of two-input merges.
  Port merge(std::vector<Port> inputs, int layer_index) {
    while (inputs.size() > 1) {
      std::vector<Port> next;
      for (std::size_t i = 0; i + 1 < inputs.size(); i += 2) {
        const auto& a = inputs[i];
        const auto& b = inputs[i + 1];
        LayerKind kind =
            a.shape == b.shape ? LayerKind::add(2) : LayerKind::concatenate(2);
        NodeId id = add(kind, layer_index);
        link(a, id);
        link(b, id);
        next.push_back({id, infer_output_shape(kind, {a.shape, b.shape})});
      }
      if (inputs.size() % 2) next.push_back(inputs.back());
      inputs = std::move(next);
    }
    return inputs.front();
  }

  DataflowGraph graph;

private:
  const RinnSpec& spec_;
};

}  // namespace

DataflowGraph generate_rinn(const RinnSpec& spec) {
  check_rinn_spec(spec);
  const int n = spec.num_hidden_layers;
  const int x = spec.reshape_side;
  const auto edges =
      connection_edges(spec.pattern, n, spec.connection_density, spec.seed);
  Prng widths(spec.seed ^ 0x9E3779B97F4A7C15ULL);

  Builder b(spec);
  NodeId in = b.add(LayerKind::input());
  Port cur{in, {1, 1, spec.input_width}};
  cur = b.then(cur, LayerKind::dense(x * x));
  const bool conv = spec.variant == RinnVariant::ConvStack;
  if (conv) cur = b.then(cur, LayerKind::reshape({x, x, 1}));

  std::map<int, std::vector<int>> preds, succs;
  for (auto [i, j] : edges) {
    preds[j].push_back(i);
    succs[i].push_back(j);
  }

  // Per hidden layer: the port each consumer reads from.
  std::vector<std::map<int, Port>> out_ports(n);
  const int kFlatten = n;  // pseudo consumer index after the last layer
  for (int j = 0; j < n; ++j) {
    Port input = cur;
    if (j > 0) {
      std::vector<Port> ins;
      for (int i : preds[j]) ins.push_back(out_ports[i].at(j));
      input = b.merge(std::move(ins), j);
    }
    Port layer_out;
    if (conv) {
      layer_out = b.then(input, LayerKind::conv2d(spec.kernel, spec.filters), j);
    } else {
      int units = x * x * static_cast<int>(1 + widths.below(2));
      layer_out = b.then(input, LayerKind::dense(units), j);
      layer_out = b.then(layer_out, LayerKind::relu(), j);
    }
    std::vector<int> consumers = succs[j];
    if (j == n - 1) consumers.push_back(kFlatten);
    if (consumers.size() == 1) {
      out_ports[j][consumers[0]] = layer_out;
    } else {
      NodeId clone =
          b.add(LayerKind::clone(static_cast<int>(consumers.size())), j);
      b.link(layer_out, clone);
      for (int c : consumers) out_ports[j][c] = {clone, layer_out.shape};
    }
  }
  cur = out_ports[n - 1].at(kFlatten);
  if (conv) cur = b.then(cur, LayerKind::flatten());
  cur = b.then(cur, LayerKind::dense(spec.output_width));
  cur = b.then(cur, LayerKind::sigmoid());
  b.then(cur, LayerKind::output());
  return std::move(b.graph);
}

void to_json(nlohmann::json& j, const RinnSpec& s) {
  j = nlohmann::json{{"seed", s.seed},
                     {"variant", to_string(s.variant)},
                     {"input_width", s.input_width},
                     {"output_width", s.output_width},
                     {"reshape_side", s.reshape_side},
                     {"num_hidden_layers", s.num_hidden_layers},
                     {"connection_density", s.connection_density},
                     {"pattern", to_string(s.pattern)},
                     {"kernel", s.kernel},
                     {"filters", s.filters},
                     {"reuse_factor", s.reuse_factor},
                     {"data_bitwidth", s.data_bitwidth}};
}

void from_json(const nlohmann::json& j, RinnSpec& s) {
  if (!j.is_object()) throw std::invalid_argument("rinn spec must be a JSON object");
  s = RinnSpec{};
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "variant") s.variant = rinn_variant_from_string(v.get<std::string>());
      else if (key == "input_width") s.input_width = v.get<int>();
      else if (key == "output_width") s.output_width = v.get<int>();
      else if (key == "reshape_side") s.reshape_side = v.get<int>();
      else if (key == "num_hidden_layers") s.num_hidden_layers = v.get<int>();
      else if (key == "connection_density") s.connection_density = v.get<double>();
      else if (key == "pattern") s.pattern = connection_pattern_from_string(v.get<std::string>());
      else if (key == "kernel") s.kernel = v.get<int>();
      else if (key == "filters") s.filters = v.get<int>();
      else if (key == "reuse_factor") s.reuse_factor = v.get<int>();
      else if (key == "data_bitwidth") s.data_bitwidth = v.get<Bitwidth>();
      else throw std::invalid_argument("rinn: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("rinn: ") + e.what());
  } catch (const GraphError& e) {
    throw std::invalid_argument(std::string("rinn: ") + e.what());
  }
}

}  // namespace streamprof
