#include <map>
#include <queue>
#include <set>

#include <gtest/gtest.h>

#include "streamprof/graph.hpp"
#include "streamprof/rinn.hpp"

using namespace streamprof;

namespace {

std::map<LayerType, int> count_kinds(const DataflowGraph& g) {
  std::map<LayerType, int> m;
  for (const auto& [id, n] : g.nodes) ++m[n.type()];
  return m;
}

std::set<LayerEdge> backbone(int n) {
  std::set<LayerEdge> b;
  for (int i = 0; i + 1 < n; ++i) b.emplace(i, i + 1);
  return b;
}

// Hidden-layer pairs (i, j) such that data flows from layer i's compute node
// to layer j's compute node without passing another compute node.
std::set<LayerEdge> wired_pairs(const DataflowGraph& g, LayerType compute) {
  std::map<NodeId, int> layer_of;
  for (const auto& [id, n] : g.nodes)
    if (n.type() == compute && n.layer_index >= 0) layer_of[id] = n.layer_index;
  std::set<LayerEdge> out;
  for (const auto& [src, i] : layer_of) {
    std::queue<NodeId> q;
    std::set<NodeId> seen;
    for (ChannelId c : g.node(src).output_channel_ids) q.push(g.channel(c).consumer);
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop();
      if (!seen.insert(v).second) continue;
      if (auto it = layer_of.find(v); it != layer_of.end()) {
        out.emplace(i, it->second);
        continue;
      }
      // A DenseStack layer is Dense followed by ReLU; skip through it.
      for (ChannelId c : g.node(v).output_channel_ids) q.push(g.channel(c).consumer);
    }
  }
  return out;
}

}  // namespace

TEST(ConnectionEdges, DensityZeroIsBackbone) {
  for (auto p : {ConnectionPattern::ShortSkip, ConnectionPattern::LongSkip,
                 ConnectionPattern::EndsOnly, ConnectionPattern::UniformRandom})
    for (std::uint64_t seed : {1u, 2u, 99u})
      EXPECT_EQ(connection_edges(p, 4, 0.0, seed), backbone(4));
}

TEST(ConnectionEdges, ShortSkipFull) {
  auto e = connection_edges(ConnectionPattern::ShortSkip, 5, 1.0, 123);
  auto expected = backbone(5);
  for (LayerEdge p : {LayerEdge{0, 2}, LayerEdge{1, 3}, LayerEdge{2, 4}}) expected.insert(p);
  EXPECT_EQ(e, expected);
}

TEST(ConnectionEdges, EndsOnlyFull) {
  const int n = 6;
  auto e = connection_edges(ConnectionPattern::EndsOnly, n, 1.0, 5);
  auto expected = backbone(n);
  // Enumerate every pair and keep those touching both bands.
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (i <= 1 && j >= n - 2) expected.emplace(i, j);
  EXPECT_EQ(e, expected);
  EXPECT_EQ(e.size(), backbone(n).size() + 4);  // (0,4) (0,5) (1,4) (1,5)
}

TEST(ConnectionEdges, CountIsRoundedDensityTimesAdmissible) {
  for (auto p : {ConnectionPattern::ShortSkip, ConnectionPattern::LongSkip,
                 ConnectionPattern::EndsOnly, ConnectionPattern::UniformRandom})
    for (int n = 1; n <= 12; ++n)
      for (double d : {0.1, 0.25, 0.5, 0.8}) {
        const auto adm = admissible_skip_pairs(p, n);
        const auto e = connection_edges(p, n, d, 42 + n);
        EXPECT_EQ(e.size(), backbone(n).size() + static_cast<std::size_t>(std::llround(d * adm.size())));
        for (auto pr : e)
          if (!backbone(n).count(pr)) EXPECT_TRUE(adm.count(pr));
      }
}

TEST(ConnectionEdges, PatternSoundness) {
  for (int n = 3; n <= 14; ++n) {
    const int long_span = (n + 1) / 2;
    for (auto [i, j] : connection_edges(ConnectionPattern::ShortSkip, n, 1.0, 1))
      EXPECT_LE(j - i, 2);
    for (auto [i, j] : connection_edges(ConnectionPattern::LongSkip, n, 1.0, 1))
      if (j - i > 1) EXPECT_GE(j - i, long_span);
    for (auto [i, j] : connection_edges(ConnectionPattern::EndsOnly, n, 1.0, 1))
      if (j - i > 1) EXPECT_TRUE(i <= 1 && j >= n - 2);
  }
}

TEST(ConnectionEdges, DeterministicInSeed) {
  auto a = connection_edges(ConnectionPattern::UniformRandom, 10, 0.4, 77);
  auto b = connection_edges(ConnectionPattern::UniformRandom, 10, 0.4, 77);
  EXPECT_EQ(a, b);
  bool any_differs = false;
  for (std::uint64_t s = 1; s < 10; ++s)
    any_differs |= connection_edges(ConnectionPattern::UniformRandom, 10, 0.4, s) != a;
  EXPECT_TRUE(any_differs);
}

TEST(Prng, BoundedDrawsStayInRange) {
  Prng r(3);
  std::map<std::uint64_t, int> hist;
  for (int i = 0; i < 6000; ++i) {
    auto x = r.below(6);
    ASSERT_LT(x, 6u);
    ++hist[x];
  }
  EXPECT_EQ(hist.size(), 6u);
  for (auto [v, c] : hist) EXPECT_NEAR(c, 1000, 150);
  EXPECT_THROW(r.below(0), std::invalid_argument);
}

TEST(GenerateRinn, SingleLayerChain) {
  RinnSpec s;
  s.num_hidden_layers = 1;
  s.connection_density = 0.0;
  s.reshape_side = 6;
  const auto g = generate_rinn(s);
  EXPECT_TRUE(validate(g).empty());
  const auto order = topo_order(g);
  std::vector<LayerType> types;
  for (NodeId id : order) types.push_back(g.node(id).type());
  EXPECT_EQ(types, (std::vector<LayerType>{LayerType::Input, LayerType::Dense, LayerType::Reshape,
                                           LayerType::Conv2D, LayerType::Flatten, LayerType::Dense,
                                           LayerType::Sigmoid, LayerType::Output}));
  const auto k = count_kinds(g);
  EXPECT_EQ(k.count(LayerType::Clone), 0u);
  EXPECT_EQ(k.count(LayerType::Add), 0u);
  EXPECT_EQ(g.node(order[1]).params.layer_kind.out_units, 36);
  EXPECT_EQ(g.node(order[5]).params.layer_kind.out_units, 5);
}

TEST(GenerateRinn, DenseStackFullDensityIsComplete) {
  RinnSpec s;
  s.variant = RinnVariant::DenseStack;
  s.num_hidden_layers = 3;
  s.connection_density = 1.0;
  s.pattern = ConnectionPattern::UniformRandom;
  s.seed = 7;
  const auto g = generate_rinn(s);
  ASSERT_TRUE(validate(g).empty());
  std::set<LayerEdge> all;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) all.emplace(i, j);
  EXPECT_EQ(wired_pairs(g, LayerType::Dense), all);
  for (const auto& [id, n] : g.nodes) {
    const auto outs = g.data_outputs(id).size();
    if (n.type() != LayerType::Clone) EXPECT_LE(outs, 1u) << id;
    if (g.data_inputs(id).size() > 1)
      EXPECT_TRUE(n.type() == LayerType::Add || n.type() == LayerType::Concatenate);
  }
  const auto k = count_kinds(g);
  EXPECT_EQ(k.count(LayerType::Reshape), 0u);
  EXPECT_EQ(k.count(LayerType::Flatten), 0u);
  EXPECT_EQ(k.count(LayerType::Conv2D), 0u);
}

TEST(GenerateRinn, WiringMatchesConnectionEdges) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    RinnSpec s;
    s.seed = seed;
    s.num_hidden_layers = 3 + static_cast<int>(seed % 5);
    s.connection_density = 0.6;
    const auto g = generate_rinn(s);
    EXPECT_EQ(wired_pairs(g, LayerType::Conv2D),
              connection_edges(s.pattern, s.num_hidden_layers, s.connection_density, seed));
  }
}

TEST(GenerateRinn, AlwaysValidAndDeterministic) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    RinnSpec s;
    s.seed = seed;
    s.variant = seed % 3 ? RinnVariant::ConvStack : RinnVariant::DenseStack;
    s.num_hidden_layers = 1 + static_cast<int>(seed % 9);
    s.connection_density = static_cast<double>(seed % 5) / 4.0;
    s.pattern = static_cast<ConnectionPattern>(seed % 4);
    s.kernel = 1 + static_cast<int>(seed % 4);
    const auto a = generate_rinn(s);
    ASSERT_TRUE(validate(a).empty()) << seed;
    EXPECT_EQ(graph_to_json(a).dump(), graph_to_json(generate_rinn(s)).dump());
    EXPECT_EQ(a.data_sink_ids().size(), 1u);
  }
}

TEST(GenerateRinn, BackboneReachesOutputWithoutSkips) {
  RinnSpec s;
  s.num_hidden_layers = 6;
  s.connection_density = 1.0;
  const auto g = generate_rinn(s);
  const auto pairs = wired_pairs(g, LayerType::Conv2D);
  for (auto e : backbone(6)) EXPECT_TRUE(pairs.count(e));
}

TEST(GenerateRinn, JunctionKindFollowsShapes) {
  RinnSpec s;
  s.variant = RinnVariant::DenseStack;
  s.num_hidden_layers = 8;
  s.connection_density = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    s.seed = seed;
    const auto g = generate_rinn(s);
    for (const auto& [id, n] : g.nodes) {
      if (n.type() != LayerType::Add && n.type() != LayerType::Concatenate) continue;
      const auto ins = g.data_inputs(id);
      ASSERT_EQ(ins.size(), 2u);
      const bool same = g.channel(ins[0]).element_shape == g.channel(ins[1]).element_shape;
      EXPECT_EQ(n.type() == LayerType::Add, same);
    }
  }
}

TEST(RinnSpec, Checks) {
  RinnSpec s;
  s.kernel = 7;
  s.reshape_side = 6;
  EXPECT_THROW(check_rinn_spec(s), std::invalid_argument);
  s = RinnSpec{};
  s.connection_density = 1.5;
  EXPECT_THROW(check_rinn_spec(s), std::invalid_argument);
  s = RinnSpec{};
  s.num_hidden_layers = 0;
  EXPECT_THROW(generate_rinn(s), std::invalid_argument);
  s = RinnSpec{};
  s.data_bitwidth = {2, 3};
  EXPECT_THROW(check_rinn_spec(s), std::invalid_argument);
}

TEST(RinnSpec, JsonRoundTripAndStrictKeys) {
  RinnSpec s;
  s.seed = 99;
  s.variant = RinnVariant::DenseStack;
  s.pattern = ConnectionPattern::LongSkip;
  s.data_bitwidth = {8, 5};
  nlohmann::json j = s;
  const auto back = j.get<RinnSpec>();
  EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
  j["kernal"] = 3;
  EXPECT_THROW(j.get<RinnSpec>(), std::invalid_argument);
}
