#include <map>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "streamprof/instrument.hpp"
#include "streamprof/rinn.hpp"
#include "streamprof/sim.hpp"

using namespace streamprof;
using namespace streamprof::testing;

namespace {

std::set<ChannelId> measured_channels(const DataflowGraph& instrumented) {
  std::set<ChannelId> out;
  for (const auto& [id, c] : instrumented.channels)
    if (!c.is_profiling && instrumented.node(c.consumer).profiled) out.insert(id);
  return out;
}

void expect_bijection(const DataflowGraph& g, const LabelList& labels) {
  std::multiset<ChannelId> seen;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const auto& l = labels.labels[i];
    EXPECT_EQ(l.position, static_cast<int>(i));
    EXPECT_EQ(l.is_placeholder, !l.channel_id.has_value());
    if (l.channel_id) {
      seen.insert(*l.channel_id);
      EXPECT_EQ(g.channel(*l.channel_id).consumer, l.measuring_node);
    }
  }
  const auto expected = measured_channels(g);
  EXPECT_EQ(seen.size(), expected.size());
  EXPECT_EQ(std::set<ChannelId>(seen.begin(), seen.end()), expected);
}

// Token whose value at a channel position is a per-channel sentinel.
ProfilingToken sentinel_token(const LabelList& labels) {
  ProfilingToken t;
  for (const auto& l : labels.labels)
    t.values.push_back(l.is_placeholder ? ProfilingValue::placeholder(labels.pf_bitwidth)
                                        : ProfilingValue{static_cast<std::uint64_t>(
                                                             1000 + *l.channel_id),
                                                         labels.pf_bitwidth, false});
  return t;
}

RinnSpec random_spec(std::uint64_t seed) {
  RinnSpec s;
  s.seed = seed;
  s.variant = seed % 3 == 0 ? RinnVariant::DenseStack : RinnVariant::ConvStack;
  s.num_hidden_layers = 2 + static_cast<int>(seed % 8);
  s.connection_density = static_cast<double>(seed % 5) / 4.0;
  s.pattern = static_cast<ConnectionPattern>(seed % 4);
  return s;
}

}  // namespace

TEST(Wrap, Values) {
  auto a = saturate_or_wrap(66, 16);
  EXPECT_EQ(a.value.raw, 66u);
  EXPECT_FALSE(a.overflowed);
  auto b = saturate_or_wrap(66, 6);
  EXPECT_EQ(b.value.raw, 2u);
  EXPECT_TRUE(b.overflowed);
  auto c = saturate_or_wrap(0, 1);
  EXPECT_EQ(c.value.raw, 0u);
  EXPECT_FALSE(c.overflowed);
  EXPECT_TRUE(saturate_or_wrap(64, 6).overflowed);
  EXPECT_FALSE(saturate_or_wrap(63, 6).overflowed);
  EXPECT_FALSE(saturate_or_wrap(66, 7).overflowed);
  EXPECT_THROW(saturate_or_wrap(1, 0), std::invalid_argument);
}

TEST(Placeholder, IsAllOnes) {
  EXPECT_EQ(placeholder_pattern(6), 63u);
  EXPECT_EQ(placeholder_pattern(16), 65535u);
  auto p = ProfilingValue::placeholder(8);
  EXPECT_TRUE(p.is_placeholder);
  EXPECT_EQ(p.raw, 255u);
}

TEST(Inject, ChainWithReluOnly) {
  auto c = chain();
  const auto inst = inject_profiling(c.g, 16, {LayerType::ReLU});
  ASSERT_EQ(inst.labels.labels.size(), 1u);
  const auto& l = inst.labels.labels[0];
  EXPECT_EQ(l.position, 0);
  EXPECT_EQ(l.channel_id, c.in_relu);
  EXPECT_EQ(l.measuring_node, c.relu);
  EXPECT_FALSE(l.is_placeholder);
  EXPECT_TRUE(validate(inst.graph).empty());
}

TEST(Inject, DiamondLabelOrder) {
  auto d = relu_diamond();
  const auto inst = inject_profiling(d.g, 16, all_profile_kinds());
  const auto& ls = inst.labels.labels;
  ASSERT_EQ(ls.size(), 6u);
  EXPECT_EQ(ls[0].channel_id, d.in_clone);
  EXPECT_EQ(ls[1].channel_id, d.clone_a);
  EXPECT_TRUE(ls[2].is_placeholder);
  EXPECT_EQ(ls[3].channel_id, d.clone_b);
  EXPECT_EQ(ls[4].channel_id, d.a_add);
  EXPECT_EQ(ls[5].channel_id, d.b_add);
  EXPECT_EQ(inst.labels.signal_count(), 5u);
}

TEST(Inject, OneExtraSourceAndSink) {
  auto d = relu_diamond();
  const auto inst = inject_profiling(d.g, 16, all_profile_kinds());
  // Input is now fed by the seed and Output feeds the collector.
  EXPECT_EQ(inst.graph.source_ids(), std::vector<NodeId>{find_seed(inst.graph)});
  EXPECT_EQ(inst.graph.sink_ids(), std::vector<NodeId>{find_collector(inst.graph)});
  EXPECT_EQ(inst.graph.nodes.size(), d.g.nodes.size() + 2);
  EXPECT_TRUE(inst.graph.is_instrumented());
}

TEST(Inject, MirrorProperty) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto plain = generate_rinn(random_spec(seed));
    const auto inst = inject_profiling(plain, 16, all_profile_kinds());
    for (const auto& [id, n] : plain.nodes) {
      std::size_t pf_in = 0, pf_out = 0;
      for (ChannelId c : inst.graph.node(id).input_channel_ids)
        pf_in += inst.graph.channel(c).is_profiling;
      for (ChannelId c : inst.graph.node(id).output_channel_ids)
        pf_out += inst.graph.channel(c).is_profiling;
      EXPECT_EQ(pf_in, std::max<std::size_t>(1, plain.data_inputs(id).size()));
      EXPECT_EQ(pf_out, std::max<std::size_t>(1, plain.data_outputs(id).size()));
    }
  }
}

TEST(Inject, Rejections) {
  auto d = relu_diamond();
  EXPECT_THROW(inject_profiling(d.g, 16, {LayerType::ReLU}), InstrumentError);
  EXPECT_THROW(inject_profiling(d.g, 16, {LayerType::ReLU, LayerType::Clone}), InstrumentError);
  EXPECT_THROW(inject_profiling(d.g, 16, {}), InstrumentError);

  auto two_sinks = relu_diamond();
  NodeId extra = two_sinks.g.add_node(LayerKind::output());
  two_sinks.g.node(two_sinks.clone).params.layer_kind.fanout = 3;
  two_sinks.g.connect(two_sinks.clone, extra, {1, 20, 1});
  ASSERT_TRUE(validate(two_sinks.g).empty());
  EXPECT_THROW(inject_profiling(two_sinks.g, 16, all_profile_kinds()), InstrumentError);

  const auto inst = inject_profiling(d.g, 16, all_profile_kinds());
  EXPECT_THROW(inject_profiling(inst.graph, 16, all_profile_kinds()), InstrumentError);
}

TEST(Inject, PureFunction) {
  auto d = relu_diamond();
  const auto a = inject_profiling(d.g, 16, all_profile_kinds());
  const auto b = inject_profiling(d.g, 16, all_profile_kinds());
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(Inject, SeventyNineSignals) {
  const auto g = seventy_nine_signal_net();
  ASSERT_TRUE(validate(g).empty());
  const ProfileKinds kinds{LayerType::Conv2D, LayerType::ReLU, LayerType::Clone, LayerType::Add,
                           LayerType::Dense};
  const auto inst = inject_profiling(g, 16, kinds);
  EXPECT_EQ(inst.labels.signal_count(), 79u);
  std::map<LayerType, int> by_kind;
  for (const auto& l : inst.labels.labels)
    if (!l.is_placeholder) ++by_kind[inst.graph.node(l.measuring_node).type()];
  EXPECT_EQ(by_kind[LayerType::Conv2D], 20);
  EXPECT_EQ(by_kind[LayerType::ReLU], 20);
  EXPECT_EQ(by_kind[LayerType::Clone], 9);
  EXPECT_EQ(by_kind[LayerType::Add], 29);
  EXPECT_EQ(by_kind[LayerType::Dense], 1);
  expect_bijection(inst.graph, inst.labels);
}

TEST(Decode, SingleLabel) {
  LabelList l;
  l.pf_bitwidth = 16;
  l.labels.push_back({0, 3, 1, false});
  EXPECT_EQ(decode_profile_stream({{{5, 16, false}}}, l), (std::map<ChannelId, std::uint64_t>{{3, 5}}));
}

TEST(Decode, DiamondToken) {
  auto d = relu_diamond();
  const auto inst = inject_profiling(d.g, 16, all_profile_kinds());
  ProfilingToken t{{{2, 16, false},
                    {3, 16, false},
                    ProfilingValue::placeholder(16),
                    {3, 16, false},
                    {1, 16, false},
                    {1, 16, false}}};
  const auto m = decode_profile_stream(t, inst.labels);
  EXPECT_EQ(m, (std::map<ChannelId, std::uint64_t>{
                   {d.in_clone, 2}, {d.clone_a, 3}, {d.clone_b, 3}, {d.a_add, 1}, {d.b_add, 1}}));

  ProfilingToken short_token = t;
  short_token.values.pop_back();
  EXPECT_THROW(decode_profile_stream(short_token, inst.labels), DecodeError);

  ProfilingToken flag_mismatch = t;
  flag_mismatch.values[2].is_placeholder = false;
  EXPECT_THROW(decode_profile_stream(flag_mismatch, inst.labels), DecodeError);

  ProfilingToken width_mismatch = t;
  width_mismatch.values[0].bitwidth = 8;
  EXPECT_THROW(decode_profile_stream(width_mismatch, inst.labels), DecodeError);
}

TEST(Decode, SentinelRoundTripOnRandomNets) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = inject_profiling(generate_rinn(random_spec(seed)), 16, all_profile_kinds());
    const auto m = decode_profile_stream(sentinel_token(inst.labels), inst.labels);
    const auto expected = measured_channels(inst.graph);
    ASSERT_EQ(m.size(), expected.size());
    for (ChannelId c : expected) EXPECT_EQ(m.at(c), 1000u + static_cast<unsigned>(c));
  }
}

TEST(Labels, JsonRoundTrip) {
  auto d = relu_diamond();
  const auto inst = inject_profiling(d.g, 12, all_profile_kinds());
  const auto j = labels_to_json(inst.labels);
  EXPECT_EQ(j["pf_bitwidth"], 12);
  EXPECT_TRUE(j["labels"][2]["channel_id"].is_null());
  EXPECT_EQ(labels_from_json(j), inst.labels);
}

TEST(Shortcut, UnboundedIsNoop) {
  auto d = relu_diamond();
  const auto inst = inject_profiling(d.g, 16, all_profile_kinds());
  const auto opt = shortcut_optimize(inst.graph, inst.labels, std::nullopt);
  EXPECT_EQ(opt.graph, inst.graph);
  EXPECT_EQ(opt.labels, inst.labels);
}

TEST(Shortcut, DiamondThresholdTwo) {
  auto d = relu_diamond();
  const auto inst = inject_profiling(d.g, 16, all_profile_kinds());
  const auto opt = shortcut_optimize(inst.graph, inst.labels, 2);
  EXPECT_GE(shortcut_count(opt.graph), 1u);
  expect_bijection(opt.graph, opt.labels);
  for (const auto& [c, slots] : evaluate_pf_tokens(opt.graph))
    if (opt.graph.channel(c).consumer != find_collector(opt.graph)) EXPECT_LE(slots.size(), 2u);

  SimConfig cfg;
  const auto a = run_simulation(inst.graph, inst.labels, cfg);
  const auto b = run_simulation(opt.graph, opt.labels, cfg);
  ASSERT_EQ(a.trace.termination.status, TerminationStatus::Completed);
  ASSERT_EQ(b.trace.termination.status, TerminationStatus::Completed);
  EXPECT_EQ(a.decoded_max(), b.decoded_max());
}

TEST(Shortcut, ChainOfTenRelus) {
  DataflowGraph g;
  NodeId cur = g.add_node(LayerKind::input());
  for (int i = 0; i < 10; ++i) {
    NodeId r = g.add_node(LayerKind::relu());
    g.connect(cur, r, {1, 8, 1});
    cur = r;
  }
  g.connect(cur, g.add_node(LayerKind::output()), {1, 8, 1});
  const auto inst = inject_profiling(g, 16, {LayerType::ReLU});
  const auto opt = shortcut_optimize(inst.graph, inst.labels, 3);
  EXPECT_GE(shortcut_count(opt.graph), 3u);
  expect_bijection(opt.graph, opt.labels);
  SimConfig cfg;
  EXPECT_EQ(run_simulation(inst.graph, inst.labels, cfg).decoded_max(),
            run_simulation(opt.graph, opt.labels, cfg).decoded_max());
  EXPECT_EQ(decode_profile_stream(sentinel_token(opt.labels), opt.labels).size(), 10u);
}

TEST(Shortcut, BijectionAcrossThresholds) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = inject_profiling(generate_rinn(random_spec(seed)), 16, all_profile_kinds());
    for (std::size_t m : {1u, 2u, 4u}) {
      const auto opt = shortcut_optimize(inst.graph, inst.labels, m);
      ASSERT_TRUE(validate(opt.graph).empty());
      expect_bijection(opt.graph, opt.labels);
    }
  }
}
