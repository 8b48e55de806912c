#pragma once

#include <deque>
#include <vector>

#include "streamprof/graph.hpp"

namespace streamprof::testing {

struct Chain {
  DataflowGraph g;
  NodeId in, relu, out;
  ChannelId in_relu, relu_out;
};

inline Chain chain(int tokens = 10) {
  Chain c;
  c.in = c.g.add_node(LayerKind::input());
  c.relu = c.g.add_node(LayerKind::relu());
  c.out = c.g.add_node(LayerKind::output());
  c.in_relu = c.g.connect(c.in, c.relu, {1, tokens, 1});
  c.relu_out = c.g.connect(c.relu, c.out, {1, tokens, 1});
  return c;
}

struct Diamond {
  DataflowGraph g;
  NodeId in, clone, a, b, add, out;
  ChannelId in_clone, clone_a, clone_b, a_add, b_add, add_out;
};

// Input -> Clone -> {A, B} -> Add -> Output with two ReLU branches.
inline Diamond relu_diamond(int tokens = 20) {
  Diamond d;
  auto& g = d.g;
  const Shape s{1, tokens, 1};
  d.in = g.add_node(LayerKind::input());
  d.clone = g.add_node(LayerKind::clone(2));
  d.a = g.add_node(LayerKind::relu());
  d.b = g.add_node(LayerKind::relu());
  d.add = g.add_node(LayerKind::add(2));
  d.out = g.add_node(LayerKind::output());
  d.in_clone = g.connect(d.in, d.clone, s);
  d.clone_a = g.connect(d.clone, d.a, s);
  d.clone_b = g.connect(d.clone, d.b, s);
  d.a_add = g.connect(d.a, d.add, s);
  d.b_add = g.connect(d.b, d.add, s);
  d.add_out = g.connect(d.add, d.out, s);
  return d;
}

struct SkipDiamond {
  DataflowGraph g;
  NodeId in, clone, delay, add, out;
  ChannelId in_clone, clone_delay, skip, delay_add, add_out;
};

// Input -> Clone -> {delay branch, identity skip} -> Add -> Output. The delay
// branch is one ReLU: a skip token waits three cycles for its partner.
inline SkipDiamond delay3_diamond(int tokens = 20, int capacity = 4) {
  SkipDiamond d;
  auto& g = d.g;
  const Shape s{1, tokens, 1};
  d.in = g.add_node(LayerKind::input());
  d.clone = g.add_node(LayerKind::clone(2), 0);
  d.delay = g.add_node(LayerKind::relu(), 1);
  d.add = g.add_node(LayerKind::add(2), 2);
  d.out = g.add_node(LayerKind::output());
  d.in_clone = g.connect(d.in, d.clone, s, capacity);
  d.clone_delay = g.connect(d.clone, d.delay, s, capacity);
  d.skip = g.connect(d.clone, d.add, s, capacity);
  d.delay_add = g.connect(d.delay, d.add, s, capacity);
  d.add_out = g.connect(d.add, d.out, s, capacity);
  return d;
}

// Same shape, but the delay branch is a 2x2 convolution over a 5x2 map: it
// holds four tokens before its first output, more than a capacity-2 skip
// lets the Clone send.
inline SkipDiamond window_diamond(int skip_capacity = 2) {
  SkipDiamond d;
  auto& g = d.g;
  const Shape s{5, 2, 1};
  d.in = g.add_node(LayerKind::input());
  d.clone = g.add_node(LayerKind::clone(2), 0);
  d.delay = g.add_node(LayerKind::conv2d(2, 1), 1);
  d.add = g.add_node(LayerKind::add(2), 2);
  d.out = g.add_node(LayerKind::output());
  d.in_clone = g.connect(d.in, d.clone, s, 16);
  d.clone_delay = g.connect(d.clone, d.delay, s, 16);
  d.skip = g.connect(d.clone, d.add, s, skip_capacity);
  d.delay_add = g.connect(d.delay, d.add, s, 16);
  d.add_out = g.connect(d.add, d.out, s, 16);
  return d;
}

// 20 Conv2D/ReLU stages over an x*x map with nine Clones feeding fifteen
// skips into fourteen Adds, then Flatten -> Dense -> Sigmoid -> Output.
// Profiling {Conv2D, ReLU, Clone, Add, Dense} measures 20 + 20 + 9 + 29 + 1
// = 79 channels.
inline DataflowGraph seventy_nine_signal_net(int x = 6, int kernel = 3) {
  DataflowGraph g;
  const Shape map{x, x, 1};
  NodeId cur = g.add_node(LayerKind::input());
  std::deque<NodeId> skips;  // pending clone outputs, oldest first
  for (int s = 0; s < 20; ++s) {
    if (s >= 6) {
      const int arity = s == 6 ? 3 : 2;
      NodeId add = g.add_node(LayerKind::add(arity), s);
      g.connect(cur, add, map);
      for (int k = 1; k < arity; ++k) {
        g.connect(skips.front(), add, map);
        skips.pop_front();
      }
      cur = add;
    }
    NodeId conv = g.add_node(LayerKind::conv2d(kernel, 1), s);
    g.connect(cur, conv, map);
    NodeId relu = g.add_node(LayerKind::relu(), s);
    g.connect(conv, relu, map);
    cur = relu;
    if (s <= 8) {
      const int fanout = s <= 5 ? 3 : 2;
      NodeId clone = g.add_node(LayerKind::clone(fanout), s);
      g.connect(relu, clone, map);
      cur = clone;
      for (int k = 1; k < fanout; ++k) skips.push_back(clone);
    }
  }
  NodeId flat = g.add_node(LayerKind::flatten());
  g.connect(cur, flat, map);
  NodeId dense = g.add_node(LayerKind::dense(5));
  g.connect(flat, dense, {1, 1, x * x});
  NodeId sig = g.add_node(LayerKind::sigmoid());
  g.connect(dense, sig, {1, 1, 5});
  NodeId out = g.add_node(LayerKind::output());
  g.connect(sig, out, {1, 1, 5});
  return g;
}

}  // namespace streamprof::testing
