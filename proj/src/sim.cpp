#include "streamprof/sim.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace streamprof {

namespace {

constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max() / 4;
constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min() / 4;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

std::string_view to_string(TerminationStatus s) {
  switch (s) {
    case TerminationStatus::Completed: return "Completed";
    case TerminationStatus::Deadlock: return "Deadlock";
    case TerminationStatus::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

std::set<NodeId> DeadlockReport::core_nodes() const {
  std::set<NodeId> out;
  for (const auto& b : core) out.insert(b.node);
  return out;
}

std::map<ChannelId, std::uint64_t> SimResult::decoded_max() const {
  std::map<ChannelId, std::uint64_t> out;
  for (const auto& inf : trace.decoded)
    for (const auto& [c, v] : inf) out[c] = std::max(out[c], v);
  return out;
}

std::map<ChannelId, std::uint64_t> SimResult::oracle() const {
  std::map<ChannelId, std::uint64_t> out;
  for (const auto& [c, s] : stats) out[c] = static_cast<std::uint64_t>(s.oracle_max);
  return out;
}

ActorTiming actor_timing(const LayerParams& params, const Shape& in) {
  const auto& k = params.layer_kind;
  const std::int64_t rf = params.reuse_factor;
  ActorTiming t;
  switch (k.type) {
    case LayerType::Conv2D:
      if (in.h < k.kernel || in.w < k.kernel)
        throw SimError("Conv2D kernel " + std::to_string(k.kernel) +
                       " does not fit a " + std::to_string(in.h) + "x" +
                       std::to_string(in.w) + " map");
      t.tokens_consumed_per_firing = {1};
      t.tokens_produced_per_firing = {1};
      t.first_output_latency = std::int64_t{k.kernel - 1} * in.w + k.kernel;
      t.output_initiation_interval = rf;
      t.elements_produced = k.filters;
      break;
    case LayerType::Dense:
      t.tokens_consumed_per_firing = {in.tokens()};
      t.tokens_produced_per_firing = {1};
      t.consume_cycles = in.elements();
      t.first_output_latency = in.elements();
      t.output_initiation_interval = rf;
      t.elements_produced = k.out_units;
      break;
    case LayerType::Add:
    case LayerType::Concatenate:
      t.tokens_consumed_per_firing.assign(static_cast<std::size_t>(k.arity), 1);
      t.tokens_produced_per_firing = {1};
      t.elements_produced = k.type == LayerType::Add ? in.c : in.c * k.arity;
      break;
    case LayerType::Clone:
      t.tokens_consumed_per_firing = {1};
      t.tokens_produced_per_firing.assign(static_cast<std::size_t>(k.fanout), 1);
      t.elements_produced = in.c;
      break;
    case LayerType::Reshape:
    case LayerType::Flatten: {
      Shape out;
      try {
        out = infer_output_shape(k, {in});
      } catch (const GraphError& e) {
        throw SimError(e.what());
      }
      t.tokens_consumed_per_firing = {in.tokens()};
      t.tokens_produced_per_firing = {out.tokens()};
      t.elements_produced = out.elements();
      break;
    }
    case LayerType::ReLU:
    case LayerType::Sigmoid:
    case LayerType::Output:
      t.tokens_consumed_per_firing = {1};
      t.tokens_produced_per_firing = {k.type == LayerType::Output ? 0 : 1};
      t.elements_produced = in.c;
      break;
    case LayerType::Input:
    case LayerType::ProfileSeed:
    case LayerType::ProfileCollector:
      t.tokens_produced_per_firing = {1};
      break;
  }
  return t;
}

// ---------------------------------------------------------------------------

struct Engine::Impl {
  using Token = std::vector<ProfilingValue>;

  struct Chan {
    ChannelId id = -1;
    bool pf = false;
    std::int64_t cap = 1;
    std::int64_t occ = 0;
    std::deque<Token> tokens;  // pf payloads
    std::uint64_t pushes = 0, pops = 0;
    std::int64_t oracle_max = 0, sample_max = 0;
    // Changes made in the push phase, applied at the cycle boundary.
    bool push_pending = false;
    Token push_token;
    int late_pops = 0;
    std::int64_t boundary_occ = 0;  // as of the previous cycle boundary

    [[nodiscard]] bool has_room() const { return occ < cap; }
    [[nodiscard]] std::int64_t visible() const { return occ - late_pops; }
  };

  enum class Behavior { Source, Sink, Stream, Rate, Dense, Seed, Collector };

  struct Actor {
    NodeId id = -1;
    LayerType type{};
    Behavior behavior{};
    bool profiled = false;
    std::vector<int> in, out;  // data channel slots
    std::vector<int> pf_in;    // aligned with data inputs (or the seed link)
    struct PfOut {
      int companion = -1;
      int shortcut = -1;
    };
    std::vector<PfOut> pf_out;
    std::int64_t n_in = 1, n_out = 1;  // tokens per inference per port
    std::int64_t c_in = 1, c_out = 1;  // elements per token
    std::int64_t window = 1;
    std::int64_t ii = 1;
    std::int64_t dense_in_elems = 1;

    std::int64_t popped = 0;    // per input for Stream (all equal), else total
    std::int64_t computed = 0;  // outputs scheduled
    std::int64_t pushed = 0;    // outputs pushed (per output)
    std::deque<std::int64_t> pending;  // ready cycle per scheduled output
    std::int64_t last_fire = kNever;
    std::int64_t dense_first_pop = 0;
    std::vector<std::vector<std::int64_t>> inf_max;  // [inference][input]
    std::int64_t data_done = 0;   // inferences whose last data token left
    std::int64_t pf_emitted = 0;  // inferences whose pf token left
    std::vector<std::vector<Token>> received;  // collector: [input][inference]
  };

  const DataflowGraph& graph;
  const LabelList labels;
  const SimConfig cfg;
  const std::int64_t K;
  const bool has_pf;
  std::vector<Chan> chans;
  std::map<ChannelId, int> slot_of;
  std::vector<Actor> actors;
  std::uint64_t t = 0;
  bool progressed = true;
  bool timers = false;
  std::optional<Termination> done;
  std::vector<OccupancySample> samples;
  std::set<ChannelId> overflowed;
  int collector = -1;

  Impl(const DataflowGraph& g, const LabelList& l, const SimConfig& c)
      : graph(g),
        labels(l),
        cfg(c),
        K(c.inference_count),
        has_pf(g.is_instrumented()) {
    for (const auto& [id, ch] : g.channels) {
      Chan s;
      s.id = id;
      s.pf = ch.is_profiling;
      s.cap = !s.pf ? ch.capacity
                    : (cfg.interference_enabled ? cfg.pf_channel_capacity : kUnbounded);
      slot_of[id] = static_cast<int>(chans.size());
      chans.push_back(std::move(s));
    }
    for (const auto& [id, n] : g.nodes) actors.push_back(make_actor(n));
  }

  Actor make_actor(const LayerNode& n) {
    Actor a;
    a.id = n.id;
    a.type = n.type();
    a.profiled = n.profiled;
    for (ChannelId c : graph.data_inputs(n.id)) a.in.push_back(slot_of.at(c));
    for (ChannelId c : graph.data_outputs(n.id)) a.out.push_back(slot_of.at(c));

    auto shape_of = [&](int slot) { return graph.channel(chans[slot].id).element_shape; };
    switch (a.type) {
      case LayerType::Input: a.behavior = Behavior::Source; break;
      case LayerType::Output: a.behavior = Behavior::Sink; break;
      case LayerType::Dense: a.behavior = Behavior::Dense; break;
      case LayerType::Reshape:
      case LayerType::Flatten: a.behavior = Behavior::Rate; break;
      case LayerType::ProfileSeed: a.behavior = Behavior::Seed; break;
      case LayerType::ProfileCollector: a.behavior = Behavior::Collector; break;
      default: a.behavior = Behavior::Stream; break;
    }
    if (!a.in.empty()) {
      Shape s = shape_of(a.in[0]);
      a.n_in = s.tokens();
      a.c_in = s.c;
      const auto timing = actor_timing(n.params, s);
      a.ii = timing.output_initiation_interval;
      if (a.type == LayerType::Conv2D) a.window = timing.first_output_latency;
      a.dense_in_elems = timing.consume_cycles;
    }
    if (!a.out.empty()) {
      Shape s = shape_of(a.out[0]);
      a.n_out = s.tokens();
      a.c_out = s.c;
    }
    if (a.behavior == Behavior::Stream && a.n_in != a.n_out)
      throw SimError("streaming layer " + std::to_string(n.id) +
                     " changes its token count");
    for (int s : a.in)
      if (shape_of(s).tokens() != a.n_in)
        throw SimError("inputs of node " + std::to_string(n.id) +
                       " stream differing token counts");
    a.inf_max.assign(static_cast<std::size_t>(K),
                     std::vector<std::int64_t>(a.in.size(), 0));

    if (has_pf && a.behavior != Behavior::Seed && a.behavior != Behavior::Collector) {
      const auto ports = pf_ports(graph, n.id);
      for (ChannelId c : ports.inputs) a.pf_in.push_back(slot_of.at(c));
      for (const auto& o : ports.outputs)
        a.pf_out.push_back({slot_of.at(o.companion),
                            o.shortcut >= 0 ? slot_of.at(o.shortcut) : -1});
    }
    if (a.behavior == Behavior::Seed)
      for (ChannelId c : n.output_channel_ids) a.pf_out.push_back({slot_of.at(c), -1});
    if (a.behavior == Behavior::Collector) {
      collector = static_cast<int>(actors.size());
      for (ChannelId c : collector_inputs(graph, n.id)) a.pf_in.push_back(slot_of.at(c));
      a.received.resize(a.pf_in.size());
    }
    return a;
  }

  // ---- phase 1 ------------------------------------------------------------

  void pop_data(Actor& a, std::size_t input, std::int64_t inference) {
    Chan& ch = chans[a.in[input]];
    const std::int64_t sample = ch.occ;
    ch.sample_max = std::max(ch.sample_max, sample);
    auto& m = a.inf_max[static_cast<std::size_t>(inference)][input];
    m = std::max(m, sample);
    --ch.occ;
    ++ch.pops;
    progressed = true;
  }

  void pop_phase(Actor& a) {
    const auto now = static_cast<std::int64_t>(t);
    switch (a.behavior) {
      case Behavior::Source:
      case Behavior::Seed: return;
      case Behavior::Sink:
        if (a.popped < K * a.n_in && chans[a.in[0]].occ >= 1) {
          pop_data(a, 0, a.popped / a.n_in);
          ++a.popped;
        }
        return;
      case Behavior::Collector:
        for (std::size_t i = 0; i < a.pf_in.size(); ++i) {
          Chan& ch = chans[a.pf_in[i]];
          if (ch.occ >= 1) {
            a.received[i].push_back(std::move(ch.tokens.front()));
            ch.tokens.pop_front();
            --ch.occ;
            ++ch.pops;
            progressed = true;
          }
        }
        return;
      case Behavior::Stream: {
        if (a.popped >= K * a.n_in) return;
        if (a.pending.size() >= 2) return;
        if (now - a.last_fire < a.ii) {
          timers = true;
          return;
        }
        const std::int64_t j = a.popped % a.n_in;
        const std::int64_t need = std::min(j + a.window - 1, a.n_in - 1) - j + 1;
        for (int s : a.in)
          if (chans[s].occ < need) return;
        const std::int64_t inference = a.popped / a.n_in;
        for (std::size_t i = 0; i < a.in.size(); ++i) pop_data(a, i, inference);
        ++a.popped;
        ++a.computed;
        a.last_fire = now;
        a.pending.push_back(now + 1);
        return;
      }
      case Behavior::Rate: {
        auto need_of = [&](std::int64_t jo) {
          return ceil_div((jo + 1) * a.c_out, a.c_in) - 1;
        };
        const std::int64_t total_out = K * a.n_out;
        if (a.popped < K * a.n_in && a.computed < total_out) {
          const std::int64_t ki = a.popped / a.n_in, i = a.popped % a.n_in;
          const std::int64_t ko = a.computed / a.n_out, jo = a.computed % a.n_out;
          if (ki == ko && i <= need_of(jo) && chans[a.in[0]].occ >= 1) {
            pop_data(a, 0, ki);
            ++a.popped;
          }
        }
        if (a.computed < total_out && a.pending.size() < 2) {
          const std::int64_t ko = a.computed / a.n_out, jo = a.computed % a.n_out;
          if (a.popped >= ko * a.n_in + need_of(jo) + 1) {
            if (now - a.last_fire < 1) {
              timers = true;
            } else {
              ++a.computed;
              a.last_fire = now;
              a.pending.push_back(now + 1);
              progressed = true;
            }
          }
        }
        return;
      }
      case Behavior::Dense: {
        if (a.popped >= K * a.n_in) return;
        const std::int64_t k = a.popped / a.n_in;
        // One inference at a time: the previous one must have drained.
        if (a.pushed < k * a.n_out) return;
        if (chans[a.in[0]].occ < 1) return;
        if (a.popped % a.n_in == 0) a.dense_first_pop = now;
        pop_data(a, 0, k);
        ++a.popped;
        if (a.popped % a.n_in == 0) {
          const std::int64_t consume_done =
              std::max(now, a.dense_first_pop + a.dense_in_elems - 1);
          for (std::int64_t o = 0; o < a.n_out; ++o)
            a.pending.push_back(consume_done + 1 + ((o + 1) * a.c_out - 1) * a.ii);
          a.computed += a.n_out;
        }
        return;
      }
    }
  }

  // ---- phase 2 ------------------------------------------------------------

  void push(int slot, Token token = {}) {
    Chan& ch = chans[slot];
    ch.push_pending = true;
    ch.push_token = std::move(token);
    progressed = true;
  }

  bool pf_inputs_ready(const Actor& a) const {
    return std::all_of(a.pf_in.begin(), a.pf_in.end(),
                       [&](int s) { return chans[s].visible() >= 1; });
  }

  bool pf_outputs_room(const Actor& a) const {
    for (const auto& o : a.pf_out) {
      if (!chans[o.companion].has_room()) return false;
      if (o.shortcut >= 0 && !chans[o.shortcut].has_room()) return false;
    }
    return true;
  }

  // Reads one token from every pf input, applies the stream rule and writes
  // the results. Measurements cover the inference `own_inference`, or none.
  void emit_pf(Actor& a, std::optional<std::int64_t> own_inference) {
    std::vector<Token> in;
    for (int s : a.pf_in) {
      Chan& ch = chans[s];
      in.push_back(ch.tokens[static_cast<std::size_t>(ch.late_pops)]);
      ++ch.late_pops;
    }
    Token own;
    if (own_inference) {
      const auto& m = a.inf_max[static_cast<std::size_t>(*own_inference)];
      for (std::size_t i = 0; i < a.in.size(); ++i) {
        auto w = saturate_or_wrap(static_cast<std::uint64_t>(m[i]), labels.pf_bitwidth);
        if (w.overflowed) overflowed.insert(chans[a.in[i]].id);
        own.push_back(w.value);
      }
    }
    PfPorts ports;
    for (const auto& o : a.pf_out)
      ports.outputs.push_back({chans[o.companion].id,
                               o.shortcut >= 0 ? chans[o.shortcut].id : -1});
    auto outs =
        apply_pf_rule(ports, in, own, ProfilingValue::placeholder(labels.pf_bitwidth));
    for (auto& [cid, tok] : outs) push(slot_of.at(cid), std::move(tok));
  }

  void push_phase(Actor& a) {
    const auto now = static_cast<std::int64_t>(t);
    switch (a.behavior) {
      case Behavior::Sink: break;
      case Behavior::Collector: return;
      case Behavior::Seed:
        if (a.pushed < K && chans[a.pf_out[0].companion].has_room()) {
          push(a.pf_out[0].companion);
          ++a.pushed;
        }
        return;
      case Behavior::Source:
        if (a.pushed < K * a.n_out &&
            std::all_of(a.out.begin(), a.out.end(),
                        [&](int s) { return chans[s].has_room(); })) {
          for (int s : a.out) push(s);
          ++a.pushed;
          if (a.pushed % a.n_out == 0) ++a.data_done;
        }
        break;
      default:
        if (!a.pending.empty()) {
          if (a.pending.front() > now) {
            timers = true;
          } else {
            const bool room = std::all_of(a.out.begin(), a.out.end(),
                                          [&](int s) { return chans[s].has_room(); });
            const bool last = (a.pushed + 1) % a.n_out == 0;
            const bool coupled = has_pf && a.profiled && cfg.interference_enabled && last;
            if (room && (!coupled || (pf_inputs_ready(a) && pf_outputs_room(a)))) {
              for (int s : a.out) push(s);
              a.pending.pop_front();
              ++a.pushed;
              if (last) ++a.data_done;
              if (coupled) {
                emit_pf(a, a.pf_emitted);
                ++a.pf_emitted;
                return;
              }
            }
          }
        }
        break;
    }
    if (!has_pf || a.pf_in.empty()) return;
    if (a.profiled) {
      if (a.pf_emitted < a.data_done && pf_inputs_ready(a) && pf_outputs_room(a)) {
        emit_pf(a, a.pf_emitted);
        ++a.pf_emitted;
      }
    } else if (a.pf_emitted < K && pf_inputs_ready(a) && pf_outputs_room(a)) {
      emit_pf(a, std::nullopt);
      ++a.pf_emitted;
    }
  }

  // ---- cycle --------------------------------------------------------------

  bool is_complete() const {
    for (const auto& a : actors) {
      if (a.behavior == Behavior::Sink && a.popped < K * a.n_in) return false;
      if (a.behavior == Behavior::Collector)
        for (const auto& r : a.received)
          if (static_cast<std::int64_t>(r.size()) < K) return false;
    }
    return true;
  }

  bool step() {
    if (done) return false;
    if (is_complete()) {
      done = Termination{TerminationStatus::Completed, t};
      return false;
    }
    if (t >= cfg.max_cycles) {
      done = Termination{TerminationStatus::BudgetExhausted, t};
      return false;
    }
    progressed = false;
    timers = false;
    for (auto& a : actors) pop_phase(a);
    for (auto& a : actors) push_phase(a);
    for (auto& ch : chans) {
      for (; ch.late_pops > 0; --ch.late_pops) {
        ch.tokens.pop_front();
        --ch.occ;
        ++ch.pops;
      }
      if (ch.push_pending) {
        ++ch.occ;
        ++ch.pushes;
        if (ch.pf) ch.tokens.push_back(std::move(ch.push_token));
        ch.push_pending = false;
      }
      ch.oracle_max = std::max(ch.oracle_max, ch.occ);
      if (cfg.trace_sampling && !ch.pf && ch.occ != ch.boundary_occ)
        samples.push_back({ch.id, t, ch.occ});
      ch.boundary_occ = ch.occ;
    }
    ++t;
    if (is_complete()) {
      done = Termination{TerminationStatus::Completed, t};
      return false;
    }
    if (!progressed && !timers) {
      done = Termination{TerminationStatus::Deadlock, t - 1};
      return false;
    }
    return true;
  }

  // ---- deadlock analysis ---------------------------------------------------

  std::optional<BlockedActor> blocked_reason(const Actor& a, bool& core) const {
    core = false;
    auto first_full = [&](const std::vector<int>& outs) -> int {
      for (int s : outs)
        if (!chans[s].has_room()) return s;
      return -1;
    };
    auto any_room_besides = [&](const std::vector<int>& outs, int skip) {
      return std::any_of(outs.begin(), outs.end(),
                         [&](int s) { return s != skip && chans[s].has_room(); });
    };
    auto starved = [&](int s, std::int64_t need) {
      BlockedActor b{a.id, false, chans[s].id};
      core = std::any_of(a.in.begin(), a.in.end(),
                         [&](int o) { return o != s && chans[o].occ >= 1; });
      (void)need;
      return b;
    };

    const auto now = static_cast<std::int64_t>(t);
    switch (a.behavior) {
      case Behavior::Seed:
        if (a.pushed < K && !chans[a.pf_out[0].companion].has_room())
          return BlockedActor{a.id, true, chans[a.pf_out[0].companion].id};
        return std::nullopt;
      case Behavior::Collector:
        for (std::size_t i = 0; i < a.pf_in.size(); ++i)
          if (static_cast<std::int64_t>(a.received[i].size()) < K)
            return BlockedActor{a.id, false, chans[a.pf_in[i]].id};
        return std::nullopt;
      case Behavior::Source:
        if (a.pushed < K * a.n_out) {
          int s = first_full(a.out);
          if (s >= 0) {
            core = any_room_besides(a.out, s);
            return BlockedActor{a.id, true, chans[s].id};
          }
        }
        break;
      case Behavior::Sink:
        if (a.popped < K * a.n_in) return starved(a.in[0], 1);
        break;
      default: {
        if (!a.pending.empty() && a.pending.front() <= now) {
          int s = first_full(a.out);
          if (s >= 0) {
            core = any_room_besides(a.out, s);
            return BlockedActor{a.id, true, chans[s].id};
          }
        }
        const std::int64_t total_in = K * a.n_in;
        if (a.popped < total_in && a.pending.size() < 2) {
          std::int64_t need = 1;
          if (a.behavior == Behavior::Stream) {
            const std::int64_t j = a.popped % a.n_in;
            need = std::min(j + a.window - 1, a.n_in - 1) - j + 1;
          }
          for (int s : a.in)
            if (chans[s].occ < need) return starved(s, need);
        }
        break;
      }
    }
    if (has_pf && !a.pf_in.empty()) {
      const bool owes = a.profiled ? a.pf_emitted < a.data_done : a.pf_emitted < K;
      if (owes || (a.profiled && cfg.interference_enabled && !a.pending.empty())) {
        for (int s : a.pf_in)
          if (chans[s].visible() < 1) return BlockedActor{a.id, false, chans[s].id};
        for (const auto& o : a.pf_out)
          if (!chans[o.companion].has_room())
            return BlockedActor{a.id, true, chans[o.companion].id};
      }
    }
    return std::nullopt;
  }

  std::optional<DeadlockReport> detect_deadlock() const {
    if (is_complete()) return std::nullopt;
    if (!done || done->status != TerminationStatus::Deadlock) {
      if (progressed || timers) return std::nullopt;
    }
    DeadlockReport r;
    for (const auto& a : actors) {
      bool core = false;
      if (auto b = blocked_reason(a, core)) {
        r.blocked.push_back(*b);
        if (core) r.core.push_back(*b);
      }
    }
    if (r.core.empty()) r.core = r.blocked;
    return r;
  }

  SimResult result() const {
    SimResult res;
    auto& tr = res.trace;
    tr.samples = samples;
    tr.termination = done.value_or(Termination{TerminationStatus::BudgetExhausted, t});
    tr.cycles = t;
    tr.overflowed = overflowed;
    if (tr.termination.status == TerminationStatus::Deadlock) tr.deadlock = detect_deadlock();

    std::set<ChannelId> measured;
    for (const auto& l : labels.labels)
      if (!l.is_placeholder) measured.insert(*l.channel_id);

    if (collector >= 0) {
      const auto& c = actors[static_cast<std::size_t>(collector)];
      std::size_t complete_inferences = std::numeric_limits<std::size_t>::max();
      for (const auto& r : c.received) complete_inferences = std::min(complete_inferences, r.size());
      if (c.received.empty()) complete_inferences = 0;
      for (std::size_t k = 0; k < complete_inferences; ++k) {
        ProfilingToken tok;
        for (const auto& r : c.received)
          tok.values.insert(tok.values.end(), r[k].begin(), r[k].end());
        tr.decoded.push_back(decode_profile_stream(tok, labels));
        tr.tokens.push_back(std::move(tok));
      }
    }
    const auto decoded = res.decoded_max();
    for (const auto& ch : chans) {
      if (ch.pf) continue;
      FifoStats s;
      s.channel_id = ch.id;
      s.pushes = ch.pushes;
      s.pops = ch.pops;
      s.oracle_max = ch.oracle_max;
      s.profiled_max = ch.sample_max;
      s.final_occupancy = ch.occ;
      s.measured = measured.count(ch.id) != 0;
      if (auto it = decoded.find(ch.id); it != decoded.end()) s.decoded = it->second;
      s.overflowed = overflowed.count(ch.id) != 0;
      res.stats[ch.id] = s;
    }
    return res;
  }
};

Engine::Engine(const DataflowGraph& graph, const LabelList& labels, const SimConfig& config)
    : impl_(std::make_unique<Impl>(graph, labels, config)) {}

Engine::~Engine() = default;

bool Engine::step() { return impl_->step(); }

void Engine::run() {
  while (impl_->step()) {
  }
}

bool Engine::terminated() const { return impl_->done.has_value(); }
bool Engine::complete() const { return impl_->is_complete(); }
std::uint64_t Engine::cycle() const { return impl_->t; }

std::int64_t Engine::occupancy(ChannelId c) const {
  return impl_->chans[static_cast<std::size_t>(impl_->slot_of.at(c))].occ;
}

std::optional<DeadlockReport> Engine::detect_deadlock() const {
  return impl_->detect_deadlock();
}

SimResult Engine::result() const { return impl_->result(); }

SimResult run_simulation(const DataflowGraph& graph, const LabelList& labels,
                         const SimConfig& config) {
  if (config.max_cycles < 1) throw SimError("max_cycles must be >= 1");
  if (config.inference_count < 1) throw SimError("inference_count must be >= 1");
  if (config.pf_channel_capacity < 1) throw SimError("pf_channel_capacity must be >= 1");
  if (auto report = validate(graph); !report.empty())
    throw SimError("graph does not validate: " + report.front().message);
  if (graph.is_instrumented()) {
    auto expected = compute_labels(graph, labels.pf_bitwidth);
    if (!(expected == labels)) throw SimError("label list does not match the graph");
  } else if (!labels.labels.empty()) {
    throw SimError("labels supplied for an uninstrumented graph");
  }
  Engine engine(graph, labels, config);
  engine.run();
  return engine.result();
}

}  // namespace streamprof
