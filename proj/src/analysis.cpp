#include "streamprof/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace streamprof {

DiffStats compare(const std::map<ChannelId, std::uint64_t>& oracle,
                  const std::map<ChannelId, std::uint64_t>& profiled) {
  DiffStats d;
  if (oracle.size() != profiled.size())
    throw AnalysisError("compare: key sets differ in size");
  std::int64_t sum = 0;
  for (const auto& [c, o] : oracle) {
    auto it = profiled.find(c);
    if (it == profiled.end())
      throw AnalysisError("compare: channel " + std::to_string(c) + " missing from profiled");
    const auto diff = static_cast<std::int64_t>(o) - static_cast<std::int64_t>(it->second);
    d.per_channel_diff[c] = diff;
    sum += std::llabs(diff);
    d.max_abs_diff = std::max<std::int64_t>(d.max_abs_diff, std::llabs(diff));
  }
  d.num_channels = oracle.size();
  if (d.num_channels)
    d.avg_abs_diff = static_cast<double>(sum) / static_cast<double>(d.num_channels);
  return d;
}

std::string_view to_string(CapacityMode m) {
  return m == CapacityMode::Default ? "hls4ml_default" : "deep";
}

CapacityMode capacity_mode_from_string(std::string_view s) {
  if (s == "hls4ml_default") return CapacityMode::Default;
  if (s == "deep") return CapacityMode::Deep;
  throw std::invalid_argument("unknown capacity mode '" + std::string(s) + "'");
}

DataflowGraph with_capacity_mode(const DataflowGraph& graph, CapacityMode mode,
                                 int inference_count) {
  DataflowGraph g = graph;
  if (mode == CapacityMode::Deep)
    for (auto& [id, ch] : g.channels)
      if (!ch.is_profiling)
        ch.capacity = std::max<std::int64_t>(1, ch.element_shape.tokens() * inference_count);
  return g;
}

Summary summarize(std::vector<std::int64_t> v) {
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? static_cast<double>(v[m])
                          : (static_cast<double>(v[m - 1]) + static_cast<double>(v[m])) / 2.0;
  return s;
}

RinnSpec with_parameter(const RinnSpec& base, const std::string& parameter,
                        const nlohmann::json& value) {
  RinnSpec s = base;
  try {
    if (parameter == "kernel") s.kernel = value.get<int>();
    else if (parameter == "filters") s.filters = value.get<int>();
    else if (parameter == "reuse_factor") s.reuse_factor = value.get<int>();
    else if (parameter == "data_bitwidth") s.data_bitwidth = value.get<Bitwidth>();
    else if (parameter == "density") s.connection_density = value.get<double>();
    else if (parameter == "pattern") s.pattern = connection_pattern_from_string(value.get<std::string>());
    else if (parameter == "num_hidden_layers") s.num_hidden_layers = value.get<int>();
    else throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad value " + value.dump() + " for " + parameter + ": " +
                                e.what());
  } catch (const GraphError& e) {
    throw std::invalid_argument("bad value " + value.dump() + " for " + parameter + ": " +
                                e.what());
  }
  return s;
}

std::map<std::string, Summary> group_profiled(const DataflowGraph& graph,
                                              const SimResult& result) {
  std::map<std::string, std::vector<std::int64_t>> groups;
  for (const auto& [c, s] : result.stats) {
    if (!s.decoded) continue;
    const auto& consumer = graph.node(graph.channel(c).consumer);
    groups[std::string(to_string(consumer.type()))].push_back(
        static_cast<std::int64_t>(*s.decoded));
  }
  std::map<std::string, Summary> out;
  for (auto& [k, v] : groups) out[k] = summarize(std::move(v));
  return out;
}

namespace {

SweepPoint sweep_point(const RinnSpec& spec, const nlohmann::json& value,
                       const SimConfig& config, const SweepOptions& options) {
  SweepPoint p;
  p.value = value;
  const auto plain = with_capacity_mode(generate_rinn(spec), options.capacity_mode,
                                        config.inference_count);
  const auto inst = inject_profiling(plain, options.pf_bitwidth, options.kinds);
  const auto result = run_simulation(inst.graph, inst.labels, config);
  p.status = result.trace.termination.status;
  p.cycles = result.trace.cycles;
  p.groups = group_profiled(inst.graph, result);
  return p;
}

}  // namespace

SweepResult run_sweep(const RinnSpec& base, const std::string& parameter,
                      const std::vector<nlohmann::json>& values, const SimConfig& config,
                      const SweepOptions& options) {
  SweepResult r;
  r.parameter = parameter;
  r.points.resize(values.size());
  std::vector<RinnSpec> specs;
  for (const auto& v : values) specs.push_back(with_parameter(base, parameter, v));

  std::atomic<std::size_t> next{0};
  std::mutex m;
  std::exception_ptr failure;
  std::string failed_value;
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        r.points[i] = sweep_point(specs[i], values[i], config, options);
      } catch (const std::exception& e) {
        std::lock_guard lock(m);
        if (!failure) {
          failure = std::current_exception();
          failed_value = parameter + "=" + values[i].dump() + ": " + e.what();
        }
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.workers,
                                                     static_cast<unsigned>(values.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) throw AnalysisError("sweep failed at " + failed_value);
  return r;
}

std::optional<int> layer_span(const DataflowGraph& graph, ChannelId c) {
  const auto& ch = graph.channel(c);
  const int a = graph.node(ch.producer).layer_index;
  const int b = graph.node(ch.consumer).layer_index;
  if (a < 0 || b < 0) return std::nullopt;
  return b - a;
}

DepthRecommendation recommend_depths(const DataflowGraph& graph, const SimResult& result,
                                     const DepthPolicy& policy) {
  if (result.trace.termination.status != TerminationStatus::Completed)
    throw AnalysisError(std::string("recommend_depths needs a completed run, got ") +
                        std::string(to_string(result.trace.termination.status)));
  DepthRecommendation rec;
  auto scaled = [](double m, std::int64_t v) {
    return static_cast<std::int64_t>(std::ceil(m * static_cast<double>(v) - 1e-9));
  };
  int n = 0;
  for (const auto& [id, node] : graph.nodes) n = std::max(n, node.layer_index + 1);
  const int long_span = (n + 1) / 2;

  for (const auto& [c, s] : result.stats) {
    std::int64_t d = s.oracle_max;
    if (const auto* h = std::get_if<Headroom>(&policy)) {
      d = scaled(h->multiplier, d);
    } else if (const auto* p = std::get_if<PatternAware>(&policy)) {
      auto span = layer_span(graph, c);
      if (span && *span >= long_span) d = scaled(p->multiplier, d);
    }
    rec.depth[c] = std::max<std::int64_t>({d, s.oracle_max, 1});
  }
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Exact>) {
          rec.policy = "Exact";
        } else {
          rec.policy = std::is_same_v<P, Headroom> ? "Headroom" : "PatternAware";
          rec.headroom = p.multiplier;
        }
      },
      policy);
  return rec;
}

OverheadReport overhead_accounting(const DataflowGraph& plain,
                                   const DataflowGraph& instrumented, int pf_bitwidth) {
  auto data_nodes = [](const DataflowGraph& g) {
    std::set<NodeId> ids;
    for (const auto& [id, n] : g.nodes)
      if (n.type() != LayerType::ProfileSeed && n.type() != LayerType::ProfileCollector)
        ids.insert(id);
    return ids;
  };
  if (data_nodes(plain) != data_nodes(instrumented))
    throw AnalysisError("overhead_accounting: graphs have different data nodes");
  OverheadReport r;
  if (!instrumented.is_instrumented()) return r;

  const auto tokens = evaluate_pf_tokens(instrumented);
  for (const auto& [c, slots] : tokens) {
    ++r.pf_channels;
    r.total_pf_bits += static_cast<std::uint64_t>(slots.size()) * pf_bitwidth;
  }
  for (const auto& [id, n] : instrumented.nodes)
    if (n.profiled) r.appended_values[id] = instrumented.data_inputs(id).size();
  const NodeId collector = find_collector(instrumented);
  for (ChannelId c : collector_inputs(instrumented, collector))
    for (const auto& s : tokens.at(c)) {
      r.collector_token_bits += pf_bitwidth;
      if (!s.placeholder) ++r.measured_signals;
    }
  return r;
}

const std::vector<TableRow>& table1_rows() {
  static const std::vector<TableRow> rows{
      {"add", 16, {2}, {1}, {2}},
      {"add", 16, {2}, {2}, {7}},
      {"add", 16, {3}, {1}, {1}},
      {"add", 16, {4}, {3}, {1}},
      {"add", 16, {10, 10, 10}, {10, 11, 12}, {1, 1, 1}},
      {"add", 16, {11, 12, 13, 14}, {11, 12, 9, 13}, {1, 1, 1, 1}},
      {"add", 16, {16}, {15}, {10}},
      {"add", 16, {16}, {16}, {1}},
      {"conv2d", 36, {10}, {10}, {1}},
      {"conv2d", 36, {10}, {12}, {7}},
      {"conv2d", 36, {13}, {9}, {2}},
      {"conv2d", 36, {13}, {12}, {5}},
      {"conv2d", 36, {13}, {13}, {1}},
      {"conv2d", 36, {15}, {15}, {3}},
      {"conv2d", 36, {26}, {29}, {1}},
      {"clone", 16, {2}, {1}, {9}},
      {"relu", 16, {2}, {1}, {20}},
      {"dense", 1, {1}, {1}, {1}},
  };
  return rows;
}

TableChannels expand_table(const std::vector<TableRow>& rows) {
  TableChannels t;
  ChannelId next = 0;
  for (const auto& row : rows) {
    if (row.profiled.size() != row.cosim.size() || row.signals.size() != row.cosim.size())
      throw AnalysisError("table row '" + row.layer + "' has ragged sub-columns");
    for (std::size_t k = 0; k < row.cosim.size(); ++k)
      for (std::int64_t i = 0; i < row.signals[k]; ++i) {
        t.cosim[next] = static_cast<std::uint64_t>(row.cosim[k]);
        t.profiled[next] = static_cast<std::uint64_t>(row.profiled[k]);
        t.layer[next] = row.layer;
        ++next;
      }
  }
  return t;
}

}  // namespace streamprof
