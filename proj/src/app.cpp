#include "streamprof/app.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace streamprof::app {

int exit_code(TerminationStatus s) {
  switch (s) {
    case TerminationStatus::Completed: return kExitCompleted;
    case TerminationStatus::Deadlock: return kExitDeadlock;
    case TerminationStatus::BudgetExhausted: return kExitBudget;
  }
  return kExitFailure;
}

// ---- config -----------------------------------------------------------------

namespace {

[[noreturn]] void bad(const std::string& m) { throw ConfigError(m); }

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where + " must be a JSON object");
}

template <class T>
T get(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    bad(where + ": " + e.what());
  }
}

int positive_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where + " must be an integer");
  auto x = v.get<std::int64_t>();
  if (x < 1 || x > std::numeric_limits<int>::max()) bad(where + " must be >= 1");
  return static_cast<int>(x);
}

ProfilingSection parse_profiling(const json& j) {
  require_object(j, "profiling");
  ProfilingSection p;
  for (const auto& [k, v] : j.items()) {
    if (k == "pf_bitwidth") {
      p.pf_bitwidth = positive_int(v, "profiling.pf_bitwidth");
      if (p.pf_bitwidth > 63) bad("profiling.pf_bitwidth must be <= 63");
    } else if (k == "profile_kinds") {
      if (!v.is_array()) bad("profiling.profile_kinds must be a list");
      p.kinds.clear();
      const auto allowed = all_profile_kinds();
      for (const auto& name : v) {
        LayerType t;
        try {
          t = layer_type_from_string(get<std::string>(name, "profiling.profile_kinds"));
        } catch (const GraphError& e) {
          bad(std::string("profiling.profile_kinds: ") + e.what());
        }
        if (!allowed.count(t))
          bad("profiling.profile_kinds: " + std::string(to_string(t)) + " cannot be profiled");
        p.kinds.insert(t);
      }
    } else if (k == "max_token_len") {
      if (v.is_null()) p.max_token_len.reset();
      else p.max_token_len = static_cast<std::size_t>(positive_int(v, "profiling.max_token_len"));
    } else {
      bad("profiling: unknown key '" + k + "'");
    }
  }
  return p;
}

SimSection parse_sim(const json& j) {
  require_object(j, "sim");
  SimSection s;
  for (const auto& [k, v] : j.items()) {
    const std::string where = "sim." + k;
    if (k == "max_cycles") {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) bad(where + " must be >= 1");
      s.sim.max_cycles = v.get<std::uint64_t>();
    } else if (k == "interference_enabled") {
      s.sim.interference_enabled = get<bool>(v, where);
    } else if (k == "pf_channel_capacity") {
      s.sim.pf_channel_capacity = positive_int(v, where);
    } else if (k == "inference_count") {
      s.sim.inference_count = positive_int(v, where);
    } else if (k == "seed") {
      if (v.is_null()) s.sim.seed.reset();
      else s.sim.seed = get<std::uint64_t>(v, where);
    } else if (k == "trace_sampling") {
      s.sim.trace_sampling = get<bool>(v, where);
    } else if (k == "capacity_mode") {
      try {
        s.capacity_mode = capacity_mode_from_string(get<std::string>(v, where));
      } catch (const std::invalid_argument& e) {
        bad(where + ": " + e.what());
      }
    } else if (k == "skip_capacity") {
      if (v.is_null()) s.skip_capacity.reset();
      else s.skip_capacity = positive_int(v, where);
    } else if (k == "capacity_overrides") {
      require_object(v, where);
      for (const auto& [cid, cap] : v.items()) {
        ChannelId id;
        try {
          std::size_t used = 0;
          id = std::stoi(cid, &used);
          if (used != cid.size() || id < 0) throw std::invalid_argument(cid);
        } catch (const std::exception&) {
          bad(where + ": key '" + cid + "' is not a channel id");
        }
        s.capacity_overrides[id] = positive_int(cap, where + "." + cid);
      }
    } else {
      bad("sim: unknown key '" + k + "'");
    }
  }
  return s;
}

SweepSection parse_sweep(const json& j) {
  require_object(j, "sweep");
  SweepSection s;
  for (const auto& [k, v] : j.items()) {
    const std::string where = "sweep." + k;
    if (k == "parameter") {
      s.parameter = get<std::string>(v, where);
      const auto& names = sweep_parameters();
      if (!s.parameter.empty() &&
          std::find(names.begin(), names.end(), s.parameter) == names.end())
        bad(where + ": unknown parameter '" + s.parameter + "'");
    } else if (k == "values") {
      if (!v.is_array()) bad(where + " must be a list");
      s.values.assign(v.begin(), v.end());
    } else if (k == "seed_range") {
      if (v.is_null()) continue;
      if (!v.is_array() || v.size() != 2) bad(where + " must be [first, last]");
      auto lo = get<std::uint64_t>(v[0], where), hi = get<std::uint64_t>(v[1], where);
      if (lo > hi) bad(where + " is empty");
      s.seed_range = std::pair{lo, hi};
    } else if (k == "workers") {
      s.workers = static_cast<unsigned>(positive_int(v, where));
    } else {
      bad("sweep: unknown key '" + k + "'");
    }
  }
  return s;
}

}  // namespace

Config config_from_json(const json& doc) {
  require_object(doc, "config");
  Config c;
  for (const auto& [k, v] : doc.items()) {
    if (k == "rinn") {
      try {
        c.rinn = v.get<RinnSpec>();
      } catch (const std::invalid_argument& e) {
        bad(e.what());
      }
    } else if (k == "profiling") {
      c.profiling = parse_profiling(v);
    } else if (k == "sim") {
      c.sim = parse_sim(v);
    } else if (k == "sweep") {
      c.sweep = parse_sweep(v);
    } else {
      bad("unknown config section '" + k + "'");
    }
  }
  try {
    check_rinn_spec(c.rinn);
    for (const auto& v : c.sweep.values) {
      RinnSpec s = with_parameter(c.rinn, c.sweep.parameter, v);
      check_rinn_spec(s);
    }
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
  if (!c.sweep.values.empty() && c.sweep.parameter.empty())
    bad("sweep.values given without sweep.parameter");
  return c;
}

json config_to_json(const Config& c) {
  json kinds = json::array();
  for (auto t : c.profiling.kinds) kinds.push_back(std::string(to_string(t)));
  json overrides = json::object();
  for (const auto& [id, cap] : c.sim.capacity_overrides) overrides[std::to_string(id)] = cap;
  json sweep = {{"parameter", c.sweep.parameter},
                {"values", c.sweep.values},
                {"workers", c.sweep.workers}};
  sweep["seed_range"] = c.sweep.seed_range
                            ? json::array({c.sweep.seed_range->first, c.sweep.seed_range->second})
                            : json(nullptr);
  return {
      {"rinn", c.rinn},
      {"profiling",
       {{"pf_bitwidth", c.profiling.pf_bitwidth},
        {"profile_kinds", kinds},
        {"max_token_len",
         c.profiling.max_token_len ? json(*c.profiling.max_token_len) : json(nullptr)}}},
      {"sim",
       {{"max_cycles", c.sim.sim.max_cycles},
        {"interference_enabled", c.sim.sim.interference_enabled},
        {"pf_channel_capacity", c.sim.sim.pf_channel_capacity},
        {"inference_count", c.sim.sim.inference_count},
        {"seed", c.sim.sim.seed ? json(*c.sim.sim.seed) : json(nullptr)},
        {"trace_sampling", c.sim.sim.trace_sampling},
        {"capacity_mode", std::string(to_string(c.sim.capacity_mode))},
        {"skip_capacity", c.sim.skip_capacity ? json(*c.sim.skip_capacity) : json(nullptr)},
        {"capacity_overrides", overrides}}},
      {"sweep", sweep},
  };
}

Config load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

// ---- preparation --------------------------------------------------------------

DataflowGraph apply_capacities(DataflowGraph g, const SimSection& s) {
  g = with_capacity_mode(g, s.capacity_mode, s.sim.inference_count);
  if (s.skip_capacity)
    for (auto& [id, ch] : g.channels) {
      auto span = layer_span(g, id);
      if (!ch.is_profiling && span && *span >= 2) ch.capacity = *s.skip_capacity;
    }
  for (const auto& [id, cap] : s.capacity_overrides) {
    auto it = g.channels.find(id);
    if (it == g.channels.end() || it->second.is_profiling)
      bad("sim.capacity_overrides: no data channel " + std::to_string(id));
    it->second.capacity = cap;
  }
  return g;
}

Prepared prepare(const Config& c) {
  Prepared p;
  try {
    p.plain = apply_capacities(generate_rinn(c.rinn), c.sim);
    p.inst = inject_profiling(p.plain, c.profiling.pf_bitwidth, c.profiling.kinds);
    if (c.profiling.max_token_len)
      p.inst = shortcut_optimize(p.inst.graph, p.inst.labels, c.profiling.max_token_len);
  } catch (const InstrumentError& e) {
    bad(e.what());
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
  return p;
}

// ---- output helpers ---------------------------------------------------------------

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return os.str();
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return json::parse(in);
}

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

std::string num(double v) {
  if (v == std::floor(v)) return std::to_string(static_cast<std::int64_t>(v));
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

json summary_to_json(const Summary& s) {
  return {{"min", s.min}, {"median", s.median}, {"max", s.max}, {"count", s.count}};
}

json blocked_json(const DataflowGraph& g, const std::vector<BlockedActor>& v) {
  json out = json::array();
  for (const auto& b : v)
    out.push_back({{"node", b.node},
                   {"kind", std::string(to_string(g.node(b.node).type()))},
                   {"on", b.on_full ? "full" : "empty"},
                   {"channel", b.channel}});
  return out;
}

// Refuses to reuse a directory unless forced; forced reruns start clean.
bool claim_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!force) return false;
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
  return true;
}

std::string run_base(const RunOptions& o) { return o.run_id ? *o.run_id : timestamp(); }

}  // namespace

std::string fifostats_csv(const DataflowGraph& g, const SimResult& r) {
  std::ostringstream os;
  os << "channel_id,producer_node,consumer_node,consumer_kind,capacity,oracle_max,"
        "profiled_max,pushes,pops,final_occupancy,overflowed\n";
  for (const auto& [c, s] : r.stats) {
    const auto& ch = g.channel(c);
    os << c << ',' << ch.producer << ',' << ch.consumer << ','
       << to_string(g.node(ch.consumer).type()) << ',' << ch.capacity << ','
       << s.oracle_max << ',' << (s.decoded ? std::to_string(*s.decoded) : "") << ','
       << s.pushes << ',' << s.pops << ',' << s.final_occupancy << ','
       << (s.overflowed ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string trace_csv(const SimResult& r) {
  std::ostringstream os;
  os << "cycle,channel_id,occupancy\n";
  for (const auto& s : r.trace.samples)
    os << s.cycle << ',' << s.channel << ',' << s.occupancy << '\n';
  return os.str();
}

json summary_json(const DataflowGraph& plain, const Instrumented& inst, const SimResult& r) {
  json j;
  j["status"] = std::string(to_string(r.trace.termination.status));
  j["termination_cycle"] = r.trace.termination.cycle;
  j["cycles"] = r.trace.cycles;
  j["inferences_decoded"] = r.trace.decoded.size();
  j["signals"] = inst.labels.signal_count();
  j["shortcuts"] = shortcut_count(inst.graph);

  std::map<ChannelId, std::uint64_t> oracle, profiled;
  for (const auto& [c, s] : r.stats)
    if (s.decoded) {
      oracle[c] = static_cast<std::uint64_t>(s.oracle_max);
      profiled[c] = *s.decoded;
    }
  const auto d = compare(oracle, profiled);
  j["diff"] = {{"avg_abs_diff", d.avg_abs_diff},
               {"max_abs_diff", d.max_abs_diff},
               {"num_channels", d.num_channels}};

  json groups = json::object();
  for (const auto& [k, s] : group_profiled(inst.graph, r)) groups[k] = summary_to_json(s);
  j["groups"] = groups;
  j["overflowed"] = r.trace.overflowed;

  if (r.trace.deadlock)
    j["deadlock"] = {{"core", blocked_json(inst.graph, r.trace.deadlock->core)},
                     {"blocked", blocked_json(inst.graph, r.trace.deadlock->blocked)}};
  else
    j["deadlock"] = nullptr;

  if (r.trace.termination.status == TerminationStatus::Completed) {
    json rec = json::object();
    for (const DepthPolicy& p : {DepthPolicy{Exact{}}, DepthPolicy{PatternAware{}}}) {
      const auto d = recommend_depths(inst.graph, r, p);
      json m = json::object();
      for (const auto& [c, v] : d.depth) m[std::to_string(c)] = v;
      rec[d.policy] = m;
    }
    j["recommended_depths"] = rec;
  } else {
    j["recommended_depths"] = nullptr;
  }

  const auto o = overhead_accounting(plain, inst.graph, inst.labels.pf_bitwidth);
  j["overhead"] = {{"pf_channels", o.pf_channels},
                   {"total_pf_bits", o.total_pf_bits},
                   {"measured_signals", o.measured_signals},
                   {"collector_token_bits", o.collector_token_bits}};
  return j;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "parameter,value,status,cycles,group,count,min,median,max\n";
  for (const auto& p : r.points) {
    std::string value = p.value.is_string() ? p.value.get<std::string>() : p.value.dump();
    std::replace(value.begin(), value.end(), ',', ';');
    for (const auto& [g, s] : p.groups)
      os << r.parameter << ',' << value << ',' << to_string(p.status) << ',' << p.cycles
         << ',' << g << ',' << s.count << ',' << s.min << ',' << num(s.median) << ','
         << s.max << '\n';
  }
  return os.str();
}

// ---- commands ----------------------------------------------------------------------

RunOutcome cmd_pipeline(const Config& c, const RunOptions& opts) {
  RunOutcome out;
  Prepared p;
  try {
    p = prepare(c);
  } catch (const ConfigError& e) {
    out.exit = kExitConfig;
    out.error = e.what();
    return out;
  }
  const std::string run_id =
      opts.run_id ? *opts.run_id : timestamp() + "-seed" + std::to_string(c.rinn.seed);
  out.dir = opts.out_root / run_id;
  if (!claim_dir(out.dir, opts.force)) {
    out.exit = kExitCollision;
    out.error = "run directory " + out.dir.string() + " exists (use --force)";
    return out;
  }

  SimResult r;
  try {
    r = run_simulation(p.inst.graph, p.inst.labels, c.sim.sim);
  } catch (const std::exception& e) {
    out.exit = kExitFailure;
    out.error = e.what();
    return out;
  }

  std::vector<std::string> artifacts{"graph.json", "instrumented.json", "labels.json",
                                     "fifostats.csv", "summary.json", "manifest.json"};
  write_json(out.dir / "graph.json", graph_to_json(p.plain));
  write_json(out.dir / "instrumented.json", graph_to_json(p.inst.graph));
  write_json(out.dir / "labels.json", labels_to_json(p.inst.labels));
  write_text(out.dir / "fifostats.csv", fifostats_csv(p.inst.graph, r));
  write_json(out.dir / "summary.json", summary_json(p.plain, p.inst, r));
  if (c.sim.sim.trace_sampling) {
    write_text(out.dir / "trace.csv", trace_csv(r));
    artifacts.push_back("trace.csv");
  }
  std::sort(artifacts.begin(), artifacts.end());
  json manifest = {{"run_id", run_id},
                   {"tool_version", kToolVersion},
                   {"prng", kPrngAlgorithm},
                   {"config", config_to_json(c)},
                   {"artifacts", artifacts},
                   {"out_of_model", {"data_bitwidth does not enter the timing model"}}};
  write_json(out.dir / "manifest.json", manifest);

  out.status = r.trace.termination.status;
  out.exit = exit_code(*out.status);
  out.cycles = r.trace.cycles;
  out.groups = group_profiled(p.inst.graph, r);
  return out;
}

namespace {

template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) f(i);
  };
  const unsigned k = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace

int cmd_batch(const Config& c, const RunOptions& opts, unsigned workers, fs::path* batch_dir) {
  if (!c.sweep.seed_range) {
    std::cerr << "batch: sweep.seed_range is required\n";
    return kExitConfig;
  }
  const auto [lo, hi] = *c.sweep.seed_range;
  const std::string base = run_base(opts);
  const fs::path dir = opts.out_root / (base + "-batch");
  if (batch_dir) *batch_dir = dir;
  if (!claim_dir(dir, opts.force)) {
    std::cerr << "batch: " << dir.string() << " exists (use --force)\n";
    return kExitCollision;
  }
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  std::vector<RunOutcome> outcomes(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    Config ci = c;
    ci.rinn.seed = seeds[i];
    RunOptions o{dir, base + "-seed" + std::to_string(seeds[i]), true};
    outcomes[i] = cmd_pipeline(ci, o);
  });

  std::ostringstream os;
  os << "seed,status,exit_code,failed,cycles,group,count,min,median,max\n";
  bool any_failed = false;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& o = outcomes[i];
    const bool failed = o.exit != kExitCompleted;
    any_failed |= failed;
    if (failed && !o.error.empty())
      std::cerr << "seed " << seeds[i] << ": " << o.error << '\n';
    const std::string status = o.status ? std::string(to_string(*o.status)) : "Error";
    const std::string prefix = std::to_string(seeds[i]) + ',' + status + ',' +
                               std::to_string(o.exit) + ',' + (failed ? "true" : "false") +
                               ',' + std::to_string(o.cycles) + ',';
    if (o.groups.empty()) os << prefix << ",,,,\n";
    for (const auto& [g, s] : o.groups)
      os << prefix << g << ',' << s.count << ',' << s.min << ',' << num(s.median) << ','
         << s.max << '\n';
  }
  write_text(dir / "aggregate.csv", os.str());
  return any_failed ? kExitFailure : kExitCompleted;
}

int cmd_sweep(const Config& c, const RunOptions& opts, unsigned workers, fs::path* sweep_dir) {
  if (c.sweep.parameter.empty() || c.sweep.values.empty()) {
    std::cerr << "sweep: sweep.parameter and sweep.values are required\n";
    return kExitConfig;
  }
  const fs::path dir = opts.out_root / (run_base(opts) + "-sweep");
  if (sweep_dir) *sweep_dir = dir;
  if (!claim_dir(dir, opts.force)) {
    std::cerr << "sweep: " << dir.string() << " exists (use --force)\n";
    return kExitCollision;
  }
  SweepOptions so;
  so.pf_bitwidth = c.profiling.pf_bitwidth;
  so.kinds = c.profiling.kinds;
  so.capacity_mode = c.sim.capacity_mode;
  so.workers = workers;
  SweepResult r;
  try {
    r = run_sweep(c.rinn, c.sweep.parameter, c.sweep.values, c.sim.sim, so);
  } catch (const std::exception& e) {
    std::cerr << "sweep: " << e.what() << '\n';
    return kExitFailure;
  }
  write_text(dir / "sweep.csv", sweep_csv(r));
  const bool all_done = std::all_of(r.points.begin(), r.points.end(), [](const auto& p) {
    return p.status == TerminationStatus::Completed;
  });
  return all_done ? kExitCompleted : kExitFailure;
}

// ---- report -------------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string report(const fs::path& run_dir) {
  const auto graph = graph_from_json(read_json(run_dir / "instrumented.json"));
  const auto summary = read_json(run_dir / "summary.json");
  std::ifstream in(run_dir / "fifostats.csv");
  if (!in) throw std::runtime_error("cannot read fifostats.csv in " + run_dir.string());

  SimResult r;
  const auto status = summary.at("status").get<std::string>();
  for (auto s : {TerminationStatus::Completed, TerminationStatus::Deadlock,
                 TerminationStatus::BudgetExhausted})
    if (to_string(s) == status) r.trace.termination.status = s;

  std::map<ChannelId, std::uint64_t> oracle, profiled;
  std::map<std::string, std::vector<std::int64_t>> by_kind;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() != 11) throw std::runtime_error("malformed fifostats row: " + line);
    FifoStats s;
    s.channel_id = std::stoi(cells[0]);
    s.oracle_max = std::stoll(cells[5]);
    if (!cells[6].empty()) {
      s.decoded = std::stoull(cells[6]);
      oracle[s.channel_id] = static_cast<std::uint64_t>(s.oracle_max);
      profiled[s.channel_id] = *s.decoded;
      by_kind[cells[3]].push_back(static_cast<std::int64_t>(*s.decoded));
    }
    r.stats[s.channel_id] = s;
  }

  std::ostringstream os;
  const auto d = compare(oracle, profiled);
  os << "status " << status << ", " << summary.at("cycles").get<std::uint64_t>()
     << " cycles\n";
  os << "measured channels " << d.num_channels << ", avg |oracle - profiled| "
     << num(d.avg_abs_diff) << ", max " << d.max_abs_diff << "\n\n";
  os << std::left << std::setw(14) << "consumer" << std::right << std::setw(7) << "count"
     << std::setw(7) << "min" << std::setw(9) << "median" << std::setw(7) << "max" << '\n';
  for (auto& [k, v] : by_kind) {
    const auto s = summarize(v);
    os << std::left << std::setw(14) << k << std::right << std::setw(7) << s.count
       << std::setw(7) << s.min << std::setw(9) << num(s.median) << std::setw(7) << s.max
       << '\n';
  }
  if (r.trace.termination.status != TerminationStatus::Completed) {
    os << "\nno depth recommendation for a run that did not complete\n";
    return os.str();
  }
  const auto exact = recommend_depths(graph, r, Exact{});
  const auto head = recommend_depths(graph, r, Headroom{});
  const auto aware = recommend_depths(graph, r, PatternAware{});
  os << '\n'
     << std::setw(8) << "channel" << std::setw(8) << "oracle" << std::setw(8) << "exact"
     << std::setw(10) << "headroom" << std::setw(8) << "aware" << '\n';
  for (const auto& [c, s] : r.stats)
    os << std::setw(8) << c << std::setw(8) << s.oracle_max << std::setw(8)
       << exact.depth.at(c) << std::setw(10) << head.depth.at(c) << std::setw(8)
       << aware.depth.at(c) << '\n';
  return os.str();
}

}  // namespace streamprof::app
