#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamprof/analysis.hpp"
#include "streamprof/instrument.hpp"
#include "streamprof/rinn.hpp"
#include "streamprof/sim.hpp"

namespace streamprof::app {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutEnv = "STREAMPROF_OUT";

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Process exit codes. Every termination status maps to exactly one.
enum ExitCode : int {
  kExitCompleted = 0,
  kExitFailure = 1,
  kExitDeadlock = 2,
  kExitBudget = 3,
  kExitConfig = 4,
  kExitCollision = 5,
};

int exit_code(TerminationStatus s);

struct ProfilingSection {
  int pf_bitwidth = 16;
  ProfileKinds kinds = all_profile_kinds();
  std::optional<std::size_t> max_token_len;
};

struct SimSection {
  SimConfig sim;
  CapacityMode capacity_mode = CapacityMode::Deep;
  std::optional<int> skip_capacity;  // channels spanning >= 2 layers
  std::map<ChannelId, int> capacity_overrides;
};

struct SweepSection {
  std::string parameter;
  std::vector<nlohmann::json> values;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> seed_range;  // inclusive
  unsigned workers = 1;
};

struct Config {
  RinnSpec rinn;
  ProfilingSection profiling;
  SimSection sim;
  SweepSection sweep;
};

/// Strict parse: unknown keys and invalid values throw ConfigError.
Config config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

/// The plain graph with capacities applied, and its instrumented form.
struct Prepared {
  DataflowGraph plain;
  Instrumented inst;
};

DataflowGraph apply_capacities(DataflowGraph g, const SimSection& s);
Prepared prepare(const Config& c);

struct RunOptions {
  std::filesystem::path out_root;
  std::optional<std::string> run_id;
  bool force = false;
};

struct RunOutcome {
  int exit = kExitFailure;
  std::filesystem::path dir;
  std::optional<TerminationStatus> status;
  std::string error;
  std::map<std::string, Summary> groups;
  std::uint64_t cycles = 0;
};

/// Current UTC time as YYYYMMDDTHHMMSSZ.
std::string timestamp();

/// Generate, instrument, simulate and write one run directory.
RunOutcome cmd_pipeline(const Config& c, const RunOptions& opts);

/// One run per seed of sweep.seed_range plus aggregate.csv, in
/// out_root/<base>-batch. Returns nonzero iff any seed failed.
int cmd_batch(const Config& c, const RunOptions& opts, unsigned workers,
              std::filesystem::path* batch_dir = nullptr);

/// Runs the configured sweep and writes sweep.csv to out_root/<base>-sweep.
int cmd_sweep(const Config& c, const RunOptions& opts, unsigned workers,
              std::filesystem::path* sweep_dir = nullptr);

// Stage commands write into an existing or new directory.
void write_json(const std::filesystem::path& p, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& p);

std::string fifostats_csv(const DataflowGraph& g, const SimResult& r);
std::string trace_csv(const SimResult& r);
nlohmann::json summary_json(const DataflowGraph& plain, const Instrumented& inst,
                            const SimResult& r);
std::string sweep_csv(const SweepResult& r);

/// Reads a run directory and renders compare/recommendation tables.
std::string report(const std::filesystem::path& run_dir);

}  // namespace streamprof::app
