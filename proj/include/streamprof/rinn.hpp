#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

#include "streamprof/graph.hpp"

namespace streamprof {

/// Identifier recorded in run metadata for the generator's random source.
inline constexpr std::string_view kPrngAlgorithm = "mt19937_64/rejection-bounded";

/// Seeded 64-bit generator. Bounded draws use rejection sampling on the raw
/// engine output so results do not depend on the standard library's
/// distribution implementations.
class Prng {
public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

private:
  std::mt19937_64 engine_;
};

enum class ConnectionPattern { ShortSkip, LongSkip, EndsOnly, UniformRandom };
enum class RinnVariant { ConvStack, DenseStack };

std::string_view to_string(ConnectionPattern p);
ConnectionPattern connection_pattern_from_string(std::string_view s);
std::string_view to_string(RinnVariant v);
RinnVariant rinn_variant_from_string(std::string_view s);

struct RinnSpec {
  std::uint64_t seed = 1;
  RinnVariant variant = RinnVariant::ConvStack;
  int input_width = 16;
  int output_width = 5;
  int reshape_side = 6;
  int num_hidden_layers = 4;
  double connection_density = 0.5;
  ConnectionPattern pattern = ConnectionPattern::UniformRandom;
  int kernel = 3;
  int filters = 2;
  int reuse_factor = 1;
  Bitwidth data_bitwidth{2, 1};

  friend bool operator==(const RinnSpec&, const RinnSpec&) = default;
};

/// Throws std::invalid_argument naming the first violated invariant.
void check_rinn_spec(const RinnSpec& spec);

using LayerEdge = std::pair<int, int>;

/// Backbone (i, i+1) edges plus round(density * |admissible|) skip edges
/// drawn without replacement from the pattern's admissible pair set.
std::set<LayerEdge> connection_edges(ConnectionPattern pattern, int num_layers,
                                     double density, std::uint64_t seed);

/// Pairs a pattern may add on top of the backbone.
std::set<LayerEdge> admissible_skip_pairs(ConnectionPattern pattern, int num_layers);

DataflowGraph generate_rinn(const RinnSpec& spec);

void to_json(nlohmann::json& j, const RinnSpec& s);
/// Strict: unknown keys raise std::invalid_argument.
void from_json(const nlohmann::json& j, RinnSpec& s);

}  // namespace streamprof
