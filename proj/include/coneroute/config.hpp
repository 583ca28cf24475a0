#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coneroute/model.hpp"
#include "coneroute/sim.hpp"
#include "coneroute/weights.hpp"

namespace coneroute {

// Line-oriented structured text: `key = value` assignments (several per line
// when comma-separated), `name { ... }` blocks, bare comma-separated number
// rows inside blocks, and `#` comments. Values are numbers, quoted strings,
// [..] lists, (..) tuples, or inline { k = v } tables.
struct ConfigValue {
  enum class Kind { number, string, list, table };
  Kind kind = Kind::number;
  double num = 0.0;
  std::string str;
  std::vector<ConfigValue> items;
  std::vector<std::pair<std::string, ConfigValue>> fields;

  double as_number(const std::string& what) const;
  std::string as_string(const std::string& what) const;
  const std::vector<ConfigValue>& as_list(const std::string& what) const;
  std::vector<double> as_numbers(const std::string& what) const;
  const ConfigValue* field(const std::string& key) const;
};

struct ConfigLine {
  std::vector<std::pair<std::string, ConfigValue>> assigns;
  std::vector<double> numbers;  // bare number row
  int line_no = 0;
};

struct ConfigSection {
  std::string name;  // empty at top level
  std::vector<ConfigLine> lines;
  std::vector<ConfigSection> children;

  const ConfigValue* find(const std::string& key) const;  // last assignment wins
  const ConfigSection* child(const std::string& name) const;
};

ConfigSection parse_config(const std::string& text);
ConfigSection parse_config_file(const std::string& path);

// Builders over a parsed top-level section. Each throws ConfigError with the
// offending key when a required field is missing or ill-typed.
NetworkModel load_network(const ConfigSection& root);
WeightFunction load_weights(const ConfigSection& root);  // default: geometric K=3
SimConfig load_sim_config(const ConfigSection& root);

struct SweepSpec {
  std::vector<std::string> policies;
  std::vector<double> direction;
  std::vector<double> scales;  // multiples of the direction vector
  std::vector<std::uint64_t> seeds;
  std::int64_t horizon = 0;
  std::int64_t warmup = -1;
  std::string out_dir = ".";
};
SweepSpec load_sweep_spec(const ConfigSection& root);

}  // namespace coneroute
