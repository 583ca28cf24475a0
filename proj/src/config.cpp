#include "coneroute/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "coneroute/errors.hpp"

namespace coneroute {
namespace {

[[noreturn]] void bad(int line_no, const std::string& msg) {
  fail(Errc::config_error, "line " + std::to_string(line_no) + ": " + msg);
}

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line_no = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

std::string parse_ident(Cursor& c) {
  c.skip_ws();
  std::size_t start = c.pos;
  while (c.pos < c.s.size() && ident_char(c.s[c.pos])) ++c.pos;
  if (c.pos == start) bad(c.line_no, "expected an identifier");
  return c.s.substr(start, c.pos - start);
}

ConfigValue parse_value(Cursor& c);

ConfigValue parse_number_or_word(Cursor& c) {
  c.skip_ws();
  const char* begin = c.s.c_str() + c.pos;
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin && (end == c.s.c_str() + c.s.size() || !ident_char(*end))) {
    c.pos += static_cast<std::size_t>(end - begin);
    ConfigValue out;
    out.kind = ConfigValue::Kind::number;
    out.num = v;
    return out;
  }
  // Bare word, treated as a string (lets users skip quotes for simple names).
  ConfigValue out;
  out.kind = ConfigValue::Kind::string;
  out.str = parse_ident(c);
  return out;
}

ConfigValue parse_value(Cursor& c) {
  char ch = c.peek();
  if (ch == '"') {
    ++c.pos;
    std::string out;
    while (c.pos < c.s.size() && c.s[c.pos] != '"') out += c.s[c.pos++];
    if (c.pos >= c.s.size()) bad(c.line_no, "unterminated string");
    ++c.pos;
    ConfigValue v;
    v.kind = ConfigValue::Kind::string;
    v.str = std::move(out);
    return v;
  }
  if (ch == '[' || ch == '(') {
    const char close = ch == '[' ? ']' : ')';
    ++c.pos;
    ConfigValue v;
    v.kind = ConfigValue::Kind::list;
    if (c.peek() != close) {
      while (true) {
        v.items.push_back(parse_value(c));
        char nxt = c.peek();
        if (nxt == ',') {
          ++c.pos;
          continue;
        }
        if (nxt == close) break;
        bad(c.line_no, "expected ',' or closing bracket in list");
      }
    }
    ++c.pos;
    return v;
  }
  if (ch == '{') {
    ++c.pos;
    ConfigValue v;
    v.kind = ConfigValue::Kind::table;
    if (c.peek() != '}') {
      while (true) {
        std::string key = parse_ident(c);
        if (c.peek() != '=') bad(c.line_no, "expected '=' in inline table");
        ++c.pos;
        v.fields.emplace_back(std::move(key), parse_value(c));
        char nxt = c.peek();
        if (nxt == ',') {
          ++c.pos;
          continue;
        }
        if (nxt == '}') break;
        bad(c.line_no, "expected ',' or '}' in inline table");
      }
    }
    ++c.pos;
    return v;
  }
  return parse_number_or_word(c);
}

// Strips a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

double ConfigValue::as_number(const std::string& what) const {
  if (kind != Kind::number) fail(Errc::config_error, what + " must be a number");
  return num;
}

std::string ConfigValue::as_string(const std::string& what) const {
  if (kind != Kind::string) fail(Errc::config_error, what + " must be a string");
  return str;
}

const std::vector<ConfigValue>& ConfigValue::as_list(const std::string& what) const {
  if (kind != Kind::list) fail(Errc::config_error, what + " must be a list");
  return items;
}

std::vector<double> ConfigValue::as_numbers(const std::string& what) const {
  std::vector<double> out;
  for (const ConfigValue& v : as_list(what)) out.push_back(v.as_number(what + " entry"));
  return out;
}

const ConfigValue* ConfigValue::field(const std::string& key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return &v;
  return nullptr;
}

const ConfigValue* ConfigSection::find(const std::string& key) const {
  const ConfigValue* out = nullptr;
  for (const ConfigLine& line : lines)
    for (const auto& [k, v] : line.assigns)
      if (k == key) out = &v;
  return out;
}

const ConfigSection* ConfigSection::child(const std::string& want) const {
  for (const ConfigSection& c : children)
    if (c.name == want) return &c;
  return nullptr;
}

ConfigSection parse_config(const std::string& text) {
  ConfigSection root;
  std::vector<ConfigSection*> stack{&root};
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string body = strip_comment(raw);
    Cursor c{body, 0, line_no};
    if (c.done()) continue;

    if (c.peek() == '}') {
      ++c.pos;
      if (!c.done()) bad(line_no, "unexpected text after '}'");
      if (stack.size() == 1) bad(line_no, "unmatched '}'");
      stack.pop_back();
      continue;
    }

    // Bare number row (starts with a digit, sign, or dot).
    char first = c.peek();
    if (std::isdigit(static_cast<unsigned char>(first)) || first == '-' || first == '+' ||
        first == '.') {
      ConfigLine row;
      row.line_no = line_no;
      while (true) {
        ConfigValue v = parse_number_or_word(c);
        if (v.kind != ConfigValue::Kind::number) bad(line_no, "expected a number");
        row.numbers.push_back(v.num);
        if (c.peek() == ',') {
          ++c.pos;
          continue;
        }
        break;
      }
      if (!c.done()) bad(line_no, "unexpected text after number row");
      stack.back()->lines.push_back(std::move(row));
      continue;
    }

    std::string head = parse_ident(c);
    if (c.peek() == '{') {
      ++c.pos;
      if (!c.done()) bad(line_no, "block open must end the line");
      ConfigSection child;
      child.name = head;
      stack.back()->children.push_back(std::move(child));
      stack.push_back(&stack.back()->children.back());
      continue;
    }

    ConfigLine row;
    row.line_no = line_no;
    while (true) {
      if (c.peek() != '=') bad(line_no, "expected '=' after '" + head + "'");
      ++c.pos;
      row.assigns.emplace_back(head, parse_value(c));
      if (c.peek() == ',') {
        ++c.pos;
        head = parse_ident(c);
        continue;
      }
      break;
    }
    if (!c.done()) bad(line_no, "unexpected trailing text");
    stack.back()->lines.push_back(std::move(row));
  }
  if (stack.size() != 1) fail(Errc::config_error, "unclosed block at end of file");
  return root;
}

ConfigSection parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::config_error, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

int required_int(const ConfigSection& s, const std::string& key) {
  const ConfigValue* v = s.find(key);
  if (!v) fail(Errc::config_error, "missing required field: " + key);
  double d = v->as_number(key);
  if (std::abs(d - std::round(d)) > 1e-9) fail(Errc::config_error, key + " must be an integer");
  return static_cast<int>(std::llround(d));
}

NodeMask mask_from_numbers(const std::vector<double>& nodes, int line_no) {
  NodeMask m = 0;
  for (double d : nodes) {
    if (d < 0 || std::abs(d - std::round(d)) > 1e-9) bad(line_no, "set entries must be node ids");
    m |= node_bit(static_cast<int>(std::llround(d)));
  }
  return m;
}

}  // namespace

NetworkModel load_network(const ConfigSection& root) {
  const int n = required_int(root, "n_relays");
  const bool has_broadcast = root.child("broadcast") != nullptr;
  const ConfigSection* links_block = root.child("links");
  const ConfigValue* links_value = root.find("links");
  if (has_broadcast && (links_block || links_value))
    fail(Errc::config_error, "give either broadcast blocks or links, not both");

  if (has_broadcast) {
    std::vector<std::vector<BroadcastEntry>> lists(static_cast<std::size_t>(n) + 1);
    for (const ConfigSection& blk : root.children) {
      if (blk.name != "broadcast") continue;
      const int node = required_int(blk, "node");
      if (node < 1 || node > n) fail(Errc::config_error, "broadcast node out of range");
      for (const ConfigLine& line : blk.lines) {
        const ConfigValue* set = nullptr;
        const ConfigValue* p = nullptr;
        for (const auto& [k, v] : line.assigns) {
          if (k == "set") set = &v;
          if (k == "p") p = &v;
        }
        if (!set && !p) continue;  // the `node = i` line
        if (!set || !p) bad(line.line_no, "broadcast entry needs both set and p");
        lists[static_cast<std::size_t>(node)].push_back(
            {mask_from_numbers(set->as_numbers("set"), line.line_no), p->as_number("p")});
      }
    }
    return NetworkModel(n, lists);
  }

  std::vector<LinkProb> links;
  if (links_block) {
    for (const ConfigLine& line : links_block->lines) {
      if (line.numbers.size() != 3) bad(line.line_no, "link rows are `from, to, p`");
      links.push_back({static_cast<int>(std::llround(line.numbers[0])),
                       static_cast<int>(std::llround(line.numbers[1])), line.numbers[2]});
    }
  } else if (links_value) {
    for (const ConfigValue& t : links_value->as_list("links")) {
      std::vector<double> nums = t.as_numbers("link triple");
      if (nums.size() != 3) fail(Errc::config_error, "link triples are (from, to, p)");
      links.push_back({static_cast<int>(std::llround(nums[0])),
                       static_cast<int>(std::llround(nums[1])), nums[2]});
    }
  } else {
    fail(Errc::config_error, "network needs broadcast blocks or links");
  }
  return NetworkModel::from_link_probabilities(n, links);
}

WeightFunction load_weights(const ConfigSection& root) {
  const ConfigValue* inline_w = root.find("weight");
  const ConfigSection* block_w = root.child("weight");
  if (!inline_w && !block_w) return WeightFunction::geometric(3.0);

  std::string family = "geometric";
  double k = 3.0;
  std::vector<WeightFunction::Entry> entries;
  std::string name;
  if (inline_w) {
    if (const ConfigValue* f = inline_w->field("family")) family = f->as_string("family");
    if (const ConfigValue* kv = inline_w->field("K")) k = kv->as_number("K");
    if (const ConfigValue* nv = inline_w->field("name")) name = nv->as_string("name");
  } else {
    if (const ConfigValue* f = block_w->find("family")) family = f->as_string("family");
    if (const ConfigValue* kv = block_w->find("K")) k = kv->as_number("K");
    if (const ConfigValue* nv = block_w->find("name")) name = nv->as_string("name");
    for (const ConfigLine& line : block_w->lines) {
      if (line.numbers.empty()) continue;
      if (line.numbers.size() != 3) bad(line.line_no, "weight table rows are `m, n, value`");
      entries.push_back({static_cast<int>(std::llround(line.numbers[0])),
                         static_cast<int>(std::llround(line.numbers[1])), line.numbers[2]});
    }
  }
  if (family == "geometric") return WeightFunction::geometric(k);
  if (family == "table") {
    if (entries.empty()) fail(Errc::config_error, "table weight family needs `m, n, value` rows");
    return WeightFunction::from_table(name.empty() ? "table" : name, entries);
  }
  fail(Errc::config_error, "unknown weight family: " + family);
}

namespace {

ArrivalProcess load_arrivals(const ConfigSection& root, int n_relays) {
  ArrivalProcess arr;
  if (const ConfigValue* lv = root.find("lambda")) {
    if (lv->kind == ConfigValue::Kind::number)
      arr.lambda.assign(static_cast<std::size_t>(n_relays), lv->num);
    else
      arr.lambda = lv->as_numbers("lambda");
  } else {
    arr.lambda.assign(static_cast<std::size_t>(n_relays), 0.0);
  }
  if (const ConfigValue* av = root.find("arrivals")) {
    if (const ConfigValue* kind = av->field("kind")) {
      std::string k = kind->as_string("arrivals.kind");
      if (k == "bernoulli")
        arr.kind = ArrivalProcess::Kind::bernoulli;
      else if (k == "batch-uniform")
        arr.kind = ArrivalProcess::Kind::batch_uniform;
      else
        fail(Errc::config_error, "unknown arrival kind: " + k);
    }
    if (const ConfigValue* am = av->field("a_max"))
      arr.a_max = static_cast<int>(std::llround(am->as_number("arrivals.a_max")));
  }
  return arr;
}

std::int64_t int64_field(const ConfigSection& root, const std::string& key, std::int64_t dflt) {
  const ConfigValue* v = root.find(key);
  if (!v) return dflt;
  return static_cast<std::int64_t>(std::llround(v->as_number(key)));
}

}  // namespace

SimConfig load_sim_config(const ConfigSection& root) {
  SimConfig cfg{load_network(root)};
  cfg.weights = load_weights(root);
  if (const ConfigValue* p = root.find("policy")) cfg.policy_spec = p->as_string("policy");
  cfg.arrivals = load_arrivals(root, cfg.model.n_relays());
  cfg.horizon = int64_field(root, "horizon", 10000);
  cfg.warmup = int64_field(root, "warmup", -1);
  cfg.seed = static_cast<std::uint64_t>(int64_field(root, "seed", 0));
  cfg.trace_every = int64_field(root, "trace_every", 0);
  if (const ConfigValue* t = root.find("tie")) {
    std::string s = t->as_string("tie");
    if (s == "lowest-index")
      cfg.tie = TieRule::lowest_index;
    else if (s == "uniform-random")
      cfg.tie = TieRule::uniform_random;
    else
      fail(Errc::config_error, "unknown tie rule: " + s);
  }
  return cfg;
}

SweepSpec load_sweep_spec(const ConfigSection& root) {
  SweepSpec spec;
  const ConfigSection* sweep = root.child("sweep");
  if (!sweep) fail(Errc::config_error, "sweep needs a `sweep { ... }` block");
  if (const ConfigValue* p = sweep->find("policies"))
    for (const ConfigValue& v : p->as_list("policies"))
      spec.policies.push_back(v.as_string("policy entry"));
  if (const ConfigValue* d = sweep->find("direction")) spec.direction = d->as_numbers("direction");
  if (const ConfigValue* s = sweep->find("scales")) spec.scales = s->as_numbers("scales");
  if (const ConfigValue* s = sweep->find("seeds"))
    for (double v : s->as_numbers("seeds"))
      spec.seeds.push_back(static_cast<std::uint64_t>(std::llround(v)));
  spec.horizon = int64_field(*sweep, "horizon", 10000);
  spec.warmup = int64_field(*sweep, "warmup", -1);
  if (const ConfigValue* o = sweep->find("out_dir")) spec.out_dir = o->as_string("out_dir");
  if (spec.policies.empty()) fail(Errc::config_error, "sweep needs at least one policy");
  if (spec.scales.empty()) fail(Errc::config_error, "sweep needs at least one scale");
  if (spec.direction.empty()) fail(Errc::config_error, "sweep needs a direction vector");
  if (spec.seeds.empty()) spec.seeds.push_back(0);
  return spec;
}

}  // namespace coneroute
