#include "deltabk/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace deltabk {

namespace {

struct TomlValue {
  enum class Kind { string, number, boolean, array };
  Kind kind = Kind::number;
  std::string str;
  double num = 0.0;
  bool flag = false;
  std::vector<TomlValue> items;
  int line = 1;

  const char* kind_name() const {
    switch (kind) {
      case Kind::string: return "a string";
      case Kind::number: return "a number";
      case Kind::boolean: return "a boolean";
      case Kind::array: return "an array";
    }
    return "";
  }
};

struct TomlDoc {
  std::map<std::string, TomlValue> values;  // dotted leaf paths
  std::set<std::string> tables;             // declared [headers]
};

// Line-tracking scanner for the TOML subset the run configuration uses:
// bare keys, [table] and [table.sub] headers, strings, numbers, booleans,
// and (nested, possibly multiline) arrays, with # comments.
class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : text_(text) {}

  TomlDoc parse() {
    TomlDoc doc;
    std::string prefix;
    skip_blank();
    while (pos_ < text_.size()) {
      if (peek() == '[') {
        prefix = parse_header();
        if (!doc.tables.insert(prefix).second)
          fail("table [" + prefix + "] declared twice");
        end_of_line();
      } else {
        const int line = line_;
        const std::string key = parse_key();
        skip_spaces();
        expect('=');
        skip_spaces();
        TomlValue v = parse_value();
        v.line = line;
        end_of_line();
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!doc.values.emplace(path, std::move(v)).second)
          fail("key '" + path + "' assigned twice");
      }
      skip_blank();
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  char take() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    take();
  }

  void skip_spaces() {
    while (peek() == ' ' || peek() == '\t') take();
  }

  void skip_comment() {
    if (peek() == '#')
      while (pos_ < text_.size() && peek() != '\n') take();
  }

  // Whitespace, newlines, comments.
  void skip_blank() {
    while (pos_ < text_.size()) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        take();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (pos_ >= text_.size()) return;
    if (peek() == '\r') take();
    if (peek() != '\n') fail("unexpected text after value");
    take();
  }

  static bool key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key() {
    std::string k;
    while (key_char(peek())) k += take();
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::string parse_header() {
    expect('[');
    std::string h = parse_key();
    while (peek() == '.') {
      take();
      h += "." + parse_key();
    }
    expect(']');
    return h;
  }

  TomlValue parse_value() {
    TomlValue v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      take();
      v.kind = TomlValue::Kind::string;
      while (true) {
        if (pos_ >= text_.size() || peek() == '\n')
          fail("unterminated string");
        const char d = take();
        if (d == '"') break;
        if (d == '\\') {
          const char e = take();
          if (e == '"' || e == '\\')
            v.str += e;
          else
            fail("unsupported escape in string");
        } else {
          v.str += d;
        }
      }
      return v;
    }
    if (c == '[') {
      take();
      v.kind = TomlValue::Kind::array;
      skip_blank();
      while (peek() != ']') {
        v.items.push_back(parse_value());
        skip_blank();
        if (peek() == ',') {
          take();
          skip_blank();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      take();
      return v;
    }
    // Bare token: boolean or number.
    std::string tok;
    while (pos_ < text_.size()) {
      const char d = peek();
      if (d == ',' || d == ']' || d == '#' || d == '\n' || d == '\r' ||
          d == ' ' || d == '\t')
        break;
      tok += take();
    }
    if (tok.empty()) fail("expected a value");
    if (tok == "true" || tok == "false") {
      v.kind = TomlValue::Kind::boolean;
      v.flag = tok == "true";
      return v;
    }
    char* end = nullptr;
    v.num = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v.num))
      fail("malformed value '" + tok + "'");
    v.kind = TomlValue::Kind::number;
    return v;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

[[noreturn]] void type_fail(const std::string& path, const TomlValue& v,
                            const char* want) {
  throw ConfigError("config line " + std::to_string(v.line) + ": key '" +
                    path + "' must be " + want + ", got " + v.kind_name());
}

class ConfigReader {
 public:
  explicit ConfigReader(TomlDoc doc) : doc_(std::move(doc)) {}

  const TomlValue* find(const std::string& path) {
    const auto it = doc_.values.find(path);
    if (it == doc_.values.end()) return nullptr;
    consumed_.insert(path);
    return &it->second;
  }

  bool table_declared(const std::string& name) const {
    return doc_.tables.count(name) > 0;
  }

  double number(const std::string& path, double fallback) {
    const TomlValue* v = find(path);
    if (!v) return fallback;
    if (v->kind != TomlValue::Kind::number) type_fail(path, *v, "a number");
    return v->num;
  }

  long long integer(const std::string& path, long long fallback) {
    const TomlValue* v = find(path);
    if (!v) return fallback;
    if (v->kind != TomlValue::Kind::number ||
        v->num != std::floor(v->num) || std::abs(v->num) > 0x1p53)
      type_fail(path, *v, "an integer");
    return static_cast<long long>(v->num);
  }

  std::string str(const std::string& path, const std::string& fallback) {
    const TomlValue* v = find(path);
    if (!v) return fallback;
    if (v->kind != TomlValue::Kind::string) type_fail(path, *v, "a string");
    return v->str;
  }

  // Every key under prefix., in map order.
  std::vector<std::string> keys_under(const std::string& prefix) const {
    std::vector<std::string> out;
    const std::string p = prefix + ".";
    for (const auto& [path, v] : doc_.values)
      if (path.rfind(p, 0) == 0) out.push_back(path);
    return out;
  }

  // Unknown-key rejection: every leaf must have been consumed and every
  // declared table must be expected.
  void finish(const std::set<std::string>& allowed_tables) const {
    for (const auto& [path, v] : doc_.values)
      if (consumed_.count(path) == 0)
        throw ConfigError("config line " + std::to_string(v.line) +
                          ": unknown key '" + path + "'");
    for (const std::string& t : doc_.tables)
      if (allowed_tables.count(t) == 0)
        throw ConfigError("unknown table [" + t + "] in config");
  }

 private:
  TomlDoc doc_;
  std::set<std::string> consumed_;
};

std::vector<std::string> string_array(const std::string& path,
                                      const TomlValue& v) {
  if (v.kind != TomlValue::Kind::array)
    type_fail(path, v, "an array of strings");
  std::vector<std::string> out;
  for (const TomlValue& e : v.items) {
    if (e.kind != TomlValue::Kind::string)
      type_fail(path, e, "an array of strings");
    out.push_back(e.str);
  }
  return out;
}

std::vector<double> number_array(const std::string& path, const TomlValue& v) {
  if (v.kind != TomlValue::Kind::array)
    type_fail(path, v, "an array of numbers");
  std::vector<double> out;
  for (const TomlValue& e : v.items) {
    if (e.kind != TomlValue::Kind::number)
      type_fail(path, e, "an array of numbers");
    out.push_back(e.num);
  }
  return out;
}

Box box_value(const std::string& path, const TomlValue& v) {
  if (v.kind != TomlValue::Kind::array)
    type_fail(path, v, "an array of [lo, hi] pairs");
  Box box;
  for (const TomlValue& e : v.items) {
    const std::vector<double> pair = number_array(path, e);
    if (pair.size() != 2)
      throw ConfigError("config line " + std::to_string(e.line) + ": '" +
                        path + "' entries must be [lo, hi] pairs");
    box.bounds.push_back({pair[0], pair[1]});
  }
  return box;
}

InputSignal signal_value(const std::string& path, const TomlValue& v) {
  if (v.kind == TomlValue::Kind::number) return InputSignal::constant(v.num);
  if (v.kind == TomlValue::Kind::string)
    return InputSignal::expression(v.str);
  if (v.kind == TomlValue::Kind::array) {
    std::vector<std::pair<double, double>> steps;
    for (const TomlValue& e : v.items) {
      const std::vector<double> pair = number_array(path, e);
      if (pair.size() != 2)
        throw ConfigError("config line " + std::to_string(e.line) + ": '" +
                          path + "' schedule entries must be [t, value]");
      steps.emplace_back(pair[0], pair[1]);
    }
    return InputSignal::schedule(std::move(steps));
  }
  type_fail(path, v, "a number, an expression string, or a schedule");
}

const std::set<std::string> kGeneratorParamNames = {
    "E", "F", "G_gen", "I", "J", "Vs", "Kc", "delta0", "eq0", "Pm0"};

SystemSpec read_system(ConfigReader& r) {
  SystemSpec s;
  for (const std::string& path : r.keys_under("system.params")) {
    const TomlValue* v = r.find(path);
    if (v->kind != TomlValue::Kind::number)
      type_fail(path, *v, "a number");
    s.params[path.substr(std::string("system.params.").size())] = v->num;
  }

  if (const TomlValue* v = r.find("system.builtin")) {
    if (v->kind != TomlValue::Kind::string)
      type_fail("system.builtin", *v, "a string");
    s.builtin = v->str;
    if (s.builtin != "generator" && s.builtin != "scalar-demo" &&
        s.builtin != "two-state-demo")
      throw ConfigError("unknown builtin system '" + s.builtin + "'");
    for (const char* k : {"n", "h", "g", "b", "box"})
      if (r.find(std::string("system.") + k))
        throw ConfigError(std::string("system.") + k +
                          " cannot be combined with system.builtin");
    if (s.builtin == "generator") {
      for (const auto& [name, value] : s.params)
        if (kGeneratorParamNames.count(name) == 0)
          throw ConfigError("unknown generator parameter '" + name + "'");
    } else if (!s.params.empty()) {
      throw ConfigError("builtin '" + s.builtin + "' takes no parameters");
    }
    return s;
  }

  s.inline_form = true;
  const TomlValue* nv = r.find("system.n");
  if (!nv) throw ConfigError("[system] needs either builtin or n/h/g/box");
  if (nv->kind != TomlValue::Kind::number || nv->num != std::floor(nv->num))
    type_fail("system.n", *nv, "an integer");
  s.n = static_cast<int>(nv->num);

  const TomlValue* hv = r.find("system.h");
  if (!hv) throw ConfigError("inline system needs an h expression list");
  s.h = string_array("system.h", *hv);

  const TomlValue* gv = r.find("system.g");
  if (!gv) throw ConfigError("inline system needs g");
  const TomlValue* bv = r.find("system.b");
  if (gv->kind == TomlValue::Kind::string) {
    s.strict = false;
    s.g = {gv->str};
    if (bv)
      s.b = number_array("system.b", *bv);
    else if (s.n > 1)
      throw ConfigError("gain-normalized system with n > 1 needs b");
  } else if (gv->kind == TomlValue::Kind::array) {
    s.strict = true;
    s.g = string_array("system.g", *gv);
    if (bv)
      throw ConfigError("system.b only applies when g is a single string");
  } else {
    type_fail("system.g", *gv, "a string or an array of strings");
  }

  const TomlValue* boxv = r.find("system.box");
  if (!boxv) throw ConfigError("inline system needs a box");
  s.box = box_value("system.box", *boxv);
  return s;
}

int resolved_order(const SystemSpec& s) {
  if (s.builtin == "generator") return 3;
  if (s.builtin == "scalar-demo") return 1;
  if (s.builtin == "two-state-demo") return 2;
  return s.n;
}

}  // namespace

std::string text_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_run_config(const std::string& text) {
  ConfigReader r(TomlParser(text).parse());
  RunConfig cfg;
  cfg.digest = text_digest(text);

  cfg.lambda = r.number("lambda", 2.0);
  if (!(cfg.lambda > 0.0)) throw ConfigError("lambda must be positive");
  cfg.alpha = r.number("alpha", 2.0);
  if (!(cfg.alpha >= 0.0)) throw ConfigError("alpha must be nonnegative");

  cfg.system = read_system(r);
  const int n = resolved_order(cfg.system);

  const long long samples = r.integer("verify.samples", 2000);
  if (samples < 1) throw ConfigError("verify.samples must be at least 1");
  cfg.verify.samples = static_cast<int>(samples);
  const long long seed = r.integer("verify.seed", 42);
  if (seed < 0) throw ConfigError("verify.seed must be nonnegative");
  cfg.verify.seed = static_cast<std::uint64_t>(seed);
  cfg.verify.tol.state = r.number("verify.tol_state", cfg.verify.tol.state);
  cfg.verify.tol.input = r.number("verify.tol_input", cfg.verify.tol.input);
  cfg.verify.tol.pd = r.number("verify.tol_pd", cfg.verify.tol.pd);
  if (!(cfg.verify.tol.state > 0.0 && cfg.verify.tol.input > 0.0 &&
        cfg.verify.tol.pd > 0.0))
    throw ConfigError("verification tolerances must be positive");
  cfg.verify.input_range[0] = r.number("verify.u_min", -1.0);
  cfg.verify.input_range[1] = r.number("verify.u_max", 1.0);
  if (!(cfg.verify.input_range[0] <= cfg.verify.input_range[1]))
    throw ConfigError("verify.u_min must not exceed verify.u_max");

  cfg.simulate.t_end = r.number("simulate.t_end", 5.0);
  if (!(cfg.simulate.t_end >= 0.0))
    throw ConfigError("simulate.t_end must be nonnegative");
  cfg.simulate.h = r.number("simulate.h", 1e-3);
  if (!(cfg.simulate.h > 0.0))
    throw ConfigError("simulate.h must be positive");
  cfg.simulate.eps_equality =
      r.number("simulate.eps_equality", cfg.simulate.eps_equality);
  cfg.simulate.eps_integration =
      r.number("simulate.eps_integration", cfg.simulate.eps_integration);
  if (!(cfg.simulate.eps_equality > 0.0 &&
        cfg.simulate.eps_integration > 0.0))
    throw ConfigError("simulation tolerances must be positive");

  if (const TomlValue* v = r.find("simulate.initial_states")) {
    if (v->kind != TomlValue::Kind::array)
      type_fail("simulate.initial_states", *v, "an array of state vectors");
    for (const TomlValue& e : v->items) {
      const std::vector<double> coords =
          number_array("simulate.initial_states", e);
      if (static_cast<int>(coords.size()) != n)
        throw ConfigError(
            "config line " + std::to_string(e.line) +
            ": initial state must have " + std::to_string(n) + " entries");
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x[i] = coords[static_cast<std::size_t>(i)];
      cfg.simulate.initial_states.push_back(x);
    }
  }
  if (const TomlValue* v = r.find("simulate.input_signals")) {
    if (v->kind != TomlValue::Kind::array)
      type_fail("simulate.input_signals", *v, "an array of signals");
    for (const TomlValue& e : v->items)
      cfg.simulate.signals.push_back(
          signal_value("simulate.input_signals", e));
    if (!cfg.simulate.signals.empty() &&
        cfg.simulate.signals.size() != cfg.simulate.initial_states.size())
      throw ConfigError(
          "simulate.input_signals must be empty or match "
          "simulate.initial_states in length");
  }
  if (const TomlValue* v = r.find("simulate.escape_box")) {
    Box b = box_value("simulate.escape_box", *v);
    if (b.dim() != n)
      throw ConfigError("simulate.escape_box must have " + std::to_string(n) +
                        " coordinate ranges");
    for (int i = 0; i < n; ++i)
      if (!(b.bounds[static_cast<std::size_t>(i)][0] <=
            b.bounds[static_cast<std::size_t>(i)][1]))
        throw ConfigError("simulate.escape_box bounds out of order");
    cfg.simulate.escape_box = std::move(b);
  }

  cfg.output.directory = r.str("output.directory", "out");
  if (cfg.output.directory.empty())
    throw ConfigError("output.directory must not be empty");
  if (const TomlValue* v = r.find("output.formats")) {
    cfg.output.json = cfg.output.csv = false;
    for (const std::string& f : string_array("output.formats", *v)) {
      if (f == "json")
        cfg.output.json = true;
      else if (f == "csv")
        cfg.output.csv = true;
      else
        throw ConfigError("unknown output format '" + f + "'");
    }
  }

  r.finish({"system", "system.params", "verify", "simulate", "output"});
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace deltabk
