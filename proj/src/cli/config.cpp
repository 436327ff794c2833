#include "mrsde/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mrsde::cli {
namespace {

using nlohmann::json;

// Best-effort source line of a key: first occurrence of "key" at or after the
// line where its parent object was found.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) : text_(text) {}

  int find(const std::string& key, int from_line) const {
    const std::string needle = "\"" + key + "\"";
    std::size_t pos = offset_of_line(from_line);
    pos = text_.find(needle, pos);
    if (pos == std::string_view::npos) return from_line;
    return line_of(pos);
  }

 private:
  std::size_t offset_of_line(int line) const {
    std::size_t pos = 0;
    for (int l = 1; l < line && pos < text_.size(); ++pos)
      if (text_[pos] == '\n') ++l;
    return pos;
  }
  int line_of(std::size_t pos) const {
    int line = 1;
    for (std::size_t i = 0; i < pos; ++i)
      if (text_[i] == '\n') ++line;
    return line;
  }

  std::string_view text_;
};

class Reader {
 public:
  Reader(const json& node, std::string pointer, int line, const LineIndex& lines)
      : node_(node), pointer_(std::move(pointer)), line_(line), lines_(lines) {
    if (!node_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const { fail_at(pointer_, line_, what); }

  [[noreturn]] void fail_at(const std::string& pointer, int line, const std::string& what) const {
    std::ostringstream os;
    os << "config error at " << (pointer.empty() ? "/" : pointer) << " (line " << line
       << "): " << what;
    throw ConfigError(os.str());
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  Reader child(const std::string& key) {
    const json& v = take(key);
    return Reader(v, pointer_ + "/" + key, line_of(key), lines_);
  }

  double number(const std::string& key, double fallback, double lo, double hi) {
    if (!has(key)) return fallback;
    const json& v = take(key);
    if (!v.is_number()) fail_key(key, "expected a number");
    const double x = v.get<double>();
    check_range(key, x, lo, hi);
    return x;
  }

  double required_number(const std::string& key, double lo, double hi) {
    if (!has(key)) fail("missing required key \"" + key + "\"");
    return number(key, 0.0, lo, hi);
  }

  Index integer(const std::string& key, Index fallback, Index lo, Index hi) {
    if (!has(key)) return fallback;
    const json& v = take(key);
    if (!v.is_number_integer()) fail_key(key, "expected an integer");
    const Index x = v.get<Index>();
    if (x < lo || x > hi)
      fail_key(key, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    return x;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = take(key);
    if (!v.is_number_unsigned()) fail_key(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = take(key);
    if (!v.is_boolean()) fail_key(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = take(key);
    if (!v.is_string()) fail_key(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback, double lo,
                              double hi, bool allow_scalar = false) {
    if (!has(key)) return fallback;
    const json& v = take(key);
    std::vector<double> out;
    if (allow_scalar && v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      if (!v.is_array()) fail_key(key, "expected an array of numbers");
      for (const json& e : v) {
        if (!e.is_number()) fail_key(key, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
    for (double x : out) check_range(key, x, lo, hi);
    return out;
  }

  std::vector<Index> integers(const std::string& key, std::vector<Index> fallback, Index lo) {
    if (!has(key)) return fallback;
    const json& v = take(key);
    if (!v.is_array()) fail_key(key, "expected an array of integers");
    std::vector<Index> out;
    for (const json& e : v) {
      if (!e.is_number_integer()) fail_key(key, "expected an array of integers");
      const Index x = e.get<Index>();
      if (x < lo) fail_key(key, "entries must be >= " + std::to_string(lo));
      out.push_back(x);
    }
    return out;
  }

  // Rejects every key that no accessor consumed.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail_key(it.key(), "unknown key \"" + it.key() + "\"");
  }

  [[noreturn]] void fail_key(const std::string& key, const std::string& what) const {
    fail_at(pointer_ + "/" + key, line_of(key), what);
  }

  const std::string& pointer() const { return pointer_; }

 private:
  const json& take(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  int line_of(const std::string& key) const { return lines_.find(key, line_); }

  void check_range(const std::string& key, double x, double lo, double hi) const {
    if (!std::isfinite(x) || x < lo || x > hi) {
      std::ostringstream os;
      os.precision(17);
      os << "value " << x << " outside [" << lo << ", " << hi << "]";
      fail_key(key, os.str());
    }
  }

  const json& node_;
  std::string pointer_;
  int line_;
  const LineIndex& lines_;
  std::set<std::string> seen_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kMaxCount = Index{1} << 40;

CoefficientFn read_coefficient(Reader r) {
  const std::string kind = r.string("kind", "");
  if (kind.empty()) r.fail("missing required key \"kind\"");
  const std::vector<double> params = r.numbers("params", {}, -kInf, kInf);
  r.finish();
  try {
    return CoefficientFn(parse_coefficient_kind(kind), params);
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

ConstraintFn read_constraint(Reader r) {
  const std::string kind = r.string("kind", "");
  if (kind.empty()) r.fail("missing required key \"kind\"");
  const std::vector<double> params = r.numbers("params", {}, -kInf, kInf);
  r.finish();
  try {
    return ConstraintFn(parse_constraint_kind(kind), params);
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

ModelSpec read_model(Reader r) {
  ModelSpec m;
  m.xi = r.required_number("xi", -kInf, kInf);
  m.horizon = r.number("T", 1.0, 0.0, kInf);
  if (!(m.horizon > 0.0)) r.fail_key("T", "horizon must be positive");
  if (!r.has("b")) r.fail("missing required key \"b\"");
  m.b = read_coefficient(r.child("b"));
  if (!r.has("sigma")) r.fail("missing required key \"sigma\"");
  m.sigma = read_coefficient(r.child("sigma"));
  if (!r.has("h")) r.fail("missing required key \"h\"");
  m.h = read_constraint(r.child("h"));
  m.sigma_floor = r.number("sigma_floor", 0.0, 0.0, kInf);
  r.finish();

  const ValidationReport report = validate(m);
  if (!report.ok()) r.fail("model rejected: " + report.summary());
  return m;
}

SimulateConfig read_simulate(Reader r) {
  SimulateConfig c;
  c.n_steps = r.integer("n_steps", c.n_steps, 1, kMaxCount);
  c.n_particles = r.integer("n_particles", c.n_particles, 1, kMaxCount);
  c.epsilon = r.number("epsilon", c.epsilon, 0.0, kInf);
  c.write_paths = r.boolean("write_paths", c.write_paths);
  c.tol_g0 = r.number("tol_g0", c.tol_g0, 1e-16, 1.0);
  if (r.has("k_check")) {
    Reader k = r.child("k_check");
    KCheck check;
    check.slope = k.number("slope", check.slope, -kInf, kInf);
    check.tolerance = k.number("tolerance", check.tolerance, 0.0, kInf);
    k.finish();
    c.k_check = check;
  }
  r.finish();
  return c;
}

SkeletonConfig read_skeleton(Reader r) {
  SkeletonConfig c;
  c.n_steps = r.integer("n_steps", c.n_steps, 1, kMaxCount);
  if (r.has("phi")) c.phi = r.numbers("phi", {}, -kInf, kInf, true);
  c.short_time = r.boolean("short_time", c.short_time);
  if (c.phi && c.phi->size() != 1 && static_cast<Index>(c.phi->size()) != c.n_steps)
    r.fail_key("phi", "expected one value or n_steps values");
  r.finish();
  return c;
}

RateMode read_mode(Reader& r, const std::string& key) {
  const std::string s = r.string(key, "small-noise");
  if (s == "small-noise") return RateMode::small_noise;
  if (s == "short-time") return RateMode::short_time;
  r.fail_key(key, "expected \"small-noise\" or \"short-time\"");
}

RateConfig read_rate(Reader r) {
  RateConfig c;
  c.targets = r.numbers("targets", c.targets, -kInf, kInf);
  c.mode = read_mode(r, "mode");
  c.n_steps = r.integer("n_steps", c.n_steps, 1, kMaxCount);
  r.finish();
  return c;
}

MalliavinConfig read_malliavin(Reader r) {
  MalliavinConfig c;
  c.n_steps = r.integer("n_steps", c.n_steps, 1, 20000);
  c.n_particles = r.integer("n_particles", c.n_particles, 1, kMaxCount);
  c.path = r.integer("path", c.path, 0, kMaxCount);
  c.kernel_stride = r.integer("kernel_stride", c.kernel_stride, 1, kMaxCount);
  c.bump = r.number("bump", c.bump, 0.0, kInf);
  if (!(c.bump > 0.0)) r.fail_key("bump", "bump must be positive");
  c.density_particles = r.integer("density_particles", c.density_particles, 2, kMaxCount);
  c.density_steps = r.integer("density_steps", c.density_steps, 1, kMaxCount);
  c.bandwidth = r.number("bandwidth", c.bandwidth, 0.0, kInf);
  if (!(c.bandwidth > 0.0)) r.fail_key("bandwidth", "bandwidth must be positive");
  r.finish();
  return c;
}

LdpConfig read_ldp(Reader r) {
  LdpConfig c;
  c.variant = read_mode(r, "variant") == RateMode::small_noise ? Variant::small_noise
                                                               : Variant::short_time;
  c.epsilons = r.numbers("epsilons", c.epsilons, 0.0, 1.0);
  if (r.has("event")) {
    Reader e = r.child("event");
    const std::string kind = e.string("kind", "endpoint-above");
    if (kind == "endpoint-above")
      c.event.kind = Event::Kind::endpoint_above;
    else if (kind == "endpoint-below")
      c.event.kind = Event::Kind::endpoint_below;
    else if (kind == "sup-deviation")
      c.event.kind = Event::Kind::sup_deviation;
    else
      e.fail_key("kind", "expected \"endpoint-above\", \"endpoint-below\" or \"sup-deviation\"");
    c.event.threshold = e.required_number("threshold", -kInf, kInf);
    e.finish();
  }
  c.n_particles = r.integer("n_particles", c.n_particles, 1, kMaxCount);
  c.n_steps = r.integer("n_steps", c.n_steps, 1, kMaxCount);
  c.n_mc_batches = r.integer("n_mc_batches", c.n_mc_batches, 1, kMaxCount);
  r.finish();
  return c;
}

ConvergeConfig read_converge(Reader r) {
  ConvergeConfig c;
  c.dts = r.numbers("dt", c.dts, 0.0, kInf);
  for (double dt : c.dts)
    if (!(dt > 0.0)) r.fail_key("dt", "entries must be positive");
  c.n_particles = r.integers("n_particles", c.n_particles, 1);
  c.replicates = r.integer("replicates", c.replicates, 1, kMaxCount);
  if (r.has("eps_limit")) {
    Reader e = r.child("eps_limit");
    EpsLimitConfig l;
    l.epsilons = e.numbers("epsilons", l.epsilons, 0.0, 1.0);
    l.n_particles = e.integer("n_particles", l.n_particles, 1, kMaxCount);
    l.n_steps = e.integer("n_steps", l.n_steps, 1, kMaxCount);
    l.n_batches = e.integer("n_batches", l.n_batches, 1, kMaxCount);
    e.finish();
    c.eps_limit = l;
  }
  r.finish();
  return c;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config error: malformed JSON: ") + e.what());
  }
  const LineIndex lines(text);
  Reader root(doc, "", 1, lines);

  RunConfig c;
  if (!root.has("model")) root.fail("missing required key \"model\"");
  c.model = read_model(root.child("model"));
  c.seed = root.unsigned_integer("seed", c.seed);
  if (root.has("simulate")) c.simulate = read_simulate(root.child("simulate"));
  if (root.has("skeleton")) c.skeleton = read_skeleton(root.child("skeleton"));
  if (root.has("rate")) c.rate = read_rate(root.child("rate"));
  if (root.has("malliavin")) c.malliavin = read_malliavin(root.child("malliavin"));
  if (root.has("ldp")) c.ldp = read_ldp(root.child("ldp"));
  if (root.has("converge")) c.converge = read_converge(root.child("converge"));
  root.finish();

  // Keys are sorted by the dump, so formatting differences do not change it.
  c.hash = fnv1a(doc.dump());
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("config error: cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace mrsde::cli
