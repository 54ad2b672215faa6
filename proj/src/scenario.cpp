#include "attsync/scenario.hpp"

#include "attsync/random.hpp"
#include "attsync/so3.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace attsync {

using nlohmann::json;

ConfigError::ConfigError(const std::string& message, std::string pointer, std::size_t line)
    : Error([&] {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ": ";
        os << message;
        if (!pointer.empty()) os << " (at " << pointer << ")";
        return os.str();
      }()),
      message_(message),
      pointer_(std::move(pointer)),
      line_(line) {}

namespace {

// ---------------------------------------------------------------------------
// Line anchoring: replay the text through a SAX handler that records the line
// on which each JSON pointer's value starts.

struct TrackingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  const char** head = nullptr;

  reference operator*() const { return *p; }
  TrackingIterator& operator++() {
    ++p;
    *head = p;
    return *this;
  }
  TrackingIterator operator++(int) {
    TrackingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const TrackingIterator& o) const { return p == o.p; }
  bool operator!=(const TrackingIterator& o) const { return p != o.p; }
};

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class LineLocator : public nlohmann::json_sax<json> {
 public:
  LineLocator(std::string_view text, const char** head) : text_(text), head_(head) {}

  std::map<std::string, std::size_t> lines;

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t&) override { return scalar(); }
  bool string(string_t&) override { return scalar(); }
  bool binary(binary_t&) override { return scalar(); }
  bool start_object(std::size_t) override {
    begin_value();
    frames_.push_back({false, 0, {}});
    return true;
  }
  bool key(string_t& k) override {
    frames_.back().key = k;
    return true;
  }
  bool end_object() override {
    frames_.pop_back();
    end_value();
    return true;
  }
  bool start_array(std::size_t) override {
    begin_value();
    frames_.push_back({true, 0, {}});
    return true;
  }
  bool end_array() override {
    frames_.pop_back();
    end_value();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
  };

  bool scalar() {
    begin_value();
    end_value();
    return true;
  }
  void begin_value() {
    // The lexer may have read one character past the token; anchor on the
    // last non-blank character consumed.
    std::size_t pos = static_cast<std::size_t>(*head_ - text_.data());
    while (pos > 0 && std::isspace(static_cast<unsigned char>(text_[pos - 1]))) --pos;
    lines.emplace(pointer(), line_of_offset(text_, pos > 0 ? pos - 1 : 0));
  }
  void end_value() {
    if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
  }
  std::string pointer() const {
    std::string out;
    for (const Frame& f : frames_) {
      out += '/';
      out += f.array ? std::to_string(f.index) : escape_token(f.key);
    }
    return out;
  }

  std::string_view text_;
  const char** head_;
  std::vector<Frame> frames_;
};

std::size_t locate(std::string_view text, std::string pointer) {
  const char* head = text.data();
  LineLocator locator(text, &head);
  TrackingIterator first{text.data(), &head};
  TrackingIterator last{text.data() + text.size(), &head};
  json::sax_parse(first, last, &locator);
  while (true) {
    if (auto it = locator.lines.find(pointer); it != locator.lines.end()) return it->second;
    if (pointer.empty()) return 0;
    pointer.erase(pointer.rfind('/'));
  }
}

// ---------------------------------------------------------------------------
// Schema reading.

struct SchemaError {
  std::string message;
  std::string pointer;
};

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw SchemaError{message, pointer};
}

void only_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ptr, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&k](const char* a) { return k == a; })) {
      fail(ptr + "/" + escape_token(k), "unknown key '" + k + "'");
    }
  }
}

const json& require(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.contains(key)) fail(ptr, std::string("missing required key '") + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& ptr) {
  if (!v.is_number()) fail(ptr, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(ptr, "expected a finite number");
  return d;
}

double positive(const json& v, const std::string& ptr) {
  const double d = number(v, ptr);
  if (!(d > 0.0)) fail(ptr, "expected a positive number");
  return d;
}

std::uint64_t unsigned_integer(const json& v, const std::string& ptr) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(ptr, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& ptr) {
  if (!v.is_boolean()) fail(ptr, "expected true or false");
  return v.get<bool>();
}

std::optional<double> parse_random_init(const std::string& s) {
  constexpr std::string_view prefix = "random(";
  if (s.size() <= prefix.size() + 1 || s.compare(0, prefix.size(), prefix) != 0 || s.back() != ')') {
    return std::nullopt;
  }
  const char* begin = s.data() + prefix.size();
  const char* end = s.data() + s.size() - 1;
  double value = 0.0;
  const auto [p, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || p != end) return std::nullopt;
  return value;
}

InitSpec read_init(const json& v, const std::string& ptr) {
  if (v.is_string()) {
    const auto c = parse_random_init(v.get<std::string>());
    if (!c) fail(ptr, "init string must be random(C)");
    if (!(*c > 0.0 && *c < std::numbers::pi)) fail(ptr, "random(C) needs 0 < C < pi");
    return RandomInit{*c};
  }
  if (!v.is_array() || (v.size() != 3 && v.size() != 9)) {
    fail(ptr, "init must be an axis-angle triple, a row-major 3x3 rotation (9 numbers) or random(C)");
  }
  if (v.size() == 3) {
    std::array<double, 3> a{};
    for (std::size_t k = 0; k < 3; ++k) a[k] = number(v[k], ptr + "/" + std::to_string(k));
    return a;
  }
  std::array<double, 9> m{};
  for (std::size_t k = 0; k < 9; ++k) m[k] = number(v[k], ptr + "/" + std::to_string(k));
  Eigen::Matrix3d mat;
  mat << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
  try {
    (void)log_map(Rotation(mat));
  } catch (const AngleNearPi&) {
    fail(ptr, "rotation angle must be below pi for an axis-angle representation");
  } catch (const Error&) {
    fail(ptr, "init matrix is not a rotation (orthogonal, det +1, tolerance 1e-9)");
  }
  return m;
}

ControllerKind read_controller(const json& v, const std::string& ptr) {
  only_keys(v, ptr, {"kind", "gain", "saturation"});
  const json& kind = require(v, ptr, "kind");
  if (!kind.is_string()) fail(ptr + "/kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "sign" || k == "sign_c") {
    if (v.contains("gain") || v.contains("saturation")) {
      fail(ptr, "gain and saturation only apply to lipschitz controllers");
    }
    if (k == "sign") return SignDirectional{};
    return SignComponentwise{};
  }
  if (k == "lipschitz") {
    LipschitzDirectional lip;
    if (v.contains("gain")) lip.gain = positive(v.at("gain"), ptr + "/gain");
    if (v.contains("saturation")) lip.saturation = positive(v.at("saturation"), ptr + "/saturation");
    return lip;
  }
  fail(ptr + "/kind", "controller kind must be sign, sign_c or lipschitz");
}

IntegratorConfig read_integrator(const json& v, const std::string& ptr) {
  only_keys(v, ptr,
            {"h", "t_max", "mode", "epsilon", "record_every", "chatter_factor", "track_rotations",
             "reorthonormalize_rotations"});
  IntegratorConfig c;
  c.h = positive(require(v, ptr, "h"), ptr + "/h");
  c.t_max = positive(require(v, ptr, "t_max"), ptr + "/t_max");
  if (v.contains("mode")) {
    const json& m = v.at("mode");
    if (m == "deadband") {
      c.mode = SignMode::Deadband;
    } else if (m == "smoothed") {
      c.mode = SignMode::Smoothed;
    } else {
      fail(ptr + "/mode", "mode must be deadband or smoothed");
    }
  }
  if (v.contains("epsilon")) c.epsilon = positive(v.at("epsilon"), ptr + "/epsilon");
  if (v.contains("record_every")) {
    c.record_every = unsigned_integer(v.at("record_every"), ptr + "/record_every");
    if (c.record_every == 0) fail(ptr + "/record_every", "record_every must be at least 1");
  }
  if (v.contains("chatter_factor")) {
    c.chatter_factor = number(v.at("chatter_factor"), ptr + "/chatter_factor");
    if (c.chatter_factor < 0.0) fail(ptr + "/chatter_factor", "chatter_factor must be non-negative");
  }
  if (v.contains("track_rotations")) {
    c.track_rotations = boolean(v.at("track_rotations"), ptr + "/track_rotations");
  }
  if (v.contains("reorthonormalize_rotations")) {
    c.reorthonormalize_rotations =
        boolean(v.at("reorthonormalize_rotations"), ptr + "/reorthonormalize_rotations");
  }
  return c;
}

SlidingSpec read_sliding(const json& v, const std::string& ptr) {
  only_keys(v, ptr, {"xbar", "eps1", "t0", "t_end", "samples"});
  SlidingSpec s;
  const json& xbar = require(v, ptr, "xbar");
  if (!xbar.is_array() || xbar.size() != 3) fail(ptr + "/xbar", "xbar must be a triple");
  for (std::size_t k = 0; k < 3; ++k) s.xbar[k] = number(xbar[k], ptr + "/xbar/" + std::to_string(k));
  if (s.xbar[0] == 0.0 && s.xbar[1] == 0.0 && s.xbar[2] == 0.0) fail(ptr + "/xbar", "xbar must be nonzero");
  s.eps1 = number(require(v, ptr, "eps1"), ptr + "/eps1");
  if (!(s.eps1 > 0.0 && s.eps1 < 1.0)) fail(ptr + "/eps1", "eps1 must lie in (0, 1)");
  if (v.contains("t0")) s.t0 = number(v.at("t0"), ptr + "/t0");
  s.t_end = number(require(v, ptr, "t_end"), ptr + "/t_end");
  if (!(s.t_end > s.t0)) fail(ptr + "/t_end", "t_end must be greater than t0");
  if (v.contains("samples")) {
    s.samples = unsigned_integer(v.at("samples"), ptr + "/samples");
    if (s.samples < 2) fail(ptr + "/samples", "samples must be at least 2");
  }
  return s;
}

ScenarioFile read_scenario(const json& root) {
  only_keys(root, "", {"name", "agents", "edges", "protocol", "integrator", "tolerance", "seed", "sliding"});
  ScenarioFile s;

  const json& name = require(root, "", "name");
  if (!name.is_string()) fail("/name", "expected a string");
  s.name = name.get<std::string>();

  const json& protocol = require(root, "", "protocol");
  if (protocol != 1 && protocol != 2) fail("/protocol", "protocol must be 1 or 2");
  s.protocol = protocol.get<int>();

  const json& agents = require(root, "", "agents");
  if (!agents.is_array() || agents.size() < 2) fail("/agents", "agents must be an array of at least two entries");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string ptr = "/agents/" + std::to_string(i);
    const json& a = agents[i];
    only_keys(a, ptr, {"init", "controller"});
    AgentSpec spec;
    spec.init = read_init(require(a, ptr, "init"), ptr + "/init");
    if (a.contains("controller")) spec.controller = read_controller(a.at("controller"), ptr + "/controller");
    if (s.protocol == 1 && !spec.controller) fail(ptr, "protocol 1 needs a controller for every agent");
    if (s.protocol == 2 && spec.controller && !std::holds_alternative<SignComponentwise>(*spec.controller)) {
      fail(ptr + "/controller", "protocol 2 fixes every agent to sign_c; per-agent controllers cannot be mixed in");
    }
    s.agents.push_back(spec);
  }

  const json& edges = require(root, "", "edges");
  if (!edges.is_array()) fail("/edges", "edges must be an array");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string ptr = "/edges/" + std::to_string(k);
    const json& e = edges[k];
    if (!e.is_array() || (e.size() != 2 && e.size() != 3)) fail(ptr, "edge must be [i, j] or [i, j, weight]");
    const std::uint64_t i = unsigned_integer(e[0], ptr + "/0");
    const std::uint64_t j = unsigned_integer(e[1], ptr + "/1");
    if (i < 1 || i > s.agents.size() || j < 1 || j > s.agents.size()) {
      fail(ptr, "agent indices are 1-based and must not exceed the number of agents");
    }
    if (i == j) fail(ptr, "self-loops are not allowed");
    if (!seen.emplace(std::min(i, j), std::max(i, j)).second) fail(ptr, "duplicate edge");
    const double w = e.size() == 3 ? positive(e[2], ptr + "/2") : 1.0;
    s.edges.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), w});
  }

  s.integrator = read_integrator(require(root, "", "integrator"), "/integrator");
  if (root.contains("tolerance")) s.tolerance = positive(root.at("tolerance"), "/tolerance");
  if (root.contains("seed")) s.seed = unsigned_integer(root.at("seed"), "/seed");
  if (root.contains("sliding")) s.sliding = read_sliding(root.at("sliding"), "/sliding");
  return s;
}

// ---------------------------------------------------------------------------
// Writing.

json controller_json(const ControllerKind& k) {
  json j{{"kind", controller_name(k)}};
  if (const auto* lip = std::get_if<LipschitzDirectional>(&k)) {
    j["gain"] = lip->gain;
    if (lip->saturation) j["saturation"] = *lip->saturation;
  }
  return j;
}

json init_json(const InitSpec& init) {
  if (const auto* r = std::get_if<RandomInit>(&init)) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, r->max_norm);
    return "random(" + std::string(buf, res.ptr) + ")";
  }
  if (const auto* a = std::get_if<std::array<double, 3>>(&init)) return *a;
  return std::get<std::array<double, 9>>(init);
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "",
                      line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  try {
    return read_scenario(root);
  } catch (const SchemaError& e) {
    throw ConfigError(e.message, e.pointer, locate(text, e.pointer));
  }
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file " + path.string(), "", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const ScenarioFile& s) {
  json root;
  root["name"] = s.name;
  root["protocol"] = s.protocol;
  json agents = json::array();
  for (const AgentSpec& a : s.agents) {
    json j{{"init", init_json(a.init)}};
    if (a.controller) j["controller"] = controller_json(*a.controller);
    agents.push_back(j);
  }
  root["agents"] = agents;
  json edges = json::array();
  for (const Edge& e : s.edges) edges.push_back(json::array({e.i + 1, e.j + 1, e.weight}));
  root["edges"] = edges;
  const IntegratorConfig& c = s.integrator;
  root["integrator"] = {{"h", c.h},
                        {"t_max", c.t_max},
                        {"mode", c.mode == SignMode::Deadband ? "deadband" : "smoothed"},
                        {"epsilon", c.epsilon},
                        {"record_every", c.record_every},
                        {"chatter_factor", c.chatter_factor},
                        {"track_rotations", c.track_rotations},
                        {"reorthonormalize_rotations", c.reorthonormalize_rotations}};
  root["tolerance"] = s.tolerance;
  root["seed"] = s.seed;
  if (s.sliding) {
    root["sliding"] = {{"xbar", s.sliding->xbar},
                       {"eps1", s.sliding->eps1},
                       {"t0", s.sliding->t0},
                       {"t_end", s.sliding->t_end},
                       {"samples", s.sliding->samples}};
  }
  return root.dump(2) + "\n";
}

ProtocolConfig protocol_config(const ScenarioFile& s) {
  Topology topo(s.agents.size(), s.edges);
  if (s.protocol == 2) return ProtocolConfig::componentwise(std::move(topo));
  std::vector<ControllerKind> kinds;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    if (!s.agents[i].controller) {
      throw ConfigError("protocol 1 needs a controller for every agent", "/agents/" + std::to_string(i), 0);
    }
    kinds.push_back(*s.agents[i].controller);
  }
  return ProtocolConfig::direction_preserving(std::move(topo), std::move(kinds));
}

StackedState initial_state(const ScenarioFile& s, std::uint64_t trial) {
  SplitMix64 rng = trial_stream(s.seed, trial);
  std::vector<AxisAngle> agents;
  for (const AgentSpec& a : s.agents) {
    if (const auto* r = std::get_if<RandomInit>(&a.init)) {
      agents.push_back(random_axis_angle(rng, r->max_norm));
    } else if (const auto* v = std::get_if<std::array<double, 3>>(&a.init)) {
      agents.emplace_back((*v)[0], (*v)[1], (*v)[2]);
    } else {
      const auto& m = std::get<std::array<double, 9>>(a.init);
      Eigen::Matrix3d mat;
      mat << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
      agents.push_back(log_map(Rotation(mat)));
    }
  }
  return StackedState::from_agents(agents);
}

namespace {

AgentSpec agent(std::array<double, 3> x, std::optional<ControllerKind> c) { return {x, c}; }

ScenarioFile example2_base(const std::string& name) {
  ScenarioFile s;
  s.name = name;
  s.protocol = 1;
  s.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
  s.integrator.h = 1e-4;
  s.integrator.record_every = 100;
  return s;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"example2-ftc", "example2-asymptotic", "example1-sliding",
                                              "example1-sliding-analytic", "protocol2-path"};
  return names;
}

ScenarioFile builtin_scenario(const std::string& name) {
  if (name == "example2-ftc") {
    // Line graph; agent 1 Lipschitz, agents 2 and 3 sign. Initial values are
    // arbitrary but fixed.
    ScenarioFile s = example2_base(name);
    s.agents = {agent({0.9, -0.4, 0.3}, LipschitzDirectional{}),
                agent({-0.6, 0.8, 0.1}, SignDirectional{}),
                agent({0.2, 0.3, -1.1}, SignDirectional{})};
    s.integrator.t_max = 4.0;
    return s;
  }
  if (name == "example2-asymptotic") {
    // Agents 1 and 3 Lipschitz with x1(0) = -x3(0), x2(0) = 0.
    ScenarioFile s = example2_base(name);
    s.agents = {agent({1.0, 0.0, 0.0}, LipschitzDirectional{}),
                agent({0.0, 0.0, 0.0}, SignDirectional{}),
                agent({-1.0, 0.0, 0.0}, LipschitzDirectional{})};
    s.integrator.h = 1e-5;
    s.integrator.record_every = 1000;
    s.integrator.t_max = 5.0;
    return s;
  }
  if (name == "example1-sliding" || name == "example1-sliding-analytic") {
    ScenarioFile s;
    s.name = name;
    s.protocol = 1;
    s.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}};
    s.integrator.h = 1e-3;
    s.integrator.t_max = 5.0;
    s.integrator.record_every = 10;
    if (name == "example1-sliding") {
      s.agents = {agent({0.5, 0.2, -0.3}, SignDirectional{}), agent({-0.4, 0.6, 0.1}, SignDirectional{}),
                  agent({0.1, -0.5, 0.7}, SignDirectional{})};
    } else {
      // ‖x̄‖ = 3 exactly; sliding outward at speed 0.5 reaches π at 2(π − 3).
      const std::array<double, 3> xbar{2.0, 2.0, 1.0};
      s.agents = {agent(xbar, SignDirectional{}), agent(xbar, SignDirectional{}), agent(xbar, SignDirectional{})};
      s.sliding = SlidingSpec{xbar, 0.5, 0.0, 1.0, 100};
      s.tolerance = 1e-12;
    }
    return s;
  }
  if (name == "protocol2-path") {
    ScenarioFile s;
    s.name = name;
    s.protocol = 2;
    s.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
    s.agents = {agent({0.6, -0.3, 0.2}, std::nullopt), agent({-0.4, 0.5, -0.1}, std::nullopt),
                agent({0.2, 0.1, 0.7}, std::nullopt)};
    s.integrator.h = 1e-3;
    s.integrator.t_max = 10.0;
    s.integrator.record_every = 10;
    return s;
  }
  throw ConfigError("unknown builtin scenario '" + name + "'", "", 0);
}

}  // namespace attsync
