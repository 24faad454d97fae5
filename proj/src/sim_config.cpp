#include "riga/sim_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace riga::harness {

namespace {

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot read " + what);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_at(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Finds a key path in the raw text to report a line number. Array steps are
// numbers; the n-th element is located by skipping n occurrences of the
// next key, which is good enough for hand-written configs.
class Locator {
 public:
  Locator(const std::string& text, std::string name) : text_(text), name_(std::move(name)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
    throw ConfigError(name_, line_of(path), message);
  }

  std::size_t line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    std::size_t skip = 0;
    bool found_any = false;
    for (const auto& step : path) {
      if (!step.empty() && std::all_of(step.begin(), step.end(), ::isdigit)) {
        skip = std::stoul(step);
        continue;
      }
      const std::string quoted = "\"" + step + "\"";
      std::size_t at = text_.find(quoted, pos);
      for (std::size_t i = 0; i < skip && at != std::string::npos; ++i) at = text_.find(quoted, at + 1);
      skip = 0;
      if (at == std::string::npos) break;
      pos = at;
      found_any = true;
    }
    return found_any ? line_at(text_, pos) : 0;
  }

  const std::string& name() const { return name_; }

 private:
  const std::string& text_;
  std::string name_;
};

using Path = std::vector<std::string>;

Path join(Path p, std::string step) {
  p.push_back(std::move(step));
  return p;
}

std::uint64_t get_u64(const nlohmann::json& obj, const char* key, std::uint64_t fallback, const Locator& loc,
                      const Path& at) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) loc.fail(join(at, key), std::string("\"") + key + "\" must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double get_number(const nlohmann::json& obj, const char* key, double fallback, const Locator& loc, const Path& at) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) loc.fail(join(at, key), std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

bool get_bool(const nlohmann::json& obj, const char* key, bool fallback, const Locator& loc, const Path& at) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) loc.fail(join(at, key), std::string("\"") + key + "\" must be true or false");
  return v.get<bool>();
}

const nlohmann::json* get_object(const nlohmann::json& obj, const char* key, const Locator& loc, const Path& at) {
  if (!obj.contains(key)) return nullptr;
  const auto& v = obj.at(key);
  if (!v.is_object()) loc.fail(join(at, key), std::string("\"") + key + "\" must be an object");
  return &v;
}

void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const Locator& loc,
                const Path& at) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      loc.fail(join(at, key), "unknown key \"" + key + "\"");
    }
  }
}

nlohmann::json parse_json(const std::string& text, const std::string& name) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t line = line_at(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    // Drop the library's "[json.exception.parse_error.101] " tag.
    if (auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(name, line, "invalid JSON: " + msg);
  }
}

}  // namespace

ConfigError::ConfigError(const std::string& file, std::size_t line, const std::string& message)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line),
      message_(message) {}

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::None: return "none";
    case ExperimentKind::Availability: return "availability";
    case ExperimentKind::GatewayMatrix: return "gateway_matrix";
  }
  return "none";
}

std::uint64_t SimConfig::required_duration_ms() const {
  std::uint64_t last = domain.start;
  bool redirect = false;
  for (const auto& c : commands) {
    last = std::max(last, c.counter);
    redirect = redirect || c.kind == agents::CommandKind::Redirect;
  }
  last = std::min(domain.upper, last + bots.lookback);
  const std::uint64_t attempts = bots.max_attempts ? bots.max_attempts : gateways.size();
  std::uint64_t per_tick = attempts * timeout_ms * (redirect ? 2 : 1) * (bots.lookback ? 2 : 1);
  per_tick = std::max(per_tick, domain.tick_ms);
  return (last - domain.start + 1) * per_tick;
}

SimConfig parse_sim_config(const std::string& text, const std::string& name,
                           std::optional<std::uint64_t> seed_override) {
  const Locator loc(text, name);
  const nlohmann::json j = parse_json(text, name);
  if (!j.is_object()) loc.fail({}, "top level must be an object");
  check_keys(j,
             {"master_seed", "bots", "gateways", "campaign", "domain", "timeout_ms", "commands", "duration_ms",
              "require_all_reached", "feedback", "experiment", "availability", "gateway_matrix"},
             loc, {});

  SimConfig c;
  c.master_seed = get_u64(j, "master_seed", 0, loc, {});
  if (seed_override) c.master_seed = *seed_override;

  if (const auto* b = get_object(j, "bots", loc, {})) {
    const Path at{"bots"};
    check_keys(*b, {"count", "seeders", "lookback", "max_attempts"}, loc, at);
    c.bots.count = get_u64(*b, "count", c.bots.count, loc, at);
    c.bots.seeders = get_u64(*b, "seeders", c.bots.seeders, loc, at);
    c.bots.lookback = get_u64(*b, "lookback", c.bots.lookback, loc, at);
    c.bots.max_attempts = get_u64(*b, "max_attempts", c.bots.max_attempts, loc, at);
    if (c.bots.count < 1) loc.fail({"bots", "count"}, "need at least one bot");
    if (c.bots.seeders > c.bots.count) loc.fail({"bots", "seeders"}, "more seeders than bots");
  }

  if (j.contains("gateways")) {
    if (!j["gateways"].is_string()) loc.fail({"gateways"}, "\"gateways\" must be a path");
    c.gateways_path = j["gateways"].get<std::string>();
    const std::string gw_text = read_file(*c.gateways_path, "gateway file");
    try {
      c.gateways = gateway::gateways_from_json(parse_json(gw_text, *c.gateways_path));
    } catch (const gateway::GatewayError& e) {
      throw ConfigError(*c.gateways_path, 0, e.what());
    }
  } else {
    c.gateways = gateway::default_gateways();
  }
  if (c.gateways.empty()) loc.fail({"gateways"}, "gateway list is empty");
  std::set<std::string> names;
  for (const auto& g : c.gateways) {
    if (!names.insert(g.name()).second) loc.fail({"gateways"}, "duplicate gateway \"" + g.name() + "\"");
  }

  if (j.contains("campaign")) {
    if (!j["campaign"].is_string()) loc.fail({"campaign"}, "\"campaign\" must be a path");
    c.campaign_path = j["campaign"].get<std::string>();
  }

  if (const auto* d = get_object(j, "domain", loc, {})) {
    const Path at{"domain"};
    check_keys(*d, {"start", "upper", "tick_seconds"}, loc, at);
    c.domain.start = get_u64(*d, "start", c.domain.start, loc, at);
    c.domain.upper = get_u64(*d, "upper", c.domain.upper, loc, at);
    const double tick = get_number(*d, "tick_seconds", static_cast<double>(c.domain.tick_ms) / 1000.0, loc, at);
    if (!(tick > 0)) loc.fail({"domain", "tick_seconds"}, "tick must be positive");
    c.domain.tick_ms = static_cast<std::uint64_t>(std::llround(tick * 1000.0));
    try {
      c.domain.validate();
    } catch (const core::RigaError& e) {
      loc.fail(at, e.what());
    }
  }

  c.timeout_ms = get_u64(j, "timeout_ms", c.timeout_ms, loc, {});
  if (c.timeout_ms == 0) loc.fail({"timeout_ms"}, "timeout must be positive");

  if (j.contains("commands")) {
    if (!j["commands"].is_array()) loc.fail({"commands"}, "\"commands\" must be an array");
    std::set<std::uint64_t> counters;
    for (std::size_t i = 0; i < j["commands"].size(); ++i) {
      const auto& cj = j["commands"][i];
      const Path at{"commands", std::to_string(i), "counter"};
      const Path base{"commands", std::to_string(i)};
      if (!cj.is_object()) loc.fail(base, "command must be an object");
      check_keys(cj, {"counter", "kind", "text", "publish_at_ms", "fill_at_ms"}, loc, base);
      CommandSpec cmd;
      if (!cj.contains("counter")) loc.fail(base, "command needs a \"counter\"");
      cmd.counter = get_u64(cj, "counter", 0, loc, base);
      if (!c.domain.contains(cmd.counter)) loc.fail(at, "counter " + std::to_string(cmd.counter) + " is outside the domain");
      if (!counters.insert(cmd.counter).second) loc.fail(at, "duplicate counter " + std::to_string(cmd.counter));
      if (cj.contains("kind") && !cj["kind"].is_string()) loc.fail(join(base, "kind"), "kind must be a string");
      const std::string kind = cj.value("kind", "direct");
      if (kind == "direct") cmd.kind = agents::CommandKind::Direct;
      else if (kind == "redirect") cmd.kind = agents::CommandKind::Redirect;
      else loc.fail(join(base, "kind"), "kind must be \"direct\" or \"redirect\"");
      if (!cj.contains("text") || !cj["text"].is_string()) loc.fail(base, "command needs a \"text\" string");
      cmd.text = cj["text"].get<std::string>();
      cmd.publish_at_ms = get_u64(cj, "publish_at_ms", 0, loc, base);
      cmd.fill_at_ms = get_u64(cj, "fill_at_ms", cmd.publish_at_ms, loc, base);
      if (cmd.kind == agents::CommandKind::Direct && cj.contains("fill_at_ms")) {
        loc.fail(join(base, "fill_at_ms"), "only redirect commands have a fill time");
      }
      c.commands.push_back(std::move(cmd));
    }
  }

  c.require_all_reached = get_bool(j, "require_all_reached", c.require_all_reached, loc, {});

  if (const auto* f = get_object(j, "feedback", loc, {})) {
    const Path at{"feedback"};
    check_keys(*f, {"enabled", "unpin_after"}, loc, at);
    c.feedback.enabled = get_bool(*f, "enabled", c.feedback.enabled, loc, at);
    c.feedback.unpin_after = get_bool(*f, "unpin_after", c.feedback.unpin_after, loc, at);
  }

  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    const std::string kind = e.is_string() ? e.get<std::string>() : "";
    if (kind == "none") c.experiment = ExperimentKind::None;
    else if (kind == "availability") c.experiment = ExperimentKind::Availability;
    else if (kind == "gateway_matrix") c.experiment = ExperimentKind::GatewayMatrix;
    else loc.fail({"experiment"}, "experiment must be \"none\", \"availability\" or \"gateway_matrix\"");
  }

  if (const auto* a = get_object(j, "availability", loc, {})) {
    const Path at{"availability"};
    check_keys(*a, {"n", "object_bytes", "timeout_ms", "fastest", "window_ms", "calibrate_mean_ms", "sigma",
                    "max_attempts"},
               loc, at);
    auto& s = c.availability;
    s.n = get_u64(*a, "n", s.n, loc, at);
    s.object_bytes = get_u64(*a, "object_bytes", s.object_bytes, loc, at);
    s.timeout_ms = get_u64(*a, "timeout_ms", s.timeout_ms, loc, at);
    s.fastest = get_u64(*a, "fastest", s.fastest, loc, at);
    s.window_ms = get_u64(*a, "window_ms", s.window_ms, loc, at);
    s.sigma = get_number(*a, "sigma", s.sigma, loc, at);
    s.max_attempts = get_u64(*a, "max_attempts", s.max_attempts, loc, at);
    if (a->contains("calibrate_mean_ms")) {
      if ((*a)["calibrate_mean_ms"].is_null()) s.calibrate_mean_ms.reset();
      else s.calibrate_mean_ms = get_number(*a, "calibrate_mean_ms", 0, loc, at);
    }
    if (s.timeout_ms == 0) loc.fail(join(at, "timeout_ms"), "timeout must be positive");
    if (s.fastest == 0) loc.fail(join(at, "fastest"), "need at least one gateway");
    if (s.window_ms == 0) loc.fail(join(at, "window_ms"), "window must be positive");
    if (s.max_attempts == 0) loc.fail(join(at, "max_attempts"), "need at least one attempt");
    if (!(s.sigma > 0)) loc.fail(join(at, "sigma"), "sigma must be positive");
    if (s.calibrate_mean_ms && !(*s.calibrate_mean_ms > 0)) {
      loc.fail(join(at, "calibrate_mean_ms"), "calibration target must be positive");
    }
  }

  if (const auto* m = get_object(j, "gateway_matrix", loc, {})) {
    const Path at{"gateway_matrix"};
    check_keys(*m, {"cids", "repeats", "timeouts_ms", "rate_limit_s", "object_bytes"}, loc, at);
    auto& s = c.matrix;
    s.cids = get_u64(*m, "cids", s.cids, loc, at);
    s.repeats = static_cast<std::uint32_t>(get_u64(*m, "repeats", s.repeats, loc, at));
    s.rate_limit_s = get_number(*m, "rate_limit_s", s.rate_limit_s, loc, at);
    s.object_bytes = get_u64(*m, "object_bytes", s.object_bytes, loc, at);
    if (m->contains("timeouts_ms")) {
      const auto& t = (*m)["timeouts_ms"];
      if (!t.is_array() || t.empty()) loc.fail(join(at, "timeouts_ms"), "\"timeouts_ms\" must be a non-empty array");
      s.timeouts_ms.clear();
      for (const auto& v : t) {
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
          loc.fail(join(at, "timeouts_ms"), "timeouts must be positive integers");
        }
        s.timeouts_ms.push_back(v.get<std::uint64_t>());
      }
    }
    if (s.repeats == 0) loc.fail(join(at, "repeats"), "repeats must be at least 1");
    if (!(s.rate_limit_s >= 0)) loc.fail(join(at, "rate_limit_s"), "rate must be non-negative");
  }

  c.duration_ms = get_u64(j, "duration_ms", 0, loc, {});
  if (c.experiment == ExperimentKind::None && c.duration_ms != 0 && c.duration_ms < c.required_duration_ms()) {
    loc.fail({"duration_ms"}, "duration " + std::to_string(c.duration_ms) +
                                  " ms is too short to reach the largest anchor counter; need at least " +
                                  std::to_string(c.required_duration_ms()) + " ms (or 0 for automatic)");
  }
  return c;
}

SimConfig load_sim_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  return parse_sim_config(read_file(path, "config file"), path, seed_override);
}

nlohmann::ordered_json sim_config_to_json(const SimConfig& c) {
  nlohmann::ordered_json j;
  j["master_seed"] = c.master_seed;
  j["bots"] = {{"count", c.bots.count},
               {"seeders", c.bots.seeders},
               {"lookback", c.bots.lookback},
               {"max_attempts", c.bots.max_attempts}};
  j["gateways"] = gateway::gateways_to_json(c.gateways);
  if (c.campaign_path) j["campaign"] = *c.campaign_path;
  j["domain"] = {{"start", c.domain.start}, {"upper", c.domain.upper}, {"tick_seconds", static_cast<double>(c.domain.tick_ms) / 1000.0}};
  j["timeout_ms"] = c.timeout_ms;
  auto cmds = nlohmann::ordered_json::array();
  for (const auto& cmd : c.commands) {
    nlohmann::ordered_json o;
    o["counter"] = cmd.counter;
    o["kind"] = cmd.kind == agents::CommandKind::Direct ? "direct" : "redirect";
    o["text"] = cmd.text;
    o["publish_at_ms"] = cmd.publish_at_ms;
    if (cmd.kind == agents::CommandKind::Redirect) o["fill_at_ms"] = cmd.fill_at_ms;
    cmds.push_back(std::move(o));
  }
  j["commands"] = std::move(cmds);
  j["duration_ms"] = c.effective_duration_ms();
  j["require_all_reached"] = c.require_all_reached;
  j["feedback"] = {{"enabled", c.feedback.enabled}, {"unpin_after", c.feedback.unpin_after}};
  j["experiment"] = to_string(c.experiment);
  return j;
}

}  // namespace riga::harness
