#include "opirl/cli/config.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "opirl/numcore/checkpoint.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

namespace {

using Values = std::vector<std::string>;

struct Field {
  std::string key;
  std::string type;
  std::function<void(RunConfig&, const Values&)> set;
  std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& type, const Values& v) {
  std::string got;
  for (const auto& s : v) got += (got.empty() ? "" : " ") + s;
  throw ConfigError("key '" + key + "' expects " + type + ", got '" + got + "'");
}

const std::string& single(const std::string& key, const std::string& type, const Values& v) {
  if (v.size() != 1) bad_value(key, type, v);
  return v.front();
}

double to_real(const std::string& key, const Values& v) {
  const std::string& s = single(key, "a real number", v);
  double out = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) bad_value(key, "a real number", v);
  return out;
}

std::int64_t to_int(const std::string& key, const Values& v) {
  const std::string& s = single(key, "an integer", v);
  std::int64_t out = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) bad_value(key, "an integer", v);
  return out;
}

bool to_bool(const std::string& key, const Values& v) {
  const std::string& s = single(key, "a boolean", v);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  bad_value(key, "a boolean", v);
}

std::vector<Index> to_sizes(const std::string& key, const Values& v) {
  std::vector<Index> out;
  for (const auto& item : v) {
    std::istringstream in(item);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      std::istringstream ws(tok);
      std::string t;
      while (ws >> t) out.push_back(to_int(key, {t}));
    }
  }
  if (out.empty()) bad_value(key, "a list of layer sizes", v);
  return out;
}

std::string sizes_text(const std::vector<Index>& sizes) {
  std::string out;
  for (Index s : sizes) out += (out.empty() ? "" : ",") + std::to_string(s);
  return out;
}

std::string real_text(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

template <typename Config>
using Member = std::function<Config&(RunConfig&)>;

template <typename Config, typename T>
const T& read(const RunConfig& rc, T Config::*field) {
  if constexpr (std::is_same_v<Config, OpirlConfig>) {
    return rc.agent.*field;
  } else {
    return rc.expert.*field;
  }
}

template <typename Config, typename T>
T& write(RunConfig& rc, T Config::*field) {
  if constexpr (std::is_same_v<Config, OpirlConfig>) {
    return rc.agent.*field;
  } else {
    return rc.expert.*field;
  }
}

template <typename Config>
void add_real(std::vector<Field>& out, const std::string& key, double Config::*f) {
  out.push_back({key, "a real number", [key, f](RunConfig& rc, const Values& v) { write(rc, f) = to_real(key, v); },
                 [f](const RunConfig& rc) { return format_double(read(rc, f)); }});
}

template <typename Config>
void add_optional_real(std::vector<Field>& out, const std::string& key, std::optional<double> Config::*f) {
  out.push_back({key, "a real number or none",
                 [key, f](RunConfig& rc, const Values& v) {
                   if (v.size() == 1 && v.front() == "none") {
                     write(rc, f).reset();
                   } else {
                     write(rc, f) = to_real(key, v);
                   }
                 },
                 [f](const RunConfig& rc) { return real_text(read(rc, f)); }});
}

template <typename Config, typename I>
void add_int(std::vector<Field>& out, const std::string& key, I Config::*f) {
  out.push_back({key, "an integer",
                 [key, f](RunConfig& rc, const Values& v) { write(rc, f) = static_cast<I>(to_int(key, v)); },
                 [f](const RunConfig& rc) { return std::to_string(read(rc, f)); }});
}

template <typename Config>
void add_bool(std::vector<Field>& out, const std::string& key, bool Config::*f) {
  out.push_back({key, "a boolean", [key, f](RunConfig& rc, const Values& v) { write(rc, f) = to_bool(key, v); },
                 [f](const RunConfig& rc) { return std::string(read(rc, f) ? "true" : "false"); }});
}

template <typename Config>
void add_sizes(std::vector<Field>& out, const std::string& key, std::vector<Index> Config::*f) {
  out.push_back({key, "a list of layer sizes",
                 [key, f](RunConfig& rc, const Values& v) { write(rc, f) = to_sizes(key, v); },
                 [f](const RunConfig& rc) { return sizes_text(read(rc, f)); }});
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    using A = OpirlConfig;
    add_real<A>(t, "agent.gamma", &A::gamma);
    add_real<A>(t, "agent.tau", &A::tau);
    add_real<A>(t, "agent.actor_lr", &A::actor_lr);
    add_real<A>(t, "agent.critic_lr", &A::critic_lr);
    add_real<A>(t, "agent.disc_lr", &A::disc_lr);
    add_real<A>(t, "agent.temperature_lr", &A::temperature_lr);
    add_real<A>(t, "agent.actor_j_weight", &A::actor_j_weight);
    add_optional_real<A>(t, "agent.bc_weight", &A::bc_weight);
    add_real<A>(t, "agent.target_mix", &A::target_mix);
    add_real<A>(t, "agent.gp_weight", &A::gp_weight);
    add_real<A>(t, "agent.divergence_p", &A::divergence_p);
    add_real<A>(t, "agent.divergence_c", &A::divergence_c);
    add_int<A>(t, "agent.batch_size", &A::batch_size);
    add_sizes<A>(t, "agent.hidden", &A::hidden);
    add_sizes<A>(t, "agent.reward_hidden", &A::reward_hidden);
    add_sizes<A>(t, "agent.potential_hidden", &A::potential_hidden);
    add_optional_real<A>(t, "agent.target_entropy", &A::target_entropy);
    add_real<A>(t, "agent.initial_eta", &A::initial_eta);
    add_int<A>(t, "agent.total_steps", &A::total_steps);
    add_int<A>(t, "agent.warmup_steps", &A::warmup_steps);
    add_int<A>(t, "agent.irl_steps", &A::irl_steps);
    add_int<A>(t, "agent.rl_steps", &A::rl_steps);
    add_int<A>(t, "agent.eval_interval", &A::eval_interval);
    add_int<A>(t, "agent.eval_episodes", &A::eval_episodes);
    add_int<A>(t, "agent.buffer_capacity", &A::buffer_capacity);
    add_bool<A>(t, "agent.use_bc", &A::use_bc);
    add_bool<A>(t, "agent.use_qfilter", &A::use_qfilter);
    t.push_back({"agent.bc_source", "replay or expert",
                 [](RunConfig& rc, const Values& v) {
                   const std::string& s = single("agent.bc_source", "replay or expert", v);
                   if (s != "replay" && s != "expert") bad_value("agent.bc_source", "replay or expert", v);
                   rc.agent.bc_source = parse_bc_source(s);
                 },
                 [](const RunConfig& rc) { return std::string(bc_source_name(rc.agent.bc_source)); }});
    add_bool<A>(t, "agent.absorbing", &A::absorbing);
    add_bool<A>(t, "agent.normalize_observations", &A::normalize_observations);
    add_optional_real<A>(t, "agent.stop_at_return", &A::stop_at_return);

    using S = SacConfig;
    add_real<S>(t, "expert.gamma", &S::gamma);
    add_real<S>(t, "expert.tau", &S::tau);
    add_real<S>(t, "expert.actor_lr", &S::actor_lr);
    add_real<S>(t, "expert.critic_lr", &S::critic_lr);
    add_real<S>(t, "expert.alpha_lr", &S::alpha_lr);
    add_int<S>(t, "expert.batch_size", &S::batch_size);
    add_sizes<S>(t, "expert.hidden", &S::hidden);
    add_optional_real<S>(t, "expert.target_entropy", &S::target_entropy);
    add_real<S>(t, "expert.initial_alpha", &S::initial_alpha);
    add_int<S>(t, "expert.total_steps", &S::total_steps);
    add_int<S>(t, "expert.warmup_steps", &S::warmup_steps);
    add_int<S>(t, "expert.updates_per_step", &S::updates_per_step);
    add_int<S>(t, "expert.eval_interval", &S::eval_interval);
    add_int<S>(t, "expert.eval_episodes", &S::eval_episodes);
    add_int<S>(t, "expert.buffer_capacity", &S::buffer_capacity);
    return t;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  std::string valid;
  for (const auto& f : fields()) valid += (valid.empty() ? "" : ", ") + f.key;
  throw ConfigError("unknown configuration key '" + key + "'; valid keys: " + valid);
}

void resolve_and_validate(RunConfig& rc) {
  if (rc.agent.buffer_capacity == 0) rc.agent.buffer_capacity = 2 * rc.agent.total_steps;
  if (rc.expert.buffer_capacity == 0) rc.expert.buffer_capacity = 2 * rc.expert.total_steps;
  try {
    rc.agent.validate();
    rc.expert.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
  RunConfig rc;
  CLI::ConfigTOML reader;
  std::vector<CLI::ConfigItem> items;
  try {
    items = reader.from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    find_field(item.fullname()).set(rc, item.inputs);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form section.key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    find_field(trim(o.substr(0, eq))).set(rc, {trim(o.substr(eq + 1))});
  }
  resolve_and_validate(rc);
  return rc;
}

RunConfig load_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides) {
  if (!path) {
    std::istringstream empty;
    return parse_config(empty, overrides);
  }
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open configuration file " + path->string());
  return parse_config(in, overrides);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

std::map<std::string, std::string> describe_config(const RunConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

}  // namespace opirl
