#include "opirl/replay/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "opirl/numcore/errors.hpp"

namespace opirl {

namespace {

using json = nlohmann::json;

void write_number(std::ostream& out, double v) {
  if (!std::isfinite(v)) throw NumericalError("trajectory holds a non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void write_vector(std::ostream& out, const Vector& v) {
  out << '[';
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    write_number(out, v[i]);
  }
  out << ']';
}

Vector read_vector(const json& j, Index expected, const std::string& what, std::size_t line) {
  if (!j.is_array()) throw ParseError(line, what + " is not an array");
  if (static_cast<Index>(j.size()) != expected) {
    throw SchemaError("line " + std::to_string(line) + ": " + what + " has " + std::to_string(j.size()) +
                      " entries, header says " + std::to_string(expected));
  }
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) {
    const json& x = j[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw ParseError(line, what + " holds a non-number");
    v[i] = x.get<double>();
  }
  return v;
}

const json& field(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

double Episode::total_return() const { return std::accumulate(rewards.begin(), rewards.end(), 0.0); }

void save_trajectories(const std::filesystem::path& path, const TrajectorySet& set) {
  if (set.episodes.empty()) throw ContractError("save_trajectories: no episodes");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  json header = {{"format-version", TrajectorySet::kFormatVersion},
                 {"obs-dim", set.obs_dim},
                 {"act-dim", set.act_dim},
                 {"env-id", set.env_id},
                 {"episodes", set.episodes.size()}};
  out << header.dump() << '\n';
  for (const Episode& ep : set.episodes) {
    if (ep.observations.size() != ep.actions.size() + 1 || ep.rewards.size() != ep.actions.size()) {
      throw ContractError("save_trajectories: episode arrays have inconsistent lengths");
    }
    out << "{\"observations\":[";
    for (std::size_t t = 0; t < ep.observations.size(); ++t) {
      if (ep.observations[t].size() != set.obs_dim) throw ContractError("save_trajectories: observation size");
      if (t) out << ',';
      write_vector(out, ep.observations[t]);
    }
    out << "],\"actions\":[";
    for (std::size_t t = 0; t < ep.actions.size(); ++t) {
      if (ep.actions[t].size() != set.act_dim) throw ContractError("save_trajectories: action size");
      if (t) out << ',';
      write_vector(out, ep.actions[t]);
    }
    out << "],\"ground-truth-rewards\":[";
    for (std::size_t t = 0; t < ep.rewards.size(); ++t) {
      if (t) out << ',';
      write_number(out, ep.rewards[t]);
    }
    out << "],\"terminated\":" << (ep.terminated ? "true" : "false") << "}\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

TrajectorySet load_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  auto parse_line = [&]() -> json {
    try {
      return json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
    }
  };

  if (!std::getline(in, line)) throw ParseError(1, "empty trajectory file");
  lineno = 1;
  const json header = parse_line();
  TrajectorySet set;
  std::size_t declared = 0;
  try {
    const int version = field(header, "format-version", lineno).get<int>();
    if (version != TrajectorySet::kFormatVersion) {
      throw SchemaError("unsupported trajectory format version " + std::to_string(version));
    }
    set.obs_dim = field(header, "obs-dim", lineno).get<Index>();
    set.act_dim = field(header, "act-dim", lineno).get<Index>();
    set.env_id = field(header, "env-id", lineno).get<std::string>();
    declared = field(header, "episodes", lineno).get<std::size_t>();
  } catch (const json::type_error& e) {
    throw ParseError(lineno, std::string("malformed header: ") + e.what());
  }
  if (set.obs_dim < 1 || set.act_dim < 1) throw SchemaError("trajectory header has non-positive dimensions");

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json record = parse_line();
    Episode ep;
    try {
      const json& obs = field(record, "observations", lineno);
      const json& acts = field(record, "actions", lineno);
      const json& rews = field(record, "ground-truth-rewards", lineno);
      if (!obs.is_array() || !acts.is_array() || !rews.is_array()) throw ParseError(lineno, "episode arrays expected");
      if (obs.size() != acts.size() + 1 || rews.size() != acts.size()) {
        throw SchemaError("line " + std::to_string(lineno) + ": episode needs L+1 observations, L actions and L rewards");
      }
      for (const json& o : obs) ep.observations.push_back(read_vector(o, set.obs_dim, "observation", lineno));
      for (const json& a : acts) ep.actions.push_back(read_vector(a, set.act_dim, "action", lineno));
      for (const json& r : rews) {
        if (!r.is_number()) throw ParseError(lineno, "reward is not a number");
        ep.rewards.push_back(r.get<double>());
      }
      ep.terminated = field(record, "terminated", lineno).get<bool>();
    } catch (const json::type_error& e) {
      throw ParseError(lineno, std::string("malformed episode: ") + e.what());
    }
    set.episodes.push_back(std::move(ep));
  }
  if (set.episodes.size() != declared) {
    throw ParseError(lineno, "file truncated: header declares " + std::to_string(declared) + " episodes, found " +
                                 std::to_string(set.episodes.size()));
  }
  return set;
}

std::vector<Transition> episode_transitions(const Episode& episode, int horizon, bool absorbing) {
  const std::size_t length = episode.actions.size();
  if (episode.observations.size() != length + 1 || episode.rewards.size() != length) {
    throw ContractError("episode arrays have inconsistent lengths");
  }
  const Index obs_dim = length > 0 ? episode.observations[0].size() : 0;
  auto lift = [&](const Vector& o) -> Vector {
    if (!absorbing) return o;
    Vector v(o.size() + 1);
    v << o, 0.0;
    return v;
  };
  Vector absorbing_state = Vector::Zero(obs_dim + 1);
  absorbing_state[obs_dim] = 1.0;

  std::vector<Transition> out;
  for (std::size_t t = 0; t < length; ++t) {
    Transition tr;
    tr.state = lift(episode.observations[t]);
    tr.action = episode.actions[t];
    tr.reward = episode.rewards[t];
    const bool last = t + 1 == length;
    if (last && episode.terminated && absorbing) {
      tr.next_state = absorbing_state;
    } else {
      tr.next_state = lift(episode.observations[t + 1]);
      tr.terminated = last && episode.terminated;
    }
    tr.truncated = last && !episode.terminated;
    out.push_back(std::move(tr));
  }
  if (absorbing && episode.terminated) {
    const Index act_dim = episode.actions.empty() ? 0 : episode.actions[0].size();
    for (int t = static_cast<int>(length); t < horizon; ++t) {
      Transition tr;
      tr.state = absorbing_state;
      tr.action = Vector::Zero(act_dim);
      tr.next_state = absorbing_state;
      tr.truncated = t + 1 == horizon;
      out.push_back(std::move(tr));
    }
  }
  return out;
}

}  // namespace opirl
