#include "opirl/cli/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/seeding.hpp"

namespace opirl {

using nlohmann::json;

void RunManifest::write(const std::filesystem::path& path) const {
  json j;
  j["command"] = command;
  j["arguments"] = arguments;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  j["env-id"] = env_id;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["started"] = started;
  j["finished"] = finished;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  if (final_eval) {
    j["final-eval"] = {{"mean", final_eval->mean},
                       {"stddev", final_eval->stddev},
                       {"success-rate", final_eval->success_rate},
                       {"episodes", final_eval->episodes},
                       {"seed", final_eval->seed}};
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.arguments = j.value("arguments", std::vector<std::string>{});
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.env_id = j.at("env-id").get<std::string>();
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.status = j.at("status").get<std::string>();
    m.error = j.value("error", "");
    if (j.contains("final-eval")) {
      const auto& e = j["final-eval"];
      m.final_eval = Evaluation{e.at("mean").get<double>(), e.at("stddev").get<double>(),
                                e.at("success-rate").get<double>(), e.at("episodes").get<int>(),
                                e.at("seed").get<std::uint64_t>()};
    }
  } catch (const json::exception& e) {
    throw SchemaError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace opirl
