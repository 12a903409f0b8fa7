#include "llmcc/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "llmcc/errors.hpp"

namespace llmcc {

namespace {

using nlohmann::json;

struct Field {
  std::string key;
  std::function<json()> get;
  std::function<void(const json&)> set;
};

[[noreturn]] void type_error(const std::string& key, const char* expected, const json& v) {
  throw ValidationError("config key '" + key + "' expects " + expected + ", got " + v.dump());
}

Field number(std::string key, double& ref) {
  return {key, [&ref] { return json(ref); },
          [key, &ref](const json& v) {
            if (!v.is_number()) type_error(key, "a number", v);
            ref = v.get<double>();
          }};
}

template <typename Int>
Field integer(std::string key, Int& ref) {
  return {key, [&ref] { return json(ref); },
          [key, &ref](const json& v) {
            if (!v.is_number_integer()) type_error(key, "an integer", v);
            if constexpr (std::is_unsigned_v<Int>) {
              if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
                ref = v.get<Int>();
                return;
              }
              type_error(key, "a non-negative integer", v);
            } else {
              const auto x = v.get<std::int64_t>();
              if (x < std::numeric_limits<Int>::min() || x > std::numeric_limits<Int>::max()) {
                type_error(key, "an integer in range", v);
              }
              ref = static_cast<Int>(x);
            }
          }};
}

Field maybe_number(std::string key, std::optional<double>& ref) {
  return {key, [&ref] { return ref ? json(*ref) : json(nullptr); },
          [key, &ref](const json& v) {
            if (v.is_null()) {
              ref.reset();
            } else if (v.is_number()) {
              ref = v.get<double>();
            } else {
              type_error(key, "a number or null", v);
            }
          }};
}

Field class_mode(std::string key, ControllerConfig& c, RequestClass cls) {
  return {key, [&c, cls] { return json(c.mode_for(cls) == ClassMode::kBypass ? "bypass" : "normal"); },
          [key, &c, cls](const json& v) {
            if (v == "bypass") {
              c.class_policy[cls] = ClassMode::kBypass;
            } else if (v == "normal") {
              c.class_policy[cls] = ClassMode::kNormal;
            } else {
              type_error(key, "\"normal\" or \"bypass\"", v);
            }
          }};
}

std::vector<Field> fields(RunConfig& c) {
  ServerConfig& s = c.server;
  WorkloadProfile& w = c.workload;
  PredictorModel& p = c.models.predictor;
  ComplianceModel& m = c.models.compliance;
  QualityModel& q = c.models.quality;
  ControllerConfig& k = c.controller;
  return {
      number("server.t0_ms", s.t0_ms),
      integer("server.knee_batch", s.knee_batch),
      number("server.slope_ms", s.slope_ms),
      number("server.prefill_ms_per_kword", s.prefill_ms_per_kword),
      integer("server.max_batch", s.max_batch),
      number("server.e_in_j_per_word", s.e_in_j_per_word),
      number("server.e_out_j_per_word", s.e_out_j_per_word),
      number("server.p_idle_w", s.p_idle_w),
      number("server.tokens_per_word", s.tokens_per_word),
      number("workload.input_median_words", w.input_median_words),
      number("workload.input_log_sigma", w.input_log_sigma),
      integer("workload.input_min_words", w.input_min_words),
      integer("workload.input_max_words", w.input_max_words),
      number("workload.output_mean_words", w.output_mean_words),
      number("workload.output_sd_words", w.output_sd_words),
      integer("workload.output_min_words", w.output_min_words),
      integer("workload.output_max_words", w.output_max_words),
      number("workload.weight_summarization", w.weight_summarization),
      number("workload.weight_coding", w.weight_coding),
      number("workload.weight_short_form", w.weight_short_form),
      number("models.predictor.noise_scale", p.noise_scale),
      integer("models.predictor.min_output", p.min_output),
      number("models.predictor.latency_ms", p.latency_ms),
      number("models.compliance.poly_a0", m.poly_a0),
      number("models.compliance.poly_a1", m.poly_a1),
      number("models.compliance.poly_a2", m.poly_a2),
      number("models.compliance.rel_noise", m.rel_noise),
      number("models.compliance.unbounded_log_sigma", m.unbounded_log_sigma),
      number("models.compliance.band_low_factor", m.band_low_factor),
      number("models.compliance.band_high_factor", m.band_high_factor),
      number("models.quality.sim_inactive_median", q.sim_inactive_median),
      number("models.quality.sim_active_median", q.sim_active_median),
      number("models.quality.floor", q.floor),
      number("models.quality.safe_window", q.safe_window),
      number("models.quality.decay_end", q.decay_end),
      number("models.quality.score_noise", q.score_noise),
      integer("controller.window_s", k.window_s),
      number("controller.r_min", k.r_min),
      number("controller.r_max", k.r_max),
      maybe_number("controller.t1_ms", k.t1_ms),
      maybe_number("controller.t2_ms", k.t2_ms),
      integer("controller.deactivate_after", k.deactivate_after),
      class_mode("controller.class_policy.summarization", k, RequestClass::kSummarization),
      class_mode("controller.class_policy.coding", k, RequestClass::kCoding),
      class_mode("controller.class_policy.short-form", k, RequestClass::kShortForm),
      integer("controller.min_words_bypass", k.min_words_bypass),
      integer("run.seed", c.run.seed),
      maybe_number("run.cutoff_s", c.run.cutoff_s),
  };
}

void set_key(std::vector<Field>& table, const std::string& key, const json& value) {
  for (Field& f : table) {
    if (f.key == key) {
      f.set(value);
      return;
    }
  }
  throw ValidationError("unknown config key '" + key + "'");
}

void flatten(const json& node, const std::string& prefix, std::vector<Field>& table) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      const bool known = std::any_of(table.begin(), table.end(),
                                     [&](const Field& f) { return f.key.rfind(key + ".", 0) == 0; });
      if (!known) throw ValidationError("unknown config section '" + key + "'");
      flatten(*it, key, table);
    } else {
      set_key(table, key, *it);
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  server.validate();
  workload.validate();
  models.validate();
  controller.validate_policy();
  if (run.cutoff_s && !(*run.cutoff_s > 0.0)) throw ValidationError("run.cutoff_s must be > 0");
}

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig cfg;
  auto table = fields(cfg);
  flatten(doc, "", table);
  cfg.validate();
  return cfg;
}

std::string dump_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  json doc = json::object();
  for (const Field& f : fields(copy)) {
    std::string pointer = "/" + f.key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    doc[json::json_pointer(pointer)] = f.get();
  }
  return doc.dump(2) + "\n";
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  auto table = fields(cfg);
  set_key(table, key, value);
}

std::vector<std::string> config_keys() {
  RunConfig cfg;
  std::vector<std::string> out;
  for (const Field& f : fields(cfg)) out.push_back(f.key);
  return out;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path,
                         const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (explicit_path) {
    cfg = load_config(*explicit_path);
  } else if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env && *env) {
    cfg = load_config(env);
  }
  for (const std::string& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

}  // namespace llmcc
