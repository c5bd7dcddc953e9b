#include "rase/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rase/errors.hpp"
#include "rase/version.hpp"

namespace rase {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
  }
}

long long parse_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": cannot parse integer '" + s + "'");
  }
}

bool parse_bool(const std::string& s, int line) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("line " + std::to_string(line) + ": expected true/false, got '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const char* kind_name(SequenceKind k) { return k == SequenceKind::Rase ? "RASE" : "I4LE"; }
const char* decay_name(DecayScaling::Kind k) {
  return k == DecayScaling::Kind::Intensity ? "intensity" : "amplitude";
}
const char* window_name(WindowFn f) { return f == WindowFn::Rect ? "rect" : "hann"; }

SequenceKind parse_kind(const std::string& s, int line) {
  if (s == "RASE") return SequenceKind::Rase;
  if (s == "I4LE") return SequenceKind::I4le;
  throw ConfigError("line " + std::to_string(line) + ": kind must be RASE or I4LE");
}

DecayScaling::Kind parse_decay_kind(const std::string& s, int line) {
  if (s == "intensity") return DecayScaling::Kind::Intensity;
  if (s == "amplitude") return DecayScaling::Kind::Amplitude;
  throw ConfigError("line " + std::to_string(line) + ": decay kind must be intensity or amplitude");
}

WindowFn parse_window_fn(const std::string& s, int line) {
  if (s == "rect") return WindowFn::Rect;
  if (s == "hann") return WindowFn::Hann;
  throw ConfigError("line " + std::to_string(line) + ": window_fn must be rect or hann");
}

// Mutable staging for the constructor-validated pieces.
struct Staging {
  ExperimentConfig cfg;
  double gain_alpha, gain_l, gain_reph, gain_linewidth;
  double decay_tau, decay_ref, decay_target;
  DecayScaling::Kind decay_kind;

  Staging() : cfg(ExperimentConfig::paper_defaults()) {
    gain_alpha = cfg.sequence.gain.alpha_l;
    gain_l = cfg.sequence.gain.transmission_l;
    gain_reph = cfg.sequence.gain.reph_transmission;
    gain_linewidth = cfg.sequence.gain.linewidth_hz;
    decay_tau = cfg.decay.tau_us;
    decay_ref = cfg.decay.t_ref_us;
    decay_target = cfg.decay.t_target_us;
    decay_kind = cfg.decay.kind;
  }

  ExperimentConfig finish() {
    try {
      cfg.sequence.gain = GainFeature(gain_alpha, gain_l, gain_reph, gain_linewidth);
      cfg.decay = DecayScaling(decay_tau, decay_ref, decay_target, decay_kind);
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
  }
};

void apply_key(Staging& st, const std::string& section, const std::string& key,
               const std::string& value, int line) {
  ExperimentConfig& cfg = st.cfg;
  auto unknown = [&]() -> ConfigError {
    return ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "' in [" +
                       section + "]");
  };

  if (section.empty()) {
    if (key == "format_version") {
      cfg.format_version = static_cast<int>(parse_int(value, line));
      if (cfg.format_version != kConfigFormatVersion) {
        throw ConfigError("line " + std::to_string(line) + ": config format version " + value +
                          " unsupported (this build reads version " +
                          std::to_string(kConfigFormatVersion) + ")");
      }
      return;
    }
    throw unknown();
  }

  if (section == "sequence") {
    SequenceConfig& s = cfg.sequence;
    if (key == "kind") s.kind = parse_kind(value, line);
    else if (key == "ase_window_us") s.ase_window_us = parse_double(value, line);
    else if (key == "rase_window_us") s.rase_window_us = parse_double(value, line);
    else if (key == "tau_s_us") s.tau_s_us = parse_double(value, line);
    else if (key == "pi1_len_us") s.pi1_len_us = parse_double(value, line);
    else if (key == "pi2_len_us") s.pi2_len_us = parse_double(value, line);
    else if (key == "ase_if_hz") s.ase_if_hz = parse_double(value, line);
    else if (key == "rase_if_hz") s.rase_if_hz = parse_double(value, line);
    else if (key == "sample_rate_hz") s.sample_rate_hz = parse_double(value, line);
    else if (key == "input_amplitude") s.input_pulse.amplitude = parse_double(value, line);
    else if (key == "input_len_us") s.input_pulse.length_us = parse_double(value, line);
    else if (key == "ref_amplitude") s.ref_pulse.amplitude = parse_double(value, line);
    else if (key == "ref_len_us") s.ref_pulse.length_us = parse_double(value, line);
    else if (key == "ref_phase_rad") s.ref_pulse.phase_rad = parse_double(value, line);
    else if (key == "n_shots") s.n_shots = static_cast<int>(parse_int(value, line));
    else if (key == "rng_seed") s.rng_seed = static_cast<std::uint64_t>(parse_int(value, line));
    else throw unknown();
    return;
  }
  if (section == "gain") {
    if (key == "alpha_l") st.gain_alpha = parse_double(value, line);
    else if (key == "transmission_l") st.gain_l = parse_double(value, line);
    else if (key == "reph_transmission") st.gain_reph = parse_double(value, line);
    else if (key == "linewidth_hz") st.gain_linewidth = parse_double(value, line);
    else throw unknown();
    return;
  }
  if (section == "noise") {
    NoiseModel& n = cfg.noise;
    if (key == "vacuum_psd") n.vacuum_psd = parse_double(value, line);
    else if (key == "excess_noise") n.excess_noise = parse_double(value, line);
    else if (key == "visibility") n.visibility = parse_double(value, line);
    else if (key == "visibility_separate") n.visibility_separate = parse_bool(value, line);
    else throw unknown();
    return;
  }
  if (section == "decay") {
    if (key == "tau_us") st.decay_tau = parse_double(value, line);
    else if (key == "t_ref_us") st.decay_ref = parse_double(value, line);
    else if (key == "t_target_us") st.decay_target = parse_double(value, line);
    else if (key == "kind") st.decay_kind = parse_decay_kind(value, line);
    else throw unknown();
    return;
  }
  if (section == "analysis") {
    AnalysisOptions& a = cfg.analysis;
    if (key == "window_us") a.window_us = parse_double(value, line);
    else if (key == "window_fn") a.window_function = parse_window_fn(value, line);
    else if (key == "span_hz") a.span_hz = parse_double(value, line);
    else if (key == "b_grid_step") a.b_grid_step = parse_double(value, line);
    else if (key == "bootstrap") a.bootstrap = parse_bool(value, line);
    else if (key == "bootstrap_resamples") a.bootstrap_resamples = static_cast<int>(parse_int(value, line));
    else if (key == "strict_phase") a.strict_phase = parse_bool(value, line);
    else if (key == "background_shots") cfg.background_shots = static_cast<int>(parse_int(value, line));
    else throw unknown();
    return;
  }
  if (section == "output") {
    if (key == "out_dir") cfg.out_dir = value;
    else throw unknown();
    return;
  }
  if (section == "levels") {
    const auto sep = key.find('_');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= key.size()) {
      throw ConfigError("line " + std::to_string(line) +
                        ": level key must look like g1_e1, got '" + key + "'");
    }
    const std::string ground = key.substr(0, sep);
    const std::string excited = key.substr(sep + 1);
    auto& tr = cfg.levels.transitions;
    const auto it = std::find_if(tr.begin(), tr.end(), [&](const LevelScheme::Transition& t) {
      return t.ground == ground && t.excited == excited;
    });
    const double strength = parse_double(value, line);
    if (it == tr.end()) {
      tr.push_back({ground, excited, strength});
    } else {
      it->strength = strength;
    }
    return;
  }
  throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section + "]");
}

}  // namespace

void LevelScheme::validate() const {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& t : transitions) {
    if (t.ground.empty() || t.excited.empty()) {
      throw std::invalid_argument("LevelScheme: empty level label");
    }
    if (!(t.strength > 0.0 && t.strength <= 1.0)) {
      throw std::invalid_argument("LevelScheme: oscillator strength for " + t.ground + "-" +
                                  t.excited + " must lie in (0, 1]");
    }
    if (!seen.insert({t.ground, t.excited}).second) {
      throw std::invalid_argument("LevelScheme: duplicate transition " + t.ground + "-" +
                                  t.excited);
    }
  }
}

LevelScheme LevelScheme::praseodymium_site1() {
  return LevelScheme{{
      {"g1", "e1", 0.05},
      {"g2", "e1", 0.40},
      {"g3", "e1", 0.55},
      {"g2", "e2", 0.60},
      {"g3", "e2", 0.38},
  }};
}

void ExperimentConfig::validate() const {
  sequence.validate();
  noise.validate();
  levels.validate();
  if (format_version != kConfigFormatVersion) {
    throw std::invalid_argument("ExperimentConfig: unsupported format version");
  }
  if (analysis.window_us < 0.0) {
    throw std::invalid_argument("ExperimentConfig: analysis window_us must be >= 0");
  }
  if (!(analysis.span_hz > 0.0)) {
    throw std::invalid_argument("ExperimentConfig: analysis span_hz must be > 0");
  }
  if (!(analysis.b_grid_step > 0.0 && analysis.b_grid_step <= 1.0)) {
    throw std::invalid_argument("ExperimentConfig: b_grid_step must lie in (0, 1]");
  }
  if (analysis.bootstrap_resamples < 2) {
    throw std::invalid_argument("ExperimentConfig: bootstrap_resamples must be >= 2");
  }
  if (background_shots < 0) {
    throw std::invalid_argument("ExperimentConfig: background_shots must be >= 0");
  }
}

ExperimentConfig ExperimentConfig::paper_defaults() {
  ExperimentConfig cfg;
  cfg.sequence.rng_seed = 605977;
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Staging st;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw ConfigError("line " + std::to_string(line) + ": malformed section header");
      }
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line) + ": empty key");
    }
    apply_key(st, section, key, value, line);
  }
  return st.finish();
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "format_version = " << cfg.format_version << "\n\n";

  const SequenceConfig& s = cfg.sequence;
  out << "[sequence]\n";
  out << "kind = " << kind_name(s.kind) << "\n";
  out << "ase_window_us = " << fmt_double(s.ase_window_us) << "\n";
  out << "rase_window_us = " << fmt_double(s.rase_window_us) << "\n";
  out << "tau_s_us = " << fmt_double(s.tau_s_us) << "\n";
  out << "pi1_len_us = " << fmt_double(s.pi1_len_us) << "\n";
  out << "pi2_len_us = " << fmt_double(s.pi2_len_us) << "\n";
  out << "ase_if_hz = " << fmt_double(s.ase_if_hz) << "\n";
  out << "rase_if_hz = " << fmt_double(s.rase_if_hz) << "\n";
  out << "sample_rate_hz = " << fmt_double(s.sample_rate_hz) << "\n";
  out << "input_amplitude = " << fmt_double(s.input_pulse.amplitude) << "\n";
  out << "input_len_us = " << fmt_double(s.input_pulse.length_us) << "\n";
  out << "ref_amplitude = " << fmt_double(s.ref_pulse.amplitude) << "\n";
  out << "ref_len_us = " << fmt_double(s.ref_pulse.length_us) << "\n";
  out << "ref_phase_rad = " << fmt_double(s.ref_pulse.phase_rad) << "\n";
  out << "n_shots = " << s.n_shots << "\n";
  out << "rng_seed = " << s.rng_seed << "\n\n";

  out << "[gain]\n";
  out << "alpha_l = " << fmt_double(s.gain.alpha_l) << "\n";
  out << "transmission_l = " << fmt_double(s.gain.transmission_l) << "\n";
  out << "reph_transmission = " << fmt_double(s.gain.reph_transmission) << "\n";
  out << "linewidth_hz = " << fmt_double(s.gain.linewidth_hz) << "\n\n";

  out << "[noise]\n";
  out << "vacuum_psd = " << fmt_double(cfg.noise.vacuum_psd) << "\n";
  out << "excess_noise = " << fmt_double(cfg.noise.excess_noise) << "\n";
  out << "visibility = " << fmt_double(cfg.noise.visibility) << "\n";
  out << "visibility_separate = " << (cfg.noise.visibility_separate ? "true" : "false") << "\n\n";

  out << "[decay]\n";
  out << "tau_us = " << fmt_double(cfg.decay.tau_us) << "\n";
  out << "t_ref_us = " << fmt_double(cfg.decay.t_ref_us) << "\n";
  out << "t_target_us = " << fmt_double(cfg.decay.t_target_us) << "\n";
  out << "kind = " << decay_name(cfg.decay.kind) << "\n\n";

  out << "[analysis]\n";
  out << "window_us = " << fmt_double(cfg.analysis.window_us) << "\n";
  out << "window_fn = " << window_name(cfg.analysis.window_function) << "\n";
  out << "span_hz = " << fmt_double(cfg.analysis.span_hz) << "\n";
  out << "b_grid_step = " << fmt_double(cfg.analysis.b_grid_step) << "\n";
  out << "bootstrap = " << (cfg.analysis.bootstrap ? "true" : "false") << "\n";
  out << "bootstrap_resamples = " << cfg.analysis.bootstrap_resamples << "\n";
  out << "strict_phase = " << (cfg.analysis.strict_phase ? "true" : "false") << "\n";
  out << "background_shots = " << cfg.background_shots << "\n\n";

  out << "[output]\n";
  out << "out_dir = " << cfg.out_dir << "\n\n";

  out << "[levels]\n";
  for (const auto& t : cfg.levels.transitions) {
    out << t.ground << "_" << t.excited << " = " << fmt_double(t.strength) << "\n";
  }
  return out.str();
}

ExperimentConfig parse_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }

  // Reuse the text pipeline: flatten the JSON into (section, key, value) and
  // apply with the same strict key checks.
  Staging st;
  try {
    for (const auto& [section, body] : j.items()) {
      if (!body.is_object()) {
        if (section == "format_version") {
          apply_key(st, "", "format_version", body.dump(), 0);
          continue;
        }
        throw ConfigError("config JSON: top-level entry '" + section + "' must be an object");
      }
      for (const auto& [key, value] : body.items()) {
        std::string text;
        if (value.is_string()) {
          text = value.get<std::string>();
        } else {
          text = value.dump();  // numbers and booleans serialize to parseable text
        }
        apply_key(st, section, key, text, 0);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  return st.finish();
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const SequenceConfig& s = cfg.sequence;
  json j;
  j["format_version"] = cfg.format_version;
  j["sequence"] = {{"kind", kind_name(s.kind)},
                   {"ase_window_us", s.ase_window_us},
                   {"rase_window_us", s.rase_window_us},
                   {"tau_s_us", s.tau_s_us},
                   {"pi1_len_us", s.pi1_len_us},
                   {"pi2_len_us", s.pi2_len_us},
                   {"ase_if_hz", s.ase_if_hz},
                   {"rase_if_hz", s.rase_if_hz},
                   {"sample_rate_hz", s.sample_rate_hz},
                   {"input_amplitude", s.input_pulse.amplitude},
                   {"input_len_us", s.input_pulse.length_us},
                   {"ref_amplitude", s.ref_pulse.amplitude},
                   {"ref_len_us", s.ref_pulse.length_us},
                   {"ref_phase_rad", s.ref_pulse.phase_rad},
                   {"n_shots", s.n_shots},
                   {"rng_seed", s.rng_seed}};
  j["gain"] = {{"alpha_l", s.gain.alpha_l},
               {"transmission_l", s.gain.transmission_l},
               {"reph_transmission", s.gain.reph_transmission},
               {"linewidth_hz", s.gain.linewidth_hz}};
  j["noise"] = {{"vacuum_psd", cfg.noise.vacuum_psd},
                {"excess_noise", cfg.noise.excess_noise},
                {"visibility", cfg.noise.visibility},
                {"visibility_separate", cfg.noise.visibility_separate}};
  j["decay"] = {{"tau_us", cfg.decay.tau_us},
                {"t_ref_us", cfg.decay.t_ref_us},
                {"t_target_us", cfg.decay.t_target_us},
                {"kind", decay_name(cfg.decay.kind)}};
  j["analysis"] = {{"window_us", cfg.analysis.window_us},
                   {"window_fn", window_name(cfg.analysis.window_function)},
                   {"span_hz", cfg.analysis.span_hz},
                   {"b_grid_step", cfg.analysis.b_grid_step},
                   {"bootstrap", cfg.analysis.bootstrap},
                   {"bootstrap_resamples", cfg.analysis.bootstrap_resamples},
                   {"strict_phase", cfg.analysis.strict_phase},
                   {"background_shots", cfg.background_shots}};
  j["output"] = {{"out_dir", cfg.out_dir}};
  json levels = json::object();
  for (const auto& t : cfg.levels.transitions) {
    levels[t.ground + "_" + t.excited] = t.strength;
  }
  j["levels"] = levels;
  return j.dump(2);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return parse_config_json(text);
  }
  return parse_config_text(text);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b) {
  return config_to_text(a) == config_to_text(b);
}

}  // namespace rase
