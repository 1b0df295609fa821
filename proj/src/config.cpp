#include "snnsc/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "snnsc/tensor.hpp"

namespace snnsc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') throw ConfigError("config: bad number for " + key + ": " + v);
  return x;
}

int64_t parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') throw ConfigError("config: bad integer for " + key + ": " + v);
  return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += fmt_double(xs[i]);
  }
  return s;
}

struct Field {
  std::string key;  // "section.name"
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define F_INT(sec, name) \
  {#sec "." #name, [](Config& c, const std::string& v) { c.name = static_cast<int>(parse_int(#sec "." #name, v)); }, \
   [](const Config& c) { return std::to_string(c.name); }}
#define F_I64(sec, name) \
  {#sec "." #name, [](Config& c, const std::string& v) { c.name = parse_int(#sec "." #name, v); }, \
   [](const Config& c) { return std::to_string(c.name); }}
#define F_U64(sec, name) \
  {#sec "." #name, [](Config& c, const std::string& v) { c.name = static_cast<uint64_t>(parse_int(#sec "." #name, v)); }, \
   [](const Config& c) { return std::to_string(c.name); }}
#define F_DBL(sec, name) \
  {#sec "." #name, [](Config& c, const std::string& v) { c.name = parse_double(#sec "." #name, v); }, \
   [](const Config& c) { return fmt_double(c.name); }}
#define F_STR(sec, name) \
  {#sec "." #name, [](Config& c, const std::string& v) { c.name = v; }, \
   [](const Config& c) { return c.name; }}
#define F_LST(sec, name) \
  {#sec "." #name, [](Config& c, const std::string& v) { c.name = parse_list(#sec "." #name, v); }, \
   [](const Config& c) { return fmt_list(c.name); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      F_U64(data, seed),
      F_INT(data, classes),
      F_INT(data, image_channels),
      F_INT(data, image_size),
      F_INT(data, train_samples),
      F_INT(data, test_samples),
      F_DBL(data, center_sigma),
      F_DBL(data, noise_sigma),

      F_INT(model, split_channels),
      F_INT(model, backbone_hidden),
      F_INT(model, task_hidden),
      F_INT(model, payload_channels),
      F_INT(model, prior_bits),
      F_INT(model, min_steps),
      F_INT(model, max_steps),
      F_DBL(model, v_th),
      F_DBL(model, v_reset),
      F_DBL(model, surrogate_k),
      F_STR(model, encoder_reset),
      F_STR(model, recon_if_reset),
      F_STR(model, recon_ihf_reset),
      F_INT(model, encoder_hidden),
      F_INT(model, recon_channels),
      F_INT(model, sim_hidden),

      F_INT(train, backbone_epochs),
      F_INT(train, codec_epochs),
      F_INT(train, finetune_epochs),
      F_INT(train, simnet_epochs),
      F_INT(train, baseline_codec_epochs),
      F_INT(train, batch),
      F_DBL(train, lr),
      F_DBL(train, finetune_lr),
      F_DBL(train, adam_beta1),
      F_DBL(train, adam_beta2),
      F_DBL(train, adam_eps),
      F_DBL(train, ber_lo),
      F_DBL(train, ber_hi),

      F_INT(eval, eval_seeds),
      F_INT(eval, samples_per_cell),
      F_LST(eval, sweep_bers),
      F_LST(eval, corr_bers),

      F_LST(harq, thetas),
      F_LST(harq, theta_quantiles),
      F_LST(harq, gap_bers),
      F_INT(harq, calib_samples),

      F_STR(baseline, fec_scheme),
      F_INT(baseline, baseline_steps),
      F_I64(baseline, bit_budget),
      F_LST(baseline, baseline_bers),
      F_DBL(baseline, knee_ber),

      F_STR(io, out_dir),
  };
  return table;
}

#undef F_INT
#undef F_I64
#undef F_U64
#undef F_DBL
#undef F_STR
#undef F_LST

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("config: unknown key " + key);
}

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  Config c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: bad section header at " + path + ":" + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key=value at " + path + ":" + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    if (section.empty())
      throw ConfigError("config: key outside a [section] at " + path + ":" + std::to_string(lineno));
    c.set(section + "." + key, line.substr(eq + 1));
  }
  c.validate();
  return c;
}

std::string Config::dump() const {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    const std::string sec = f.key.substr(0, f.key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += f.key.substr(f.key.find('.') + 1) + " = " + f.get(*this) + "\n";
  }
  return out;
}

uint64_t Config::model_hash() const {
  std::string s;
  for (const Field& f : fields()) {
    const std::string sec = f.key.substr(0, f.key.find('.'));
    if (sec == "data" || sec == "model") s += f.key + "=" + f.get(*this) + "\n";
  }
  return fnv1a64(s.data(), s.size());
}

void Config::validate() const {
  auto positive = [](const char* k, int64_t v) {
    if (v <= 0) throw ConfigError(std::string("config: ") + k + " must be positive");
  };
  positive("data.classes", classes);
  positive("data.image_size", image_size);
  positive("data.train_samples", train_samples);
  positive("data.test_samples", test_samples);
  positive("model.split_channels", split_channels);
  positive("model.payload_channels", payload_channels);
  positive("model.prior_bits", prior_bits);
  positive("train.batch", batch);
  if (image_size % 2 != 0) throw ConfigError("config: image_size must be even (stride-2 split)");
  if (!(min_steps >= 1 && min_steps < max_steps))
    throw ConfigError("config: need 1 <= min_steps < max_steps");
  if (v_th <= 0) throw ConfigError("config: v_th must be positive");
  if (!(ber_lo >= 0 && ber_lo <= ber_hi && ber_hi <= 0.5))
    throw ConfigError("config: need 0 <= ber_lo <= ber_hi <= 0.5");
  for (const std::string& r : {encoder_reset, recon_if_reset, recon_ihf_reset}) {
    if (r != "soft" && r != "hard") throw ConfigError("config: reset mode must be soft or hard");
  }
  if (fec_scheme != "repetition3" && fec_scheme != "hamming74")
    throw ConfigError("config: fec_scheme must be repetition3 or hamming74");
  positive("baseline.baseline_steps", baseline_steps);
  if (baseline_steps > max_steps)
    throw ConfigError("config: baseline_steps must be <= max_steps");
  positive("eval.samples_per_cell", samples_per_cell);
  positive("eval.eval_seeds", eval_seeds);
  for (double t : thetas) {
    if (!(t > -1.0 && t < 1.0)) throw ConfigError("config: thetas must lie in (-1, 1)");
  }
}

std::vector<int> Config::feature_shape() const {
  return {split_channels, feature_size(), feature_size()};
}

std::vector<int> Config::payload_shape() const {
  return {payload_channels, feature_size(), feature_size()};
}

std::vector<int> Config::prior_shape() const { return {prior_bits, 1, 1}; }

int Config::step_bits() const { return payload_channels * feature_size() * feature_size(); }

}  // namespace snnsc
