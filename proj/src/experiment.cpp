// SPDX-License-Identifier: Apache-2.0

#include "handball/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "handball/errors.hpp"

namespace handball {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double parse_real(const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not a real number: '" + text + "'");
  return value;
}

long long parse_int(const std::string& text) {
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not an integer: '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("not a boolean: '" + text + "'");
}

int parse_bits(const std::string& text) {
  if (text == "inf") return kInfiniteBits;
  const long long b = parse_int(text);
  if (b < 1 || b > 64) throw std::invalid_argument("bits must be in [1, 64] or 'inf'");
  return static_cast<int>(b);
}

std::string bits_label(int bits) {
  return is_infinite_bits(bits) ? "inf" : std::to_string(bits);
}

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

std::string join_strings(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += values[i];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

bool wants(const ExperimentSpec& spec, const std::string& output) {
  return std::find(spec.outputs.begin(), spec.outputs.end(), output) != spec.outputs.end();
}

// Non-finite reals have no JSON literal; encode them as strings.
ordered_json real_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double real_from_json(const ordered_json& j) {
  if (j.is_string()) return parse_real(j.get<std::string>());
  return j.get<double>();
}

ordered_json reals_to_json(const std::vector<double>& values) {
  ordered_json arr = ordered_json::array();
  for (double v : values) arr.push_back(real_to_json(v));
  return arr;
}

std::vector<double> reals_from_json(const ordered_json& arr) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) out.push_back(real_from_json(v));
  return out;
}

ordered_json config_to_json(const SystemConfig& c) {
  ordered_json j;
  j["n_tx"] = c.n_tx;
  j["n_rx"] = c.n_rx;
  j["n_users"] = c.n_users;
  j["n_targets"] = c.n_targets;
  j["n_rf"] = c.n_rf;
  j["n_paths"] = c.n_paths;
  j["grid_size"] = c.grid_size;
  j["bits"] = bits_label(c.bits);
  j["p_s"] = c.p_s;
  j["p_max"] = c.p_max;
  j["noise_var"] = c.noise_var;
  j["eta"] = c.eta;
  j["seed"] = c.seed;
  j["per_path_gains"] = c.per_path_gains;
  j["full_circle_grid"] = c.full_circle_grid;
  return j;
}

SystemConfig config_from_json(const ordered_json& j) {
  SystemConfig c;
  c.n_tx = j.at("n_tx").get<int>();
  c.n_rx = j.at("n_rx").get<int>();
  c.n_users = j.at("n_users").get<int>();
  c.n_targets = j.at("n_targets").get<int>();
  c.n_rf = j.at("n_rf").get<int>();
  c.n_paths = j.at("n_paths").get<int>();
  c.grid_size = j.at("grid_size").get<int>();
  c.bits = parse_bits(j.at("bits").get<std::string>());
  c.p_s = j.at("p_s").get<double>();
  c.p_max = j.at("p_max").get<double>();
  c.noise_var = j.at("noise_var").get<double>();
  c.eta = j.at("eta").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.per_path_gains = j.at("per_path_gains").get<bool>();
  c.full_circle_grid = j.at("full_circle_grid").get<bool>();
  return c;
}

ordered_json sweep_to_json(const SweepResult& r) {
  ordered_json j;
  j["axis_name"] = r.axis_name;
  j["axis_values"] = reals_to_json(r.axis_values);
  j["mean_se"] = reals_to_json(r.mean_se);
  j["std_se"] = reals_to_json(r.std_se);
  j["mean_fd_se"] = reals_to_json(r.mean_fd_se);
  j["std_fd_se"] = reals_to_json(r.std_fd_se);
  j["skipped"] = r.skipped;
  j["n_trials"] = r.n_trials;
  j["config_snapshot"] = config_to_json(r.config_snapshot);
  return j;
}

SweepResult sweep_from_json(const ordered_json& j) {
  SweepResult r;
  r.axis_name = j.at("axis_name").get<std::string>();
  r.axis_values = reals_from_json(j.at("axis_values"));
  r.mean_se = reals_from_json(j.at("mean_se"));
  r.std_se = reals_from_json(j.at("std_se"));
  r.mean_fd_se = reals_from_json(j.at("mean_fd_se"));
  r.std_fd_se = reals_from_json(j.at("std_fd_se"));
  r.skipped = j.at("skipped").get<std::vector<int>>();
  r.n_trials = j.at("n_trials").get<int>();
  r.config_snapshot = config_from_json(j.at("config_snapshot"));
  return r;
}

ordered_json pattern_to_json(const Beampattern& p) {
  ordered_json j;
  j["angles_rad"] = reals_to_json(p.angles);
  j["gain_db"] = reals_to_json(p.gain_db);
  return j;
}

Beampattern pattern_from_json(const ordered_json& j) {
  Beampattern p;
  p.angles = reals_from_json(j.at("angles_rad"));
  p.gain_db = reals_from_json(j.at("gain_db"));
  return p;
}

ordered_json complex_matrix_to_json(const Eigen::MatrixXcd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(ordered_json::array({real_to_json(m(r, c).real()),
                                         real_to_json(m(r, c).imag())}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd complex_matrix_from_json(const ordered_json& rows) {
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_cols = n_rows > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXcd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r)
    for (Eigen::Index c = 0; c < n_cols; ++c)
      m(r, c) = {real_from_json(rows[r][c][0]), real_from_json(rows[r][c][1])};
  return m;
}

std::string sweep_csv(const SweepResult& r) {
  std::string body = "value,mean_se,std_se,n_trials\n";
  for (std::size_t i = 0; i < r.axis_values.size(); ++i) {
    body += format_double(r.axis_values[i]);
    body += ',';
    body += format_double(r.mean_se[i]);
    body += ',';
    body += format_double(r.std_se[i]);
    body += ',';
    body += std::to_string(r.n_trials - r.skipped[i]);
    body += '\n';
  }
  return body;
}

std::string fd_csv(const SweepResult& r) {
  std::string body = "value,mean_se,std_se,n_trials\n";
  for (std::size_t i = 0; i < r.axis_values.size(); ++i) {
    body += format_double(r.axis_values[i]);
    body += ',';
    body += format_double(r.mean_fd_se[i]);
    body += ',';
    body += format_double(r.std_fd_se[i]);
    body += ',';
    body += std::to_string(r.n_trials - r.skipped[i]);
    body += '\n';
  }
  return body;
}

std::string pattern_csv(const Beampattern& p) {
  std::string body = "angle_deg,gain_db\n";
  for (std::size_t i = 0; i < p.angles.size(); ++i) {
    body += format_double(p.angles[i] * 180.0 / M_PI);
    body += ',';
    body += format_double(p.gain_db[i]);
    body += '\n';
  }
  return body;
}

std::string diagnostics_text(const RunRecord& rec) {
  std::string body = "# run diagnostics\n";
  for (std::size_t i = 0; i < rec.sweeps.size(); ++i) {
    const SweepResult& r = rec.sweeps[i];
    body += "sweep " + rec.sweep_labels[i] + " axis=" + r.axis_name + "\n";
    for (std::size_t k = 0; k < r.axis_values.size(); ++k) {
      body += "  value=" + format_double(r.axis_values[k]) +
              " completed=" + std::to_string(r.n_trials - r.skipped[k]) +
              " skipped=" + std::to_string(r.skipped[k]) + "\n";
    }
  }
  for (std::size_t i = 0; i < rec.beampatterns.size(); ++i)
    body += "beampattern eta=" + format_double(rec.beampattern_etas[i]) + " points=" +
            std::to_string(rec.beampatterns[i].angles.size()) + "\n";
  return body;
}

std::vector<double> degrees_to_radians(const std::vector<double>& deg) {
  std::vector<double> rad(deg.size());
  for (std::size_t i = 0; i < deg.size(); ++i) rad[i] = deg[i] * M_PI / 180.0;
  return rad;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_value_list(const std::string& text) {
  const std::string body = trim(text);
  if (body.empty()) throw std::invalid_argument("empty value list");
  if (body.find(':') != std::string::npos) {
    const auto first = body.find(':');
    const auto second = body.find(':', first + 1);
    if (second == std::string::npos)
      throw std::invalid_argument("range must be lo:step:hi: '" + body + "'");
    const double lo = parse_real(trim(body.substr(0, first)));
    const double step = parse_real(trim(body.substr(first + 1, second - first - 1)));
    const double hi = parse_real(trim(body.substr(second + 1)));
    if (!std::isfinite(lo) || !std::isfinite(step) || !std::isfinite(hi) || step <= 0.0)
      throw std::invalid_argument("range bounds must be finite with positive step");
    std::vector<double> values;
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count < 1) throw std::invalid_argument("empty range: '" + body + "'");
    for (int i = 0; i < count; ++i) values.push_back(lo + i * step);
    return values;
  }
  std::vector<double> values;
  for (const std::string& item : split_csv(body)) values.push_back(parse_real(item));
  if (values.empty()) throw std::invalid_argument("empty value list");
  return values;
}

void ExperimentSpec::validate() const {
  config.validate();
  if (trials < 1) throw SpecValidationError("trials", "must be >= 1");
  if (outputs.empty()) throw SpecValidationError("outputs", "at least one output required");
  for (const std::string& o : outputs)
    if (o != "table" && o != "beampattern" && o != "diagnostics" && o != "fd")
      throw SpecValidationError("outputs", "unknown output '" + o + "'");

  if (!sweep.name.empty()) {
    static const std::set<std::string> axes = {"snr_db", "bits", "eta", "n_users", "n_targets"};
    if (!axes.count(sweep.name))
      throw SpecValidationError("sweep.axis", "unknown axis '" + sweep.name + "'");
    if (sweep.values.empty()) throw SpecValidationError("sweep.values", "must be non-empty");
    for (std::size_t i = 1; i < sweep.values.size(); ++i)
      if (!(sweep.values[i] > sweep.values[i - 1]))
        throw SpecValidationError("sweep.values", "must be strictly increasing");
    for (double v : sweep.values) {
      if (std::isnan(v)) throw SpecValidationError("sweep.values", "must not contain nan");
      if (std::isinf(v) && sweep.name != "bits")
        throw SpecValidationError("sweep.values", "must be finite for axis " + sweep.name);
      if (sweep.name == "eta" && !(v >= 0.0 && v <= 1.0))
        throw SpecValidationError("sweep.values", "eta values must lie in [0, 1]");
      if ((sweep.name == "n_users" || sweep.name == "n_targets") &&
          (v < 1.0 || v != std::floor(v)))
        throw SpecValidationError("sweep.values", "counts must be positive integers");
      if (sweep.name == "bits" && !std::isinf(v) && (v < 1.0 || v != std::floor(v)))
        throw SpecValidationError("sweep.values", "bit depths must be positive integers or inf");
    }
  }
  for (double b : bit_depths)
    if (!std::isinf(b) && (b < 1.0 || b != std::floor(b) || std::isnan(b)))
      throw SpecValidationError("bits_list", "bit depths must be positive integers or inf");
  for (double e : eta_list)
    if (!(e >= 0.0 && e <= 1.0)) throw SpecValidationError("eta_list", "values must lie in [0, 1]");
  if (!user_directions_deg.empty() &&
      static_cast<int>(user_directions_deg.size()) != config.n_users)
    throw SpecValidationError("user_directions_deg", "expected one direction per user");
  for (double d : user_directions_deg)
    if (!(d >= 0.0 && d < 180.0))
      throw SpecValidationError("user_directions_deg", "directions must lie in [0, 180)");
  if (!target_directions_deg.empty() &&
      static_cast<int>(target_directions_deg.size()) != config.n_targets)
    throw SpecValidationError("target_directions_deg", "expected one direction per target");
  for (double d : target_directions_deg)
    if (!(d >= 0.0 && d < 180.0))
      throw SpecValidationError("target_directions_deg", "directions must lie in [0, 180)");
}

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool in_sweep = false;
  bool n_rf_given = false;
  std::set<std::string> seen;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (!in_sweep && (line == "sweep {" || line == "sweep{")) {
      in_sweep = true;
      continue;
    }
    if (in_sweep && line == "}") {
      in_sweep = false;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SpecParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw SpecParseError(line_no, "expected 'key = value'");
    const std::string scoped = in_sweep ? "sweep." + key : key;
    if (!seen.insert(scoped).second) throw SpecParseError(line_no, "duplicate key '" + scoped + "'");

    try {
      if (in_sweep) {
        if (key == "axis")
          spec.sweep.name = value;
        else if (key == "values")
          spec.sweep.values = parse_value_list(value);
        else
          throw std::invalid_argument("unknown sweep key '" + key + "'");
        continue;
      }
      if (key == "n_tx") spec.config.n_tx = static_cast<int>(parse_int(value));
      else if (key == "n_rx") spec.config.n_rx = static_cast<int>(parse_int(value));
      else if (key == "n_users") spec.config.n_users = static_cast<int>(parse_int(value));
      else if (key == "n_targets") spec.config.n_targets = static_cast<int>(parse_int(value));
      else if (key == "n_rf") { spec.config.n_rf = static_cast<int>(parse_int(value)); n_rf_given = true; }
      else if (key == "n_paths") spec.config.n_paths = static_cast<int>(parse_int(value));
      else if (key == "grid_size") spec.config.grid_size = static_cast<int>(parse_int(value));
      else if (key == "bits") spec.config.bits = parse_bits(value);
      else if (key == "p_s") spec.config.p_s = parse_real(value);
      else if (key == "p_max") spec.config.p_max = parse_real(value);
      else if (key == "noise_var") spec.config.noise_var = parse_real(value);
      else if (key == "eta") spec.config.eta = parse_real(value);
      else if (key == "seed") spec.config.seed = static_cast<std::uint64_t>(parse_int(value));
      else if (key == "per_path_gains") spec.config.per_path_gains = parse_bool(value);
      else if (key == "full_circle_grid") spec.config.full_circle_grid = parse_bool(value);
      else if (key == "trials") spec.trials = static_cast<int>(parse_int(value));
      else if (key == "outputs") spec.outputs = split_csv(value);
      else if (key == "out") spec.output_path = value;
      else if (key == "bits_list") spec.bit_depths = parse_value_list(value);
      else if (key == "eta_list") spec.eta_list = parse_value_list(value);
      else if (key == "user_directions_deg") spec.user_directions_deg = parse_value_list(value);
      else if (key == "target_directions_deg") spec.target_directions_deg = parse_value_list(value);
      else if (key == "strict_siqnr") spec.strict_siqnr = parse_bool(value);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw SpecParseError(line_no, e.what());
    }
  }
  if (in_sweep) throw SpecParseError(line_no, "unterminated sweep section");
  if (!n_rf_given) spec.config.n_rf = spec.config.n_users + spec.config.n_targets;
  spec.validate();
  return spec;
}

ExperimentSpec parse_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string serialize_spec(const ExperimentSpec& spec) {
  std::string out;
  const SystemConfig& c = spec.config;
  out += "n_tx = " + std::to_string(c.n_tx) + "\n";
  out += "n_rx = " + std::to_string(c.n_rx) + "\n";
  out += "n_users = " + std::to_string(c.n_users) + "\n";
  out += "n_targets = " + std::to_string(c.n_targets) + "\n";
  out += "n_rf = " + std::to_string(c.n_rf) + "\n";
  out += "n_paths = " + std::to_string(c.n_paths) + "\n";
  out += "grid_size = " + std::to_string(c.grid_size) + "\n";
  out += "bits = " + bits_label(c.bits) + "\n";
  out += "p_s = " + format_double(c.p_s) + "\n";
  out += "p_max = " + format_double(c.p_max) + "\n";
  out += "noise_var = " + format_double(c.noise_var) + "\n";
  out += "eta = " + format_double(c.eta) + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += "per_path_gains = " + std::string(c.per_path_gains ? "true" : "false") + "\n";
  out += "full_circle_grid = " + std::string(c.full_circle_grid ? "true" : "false") + "\n";
  out += "trials = " + std::to_string(spec.trials) + "\n";
  out += "outputs = " + join_strings(spec.outputs) + "\n";
  if (!spec.output_path.empty()) out += "out = " + spec.output_path + "\n";
  if (!spec.bit_depths.empty()) out += "bits_list = " + join_reals(spec.bit_depths) + "\n";
  if (!spec.eta_list.empty()) out += "eta_list = " + join_reals(spec.eta_list) + "\n";
  if (!spec.user_directions_deg.empty())
    out += "user_directions_deg = " + join_reals(spec.user_directions_deg) + "\n";
  if (!spec.target_directions_deg.empty())
    out += "target_directions_deg = " + join_reals(spec.target_directions_deg) + "\n";
  out += "strict_siqnr = " + std::string(spec.strict_siqnr ? "true" : "false") + "\n";
  if (!spec.sweep.name.empty()) {
    out += "sweep {\n";
    out += "  axis = " + spec.sweep.name + "\n";
    out += "  values = " + join_reals(spec.sweep.values) + "\n";
    out += "}\n";
  }
  return out;
}

RunRecord run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  RunRecord rec;
  rec.spec = spec;
  rec.seed = spec.config.seed;
  rec.timestamp = utc_timestamp();

  EvalOptions opts;
  opts.strict_siqnr = spec.strict_siqnr;
  opts.with_fd = wants(spec, "fd");

  if (wants(spec, "table")) {
    if (spec.sweep.name.empty())
      throw SpecValidationError("sweep", "table output requires a sweep section");
    std::vector<double> depths = spec.bit_depths;
    if (depths.empty())
      depths.push_back(is_infinite_bits(spec.config.bits)
                           ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(spec.config.bits));
    for (double b : depths) {
      SystemConfig cfg = spec.config;
      cfg.bits = std::isinf(b) ? kInfiniteBits : static_cast<int>(std::lround(b));
      rec.sweeps.push_back(run_sweep(cfg, spec.sweep, spec.trials, opts));
      rec.sweep_labels.push_back("bits" + bits_label(cfg.bits));
    }
  }

  if (wants(spec, "beampattern")) {
    std::vector<double> etas = spec.eta_list;
    if (etas.empty()) etas.push_back(spec.config.eta);
    FixedScenario fixed;
    fixed.user_aod = degrees_to_radians(spec.user_directions_deg);
    fixed.target_angles = degrees_to_radians(spec.target_directions_deg);
    for (std::size_t i = 0; i < etas.size(); ++i) {
      SystemConfig cfg = spec.config;
      cfg.eta = etas[i];
      Rng rng = Rng::stream(cfg.seed, i, 0xB9);
      const DesignedSystem sys = design_trial(cfg, fixed, rng);
      rec.beampattern_etas.push_back(etas[i]);
      rec.beampatterns.push_back(
          transmit_beampattern(sys.beamformer, sys.baseband.model, cfg, default_pattern_grid()));
    }
  }

  if (!spec.output_path.empty()) {
    const std::filesystem::path dir(spec.output_path);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());

    for (std::size_t i = 0; i < rec.sweeps.size(); ++i)
      write_text_atomic(dir / ("sweep_" + rec.sweeps[i].axis_name + "_" + rec.sweep_labels[i] +
                               ".csv"),
                        sweep_csv(rec.sweeps[i]));
    if (opts.with_fd && !rec.sweeps.empty())
      write_text_atomic(dir / ("sweep_" + rec.sweeps[0].axis_name + "_fd.csv"),
                        fd_csv(rec.sweeps[0]));
    for (std::size_t i = 0; i < rec.beampatterns.size(); ++i)
      write_text_atomic(dir / ("beampattern_eta" + format_double(rec.beampattern_etas[i]) +
                               ".csv"),
                        pattern_csv(rec.beampatterns[i]));
    if (!rec.sweeps.empty() || !rec.beampatterns.empty()) emit_plot_data(rec, dir);
    if (wants(spec, "diagnostics"))
      write_text_atomic(dir / "diagnostics.txt", diagnostics_text(rec));
    write_text_atomic(dir / "record.json", record_to_json(rec));
  }
  return rec;
}

void emit_plot_data(const RunRecord& record, const std::filesystem::path& dir) {
  if (record.sweeps.empty() && record.beampatterns.empty())
    throw std::invalid_argument("emit_plot_data: record holds no results");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());

  for (std::size_t i = 0; i < record.sweeps.size(); ++i) {
    const SweepResult& r = record.sweeps[i];
    std::string body = "# sweep " + record.sweep_labels[i] + "\n";
    body += "# columns: " + r.axis_name + " mean_se_bits_per_s_per_hz std_se\n";
    for (std::size_t k = 0; k < r.axis_values.size(); ++k)
      body += format_double(r.axis_values[k]) + " " + format_double(r.mean_se[k]) + " " +
              format_double(r.std_se[k]) + "\n";
    write_text_atomic(dir / ("sweep_" + r.axis_name + "_" + record.sweep_labels[i] + ".dat"),
                      body);
  }
  for (std::size_t i = 0; i < record.beampatterns.size(); ++i) {
    const Beampattern& p = record.beampatterns[i];
    std::string body =
        "# beampattern eta=" + format_double(record.beampattern_etas[i]) + "\n";
    body += "# columns: angle_deg gain_db\n";
    for (std::size_t k = 0; k < p.angles.size(); ++k)
      body += format_double(p.angles[k] * 180.0 / M_PI) + " " + format_double(p.gain_db[k]) +
              "\n";
    write_text_atomic(
        dir / ("beampattern_eta" + format_double(record.beampattern_etas[i]) + ".dat"), body);
  }
}

std::string record_to_json(const RunRecord& record) {
  ordered_json j;
  j["tool_version"] = record.tool_version;
  j["timestamp"] = record.timestamp;
  j["seed"] = record.seed;
  j["spec"] = serialize_spec(record.spec);
  ordered_json sweeps = ordered_json::array();
  for (std::size_t i = 0; i < record.sweeps.size(); ++i) {
    ordered_json s = sweep_to_json(record.sweeps[i]);
    s["label"] = record.sweep_labels[i];
    sweeps.push_back(std::move(s));
  }
  j["sweeps"] = std::move(sweeps);
  ordered_json patterns = ordered_json::array();
  for (std::size_t i = 0; i < record.beampatterns.size(); ++i) {
    ordered_json p = pattern_to_json(record.beampatterns[i]);
    p["eta"] = record.beampattern_etas[i];
    patterns.push_back(std::move(p));
  }
  j["beampatterns"] = std::move(patterns);
  return j.dump(2) + "\n";
}

std::string channel_to_json(const UserChannel& channel) {
  ordered_json j;
  j["matrix"] = complex_matrix_to_json(channel.matrix);
  ordered_json paths = ordered_json::array();
  for (const PathParameters& p : channel.paths)
    paths.push_back(ordered_json{{"gain", {real_to_json(p.gain.real()), real_to_json(p.gain.imag())}},
                                 {"aoa", real_to_json(p.aoa)},
                                 {"aod", real_to_json(p.aod)}});
  j["paths"] = std::move(paths);
  return j.dump();
}

UserChannel channel_from_json(const std::string& json_text) {
  const ordered_json j = ordered_json::parse(json_text);
  UserChannel channel;
  channel.matrix = complex_matrix_from_json(j.at("matrix"));
  for (const auto& p : j.at("paths")) {
    PathParameters path;
    path.gain = {real_from_json(p.at("gain")[0]), real_from_json(p.at("gain")[1])};
    path.aoa = real_from_json(p.at("aoa"));
    path.aod = real_from_json(p.at("aod"));
    channel.paths.push_back(path);
  }
  return channel;
}

std::string dictionary_to_json(const Dictionary& dict) {
  ordered_json j;
  j["tx_codebook"] = complex_matrix_to_json(dict.tx_codebook);
  j["rx_codebook"] = complex_matrix_to_json(dict.rx_codebook);
  j["grid"] = reals_to_json(dict.grid);
  return j.dump();
}

Dictionary dictionary_from_json(const std::string& json_text) {
  const ordered_json j = ordered_json::parse(json_text);
  Dictionary dict;
  dict.tx_codebook = complex_matrix_from_json(j.at("tx_codebook"));
  dict.rx_codebook = complex_matrix_from_json(j.at("rx_codebook"));
  dict.grid = reals_from_json(j.at("grid"));
  return dict;
}

std::string beamformer_to_json(const HybridBeamformer& bf) {
  ordered_json j;
  j["analog_comm"] = complex_matrix_to_json(bf.analog_comm);
  j["analog_sense"] = complex_matrix_to_json(bf.analog_sense);
  j["analog"] = complex_matrix_to_json(bf.analog);
  j["combiners"] = complex_matrix_to_json(bf.combiners);
  j["baseband"] = complex_matrix_to_json(bf.baseband);
  j["selected_tx_indices"] = bf.selected_tx_indices;
  j["selected_rx_indices"] = bf.selected_rx_indices;
  j["sensing_residual_norms"] = reals_to_json(bf.sensing_residual_norms);
  return j.dump();
}

HybridBeamformer beamformer_from_json(const std::string& json_text) {
  const ordered_json j = ordered_json::parse(json_text);
  HybridBeamformer bf;
  bf.analog_comm = complex_matrix_from_json(j.at("analog_comm"));
  bf.analog_sense = complex_matrix_from_json(j.at("analog_sense"));
  bf.analog = complex_matrix_from_json(j.at("analog"));
  bf.combiners = complex_matrix_from_json(j.at("combiners"));
  bf.baseband = complex_matrix_from_json(j.at("baseband"));
  bf.selected_tx_indices = j.at("selected_tx_indices").get<std::vector<int>>();
  bf.selected_rx_indices = j.at("selected_rx_indices").get<std::vector<int>>();
  bf.sensing_residual_norms = reals_from_json(j.at("sensing_residual_norms"));
  return bf;
}

RunRecord record_from_json(const std::string& json_text) {
  const ordered_json j = ordered_json::parse(json_text);
  RunRecord rec;
  rec.tool_version = j.at("tool_version").get<std::string>();
  rec.timestamp = j.at("timestamp").get<std::string>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.spec = parse_spec(j.at("spec").get<std::string>());
  for (const auto& s : j.at("sweeps")) {
    rec.sweeps.push_back(sweep_from_json(s));
    rec.sweep_labels.push_back(s.at("label").get<std::string>());
  }
  for (const auto& p : j.at("beampatterns")) {
    rec.beampatterns.push_back(pattern_from_json(p));
    rec.beampattern_etas.push_back(p.at("eta").get<double>());
  }
  return rec;
}

}  // namespace handball
