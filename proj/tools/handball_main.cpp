// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "handball/errors.hpp"
#include "handball/experiment.hpp"
#include "handball/quantization.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string bits_list;
  double eta = -1.0;
  bool strict_siqnr = false;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "experiment configuration file");
  cmd->add_option("--seed", flags->seed, "override the RNG seed");
  cmd->add_option("--trials", flags->trials, "override the Monte-Carlo trial count");
  cmd->add_option("--out", flags->out_dir, "output directory for CSV/record files");
  cmd->add_option("--bits", flags->bits_list,
                  "comma list of DAC bit depths, e.g. 1,2,3,4,inf");
  cmd->add_option("--eta", flags->eta, "communication-sensing trade-off in [0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--strict-eq7", flags->strict_siqnr,
                "strict link-budget mode: fold the quantizer into the linear gain only, "
                "no separate distortion power in the SIQNR denominator");
}

handball::ExperimentSpec load_spec(const CLI::App* cmd, const CommonFlags& flags) {
  handball::ExperimentSpec spec;
  if (!flags.config_path.empty()) spec = handball::parse_spec_file(flags.config_path);
  if (cmd->count("--seed")) spec.config.seed = flags.seed;
  if (cmd->count("--trials")) spec.trials = flags.trials;
  if (cmd->count("--out")) spec.output_path = flags.out_dir;
  if (cmd->count("--bits")) spec.bit_depths = handball::parse_value_list(flags.bits_list);
  if (cmd->count("--eta")) {
    spec.config.eta = flags.eta;
    spec.eta_list.clear();
  }
  if (cmd->count("--strict-eq7")) spec.strict_siqnr = true;
  return spec;
}

void ensure_output(std::vector<std::string>& outputs, const std::string& name) {
  if (std::find(outputs.begin(), outputs.end(), name) == outputs.end())
    outputs.push_back(name);
}

int run_sweep_command(const CLI::App* cmd, const CommonFlags& flags) {
  handball::ExperimentSpec spec = load_spec(cmd, flags);
  ensure_output(spec.outputs, "table");
  spec.outputs.erase(std::remove(spec.outputs.begin(), spec.outputs.end(), "beampattern"),
                     spec.outputs.end());
  spec.validate();
  const handball::RunRecord rec = handball::run_experiment(spec);
  for (std::size_t i = 0; i < rec.sweeps.size(); ++i) {
    const handball::SweepResult& r = rec.sweeps[i];
    std::cout << "sweep " << rec.sweep_labels[i] << " axis=" << r.axis_name << "\n";
    for (std::size_t k = 0; k < r.axis_values.size(); ++k)
      std::cout << "  " << handball::format_double(r.axis_values[k])
                << "  mean_se=" << handball::format_double(r.mean_se[k])
                << "  std=" << handball::format_double(r.std_se[k])
                << "  trials=" << r.n_trials - r.skipped[k] << "\n";
  }
  if (!spec.output_path.empty()) std::cout << "wrote results to " << spec.output_path << "\n";
  return 0;
}

int run_beampattern_command(const CLI::App* cmd, const CommonFlags& flags) {
  handball::ExperimentSpec spec = load_spec(cmd, flags);
  ensure_output(spec.outputs, "beampattern");
  spec.outputs.erase(std::remove(spec.outputs.begin(), spec.outputs.end(), "table"),
                     spec.outputs.end());
  spec.outputs.erase(std::remove(spec.outputs.begin(), spec.outputs.end(), "fd"),
                     spec.outputs.end());
  spec.validate();
  const handball::RunRecord rec = handball::run_experiment(spec);
  for (std::size_t i = 0; i < rec.beampatterns.size(); ++i)
    std::cout << "beampattern eta=" << handball::format_double(rec.beampattern_etas[i]) << " ("
              << rec.beampatterns[i].angles.size() << " angles)\n";
  if (!spec.output_path.empty()) std::cout << "wrote results to " << spec.output_path << "\n";
  return 0;
}

int run_validate_command(const CommonFlags& flags) {
  handball::ExperimentSpec spec;
  if (!flags.config_path.empty()) spec = handball::parse_spec_file(flags.config_path);
  spec.validate();
  std::cout << "OK\n" << handball::serialize_spec(spec);
  return 0;
}

int run_quantcheck_command(std::uint64_t seed, int precoders, int draws) {
  const handball::QuantizationCheckReport report =
      handball::run_quantization_check(seed, precoders, draws);
  std::cout << "one-bit covariance vs arcsine law: "
            << (report.covariance_failures == 0 ? "PASS" : "FAIL") << " (worst "
            << handball::format_double(report.worst_covariance_se) << " SE)\n";
  std::cout << "one-bit residual decorrelation:    "
            << (report.residual_failures == 0 ? "PASS" : "FAIL") << " (worst "
            << handball::format_double(report.worst_residual_se) << " SE)\n";
  std::cout << "few-bit distortion factor band:    " << (report.aqnm_band_ok ? "PASS" : "FAIL")
            << " (worst ratio " << handball::format_double(report.worst_aqnm_ratio) << ")\n";
  std::cout << (report.passed() ? "quantcheck PASS" : "quantcheck FAIL") << "\n";
  return report.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid analog/digital beamformer design and evaluation for joint "
               "communication and sensing transmitters with low-resolution DACs"};
  app.require_subcommand(1);

  CommonFlags sweep_flags, bp_flags, validate_flags;
  std::uint64_t qc_seed = 1;
  int qc_precoders = 50;
  int qc_draws = 100000;

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a Monte-Carlo sweep and write tables");
  add_common(sweep_cmd, &sweep_flags);
  CLI::App* bp_cmd = app.add_subcommand("beampattern", "design once per eta and write patterns");
  add_common(bp_cmd, &bp_flags);
  CLI::App* validate_cmd = app.add_subcommand("validate", "parse and validate a configuration");
  validate_cmd->add_option("--config", validate_flags.config_path, "configuration file");
  CLI::App* qc_cmd =
      app.add_subcommand("quantcheck", "Monte-Carlo validation of the quantization models");
  qc_cmd->add_option("--seed", qc_seed, "RNG seed");
  qc_cmd->add_option("--precoders", qc_precoders, "number of random precoders");
  qc_cmd->add_option("--draws", qc_draws, "Monte-Carlo draws per precoder");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sweep_cmd->parsed()) return run_sweep_command(sweep_cmd, sweep_flags);
    if (bp_cmd->parsed()) return run_beampattern_command(bp_cmd, bp_flags);
    if (validate_cmd->parsed()) return run_validate_command(validate_flags);
    if (qc_cmd->parsed()) return run_quantcheck_command(qc_seed, qc_precoders, qc_draws);
  } catch (const handball::SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const handball::SpecValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const handball::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const handball::DesignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
