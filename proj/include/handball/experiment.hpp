// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_EXPERIMENT_HPP
#define HANDBALL_EXPERIMENT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "handball/evaluation.hpp"

namespace handball {

inline constexpr const char* kToolVersion = "0.1.0";

/// A complete, archivable description of one experiment run. Parsed from a
/// flat key-value text document with a nested sweep section; command-line
/// flags override file values.
struct ExperimentSpec {
  SystemConfig config;
  SweepAxis sweep;                  // empty name means "no sweep requested"
  int trials = 200;
  std::vector<std::string> outputs = {"table", "diagnostics"};
  std::string output_path;          // directory for CSV/record files
  std::vector<double> bit_depths;   // one sweep per entry; +inf = unquantized
  std::vector<double> eta_list;     // beampattern runs, one per eta
  std::vector<double> user_directions_deg;    // pinned beampattern scenario
  std::vector<double> target_directions_deg;  // pinned beampattern scenario
  bool strict_siqnr = false;

  void validate() const;
  bool operator==(const ExperimentSpec&) const = default;
};

/// Parses the configuration document. Throws SpecParseError with the line
/// number on malformed text and SpecValidationError naming the field on
/// out-of-range values. An empty document yields the defaults.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec parse_spec_file(const std::filesystem::path& path);

/// Canonical text form; parse_spec(serialize_spec(s)) == s.
std::string serialize_spec(const ExperimentSpec& spec);

/// Everything produced by one run, round-trippable through JSON.
struct RunRecord {
  ExperimentSpec spec;
  std::vector<SweepResult> sweeps;
  std::vector<std::string> sweep_labels;   // parallel to sweeps
  std::vector<double> beampattern_etas;    // parallel to beampatterns
  std::vector<Beampattern> beampatterns;
  std::string tool_version = kToolVersion;
  std::string timestamp;  // UTC, ISO 8601
  std::uint64_t seed = 0;
};

/// Runs the sweeps and/or beampatterns requested by spec.outputs and writes
/// all artifacts (CSV tables, gnuplot data, record.json, diagnostics) under
/// spec.output_path. Output files are written atomically.
RunRecord run_experiment(const ExperimentSpec& spec);

/// Writes gnuplot-ready whitespace-delimited data files for every result in
/// the record. Throws std::invalid_argument when the record holds no results.
void emit_plot_data(const RunRecord& record, const std::filesystem::path& dir);

/// JSON round-trip for run records (non-finite reals encoded as strings).
std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& json_text);

/// Lossless JSON round-trips for model values, in the same encoding the run
/// record uses (complex entries as [re, im] pairs).
std::string channel_to_json(const UserChannel& channel);
UserChannel channel_from_json(const std::string& json_text);
std::string dictionary_to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const std::string& json_text);
std::string beamformer_to_json(const HybridBeamformer& bf);
HybridBeamformer beamformer_from_json(const std::string& json_text);

/// Shortest round-trip decimal formatting, locale-independent.
std::string format_double(double value);

/// Parses "lo:step:hi" ranges or comma lists of reals ("inf" allowed).
std::vector<double> parse_value_list(const std::string& text);

}  // namespace handball

#endif  // HANDBALL_EXPERIMENT_HPP
