#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medtag/io.hpp"
#include "medtag/mpm.hpp"
#include "medtag/pra.hpp"
#include "medtag/sem.hpp"

namespace medtag {

/// Monte-Carlo SNR sweep comparing the pole estimator and the notch
/// classifier on one tag signature.
struct SweepConfig {
  std::vector<double> snr_grid = default_snr_grid();
  double phase_noise_deg = 0.0;
  std::size_t trials_per_point = 500;
  std::uint64_t master_seed = 1;
  TagSignature signature = reference_signature();
  SamplingGrid grid;
  /// Order defaults to the signature's pole count when unset.
  MpmConfig mpm;
  ExtractionConfig extraction;
  /// Empty: one template per pole subset (bit codes), built noiselessly.
  std::vector<PatternTemplate> templates;
  /// Label counted as a correct read. Empty: the all-ones code.
  std::string expected_label;
  double code_accept_radius = 5.0;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;

  static std::vector<double> default_snr_grid();
  void validate() const;
};

struct SweepRow {
  double snr_db = 0.0;
  std::size_t trials = 0;
  double mpm_err_mean = 0.0;
  double mpm_err_std = 0.0;
  double pra_err_rate = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

inline constexpr const char* kSweepCsvHeader = "snr_db,trials,mpm_err_mean,mpm_err_std,pra_err_rate";

/// Per-trial seed: a function of (master_seed, snr_index, trial_index) only.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index, std::size_t trial_index);

/// Templates labelled by bit string ("101" = first and third pole present),
/// extracted from the noiseless discrete spectrum of each pole subset.
std::vector<PatternTemplate> code_templates(const TagSignature& signature, const SamplingGrid& grid,
                                            const ExtractionConfig& extraction, double accept_radius);

/// Clean spectrum of `signature` on every DFT bin of `grid`.
Spectrum clean_spectrum(const TagSignature& signature, const SamplingGrid& grid);

SweepTable run_sweep(const SweepConfig& cfg);

std::string sweep_csv(const SweepTable& table);
SweepTable sweep_from_csv(const std::string& text);

/// Writes the CSV to `path` and a plotting manifest next to it
/// (extension replaced by ".manifest.json"). Throws on an empty table.
void export_plotdata(const SweepTable& table, const std::string& path);
io::json plot_manifest(const SweepTable& table, const std::string& csv_name);

SweepConfig sweep_config_from_json(const io::json& j);

}  // namespace medtag
