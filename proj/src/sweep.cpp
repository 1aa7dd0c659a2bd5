#include "medtag/sweep.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "medtag/channel.hpp"
#include "medtag/error.hpp"

namespace medtag {
namespace {

struct TrialOutcome {
  double mpm_err = 0.0;
  bool pra_wrong = false;
};

std::string all_ones(std::size_t n) { return std::string(n, '1'); }

}  // namespace

std::vector<double> SweepConfig::default_snr_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 12; ++i) g.push_back(2.5 * i);
  return g;
}

void SweepConfig::validate() const {
  if (snr_grid.empty()) invalid("sweep needs a non-empty SNR grid");
  for (double s : snr_grid) {
    if (!std::isfinite(s)) invalid("SNR grid values must be finite");
  }
  if (trials_per_point < 1) invalid("trials_per_point must be >= 1");
  if (!(phase_noise_deg >= 0.0)) invalid("phase_noise_deg must be >= 0");
  grid.validate();
  extraction.validate();
  for (const PatternTemplate& t : templates) t.validate();
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index, std::size_t trial_index) {
  return mix_seed(mix_seed(master_seed, snr_index), trial_index);
}

Spectrum clean_spectrum(const TagSignature& signature, const SamplingGrid& grid) {
  const std::vector<double> bins = grid.dft_bins();
  return dft_spectrum(synthesize_time(signature, grid), bins);
}

std::vector<PatternTemplate> code_templates(const TagSignature& signature, const SamplingGrid& grid,
                                            const ExtractionConfig& extraction, double accept_radius) {
  const std::vector<Pole>& poles = signature.poles();
  if (poles.size() > 16) invalid("too many poles for a bit-code template set");
  std::vector<PatternTemplate> out;
  const std::size_t count = std::size_t{1} << poles.size();
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::string label;
    std::vector<Pole> subset;
    for (std::size_t k = 0; k < poles.size(); ++k) {
      const bool on = (mask >> k) & 1U;
      label.push_back(on ? '1' : '0');
      if (on) subset.push_back(poles[k]);
    }
    PatternTemplate t;
    t.label = label;
    t.accept_radius = accept_radius;
    if (!subset.empty()) {
      t.pattern = extract_pattern(clean_spectrum(TagSignature(label, subset), grid), extraction);
    }
    out.push_back(std::move(t));
  }
  return out;
}

SweepTable run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  MpmConfig mpm = cfg.mpm;
  if (!mpm.order) mpm.order = cfg.signature.poles().size();
  const std::vector<PatternTemplate> templates =
      cfg.templates.empty() ? code_templates(cfg.signature, cfg.grid, cfg.extraction, cfg.code_accept_radius)
                            : cfg.templates;
  const std::string expected =
      cfg.expected_label.empty() ? all_ones(cfg.signature.poles().size()) : cfg.expected_label;
  const Spectrum clean = clean_spectrum(cfg.signature, cfg.grid);
  const std::vector<Pole>& truth = cfg.signature.poles();

  const std::size_t trials = cfg.trials_per_point;
  const std::size_t total = cfg.snr_grid.size() * trials;
  std::vector<TrialOutcome> outcomes(total);

  auto run_trial = [&](std::size_t index) {
    const std::size_t snr_index = index / trials;
    const std::size_t trial = index % trials;
    ChannelConfig channel;
    channel.snr_db = cfg.snr_grid[snr_index];
    channel.phase_noise_deg = cfg.phase_noise_deg;
    channel.seed = trial_seed(cfg.master_seed, snr_index, trial);
    const Spectrum noisy = apply_channel(clean, channel);

    TrialOutcome& out = outcomes[index];
    const PoleEstimate est = estimate_poles(inverse_spectrum(noisy, cfg.grid), mpm);
    out.mpm_err = mpm_error(truth, est);
    const Classification c = classify(extract_pattern(noisy, cfg.extraction), templates);
    out.pra_wrong = c.label != expected;
  };

  unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(total)));
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) run_trial(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < total; i = next++) run_trial(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = total;
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  SweepTable table;
  for (std::size_t s = 0; s < cfg.snr_grid.size(); ++s) {
    double sum = 0.0;
    std::size_t wrong = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      sum += outcomes[s * trials + t].mpm_err;
      wrong += outcomes[s * trials + t].pra_wrong ? 1 : 0;
    }
    const double mean = sum / static_cast<double>(trials);
    double var = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double d = outcomes[s * trials + t].mpm_err - mean;
      var += d * d;
    }
    table.rows.push_back({cfg.snr_grid[s], trials, mean, std::sqrt(var / static_cast<double>(trials)),
                          static_cast<double>(wrong) / static_cast<double>(trials)});
  }
  return table;
}

std::string sweep_csv(const SweepTable& table) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const SweepRow& r : table.rows) {
    out += io::format_double(r.snr_db) + "," + std::to_string(r.trials) + "," + io::format_double(r.mpm_err_mean) +
           "," + io::format_double(r.mpm_err_std) + "," + io::format_double(r.pra_err_rate) + "\n";
  }
  return out;
}

SweepTable sweep_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) invalid("sweep CSV header mismatch");
  SweepTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    SweepRow r;
    char comma = 0;
    if (!(row >> r.snr_db >> comma >> r.trials >> comma >> r.mpm_err_mean >> comma >> r.mpm_err_std >> comma >>
          r.pra_err_rate)) {
      invalid("malformed sweep CSV row: " + line);
    }
    table.rows.push_back(r);
  }
  return table;
}

io::json plot_manifest(const SweepTable& table, const std::string& csv_name) {
  return {{"csv", csv_name},
          {"x", "snr_db"},
          {"x_label", "SNR (dB)"},
          {"y_label", "Error"},
          {"points", table.rows.size()},
          {"series",
           {{{"name", "MPM normalized decoding error"}, {"column", "mpm_err_mean"}, {"error_column", "mpm_err_std"}},
            {{"name", "PRA recognition error rate"}, {"column", "pra_err_rate"}}}}};
}

void export_plotdata(const SweepTable& table, const std::string& path) {
  if (table.rows.empty()) invalid("cannot export an empty sweep table");
  const std::filesystem::path csv_path(path);
  std::filesystem::path manifest_path = csv_path;
  manifest_path.replace_extension(".manifest.json");
  io::write_text_file(csv_path.string(), sweep_csv(table));
  io::write_text_file(manifest_path.string(), plot_manifest(table, csv_path.filename().string()).dump(2) + "\n");
}

SweepConfig sweep_config_from_json(const io::json& j) {
  SweepConfig c;
  try {
    if (j.contains("snr_grid")) c.snr_grid = j.at("snr_grid").get<std::vector<double>>();
    if (j.contains("phase_noise_deg")) c.phase_noise_deg = j.at("phase_noise_deg").get<double>();
    if (j.contains("trials_per_point")) c.trials_per_point = j.at("trials_per_point").get<std::size_t>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("expected_label")) c.expected_label = j.at("expected_label").get<std::string>();
    if (j.contains("code_accept_radius")) c.code_accept_radius = j.at("code_accept_radius").get<double>();
  } catch (const io::json::exception& e) {
    invalid(std::string("malformed sweep config: ") + e.what());
  }
  if (j.contains("signature")) c.signature = io::signature_from_json(j.at("signature"));
  if (j.contains("grid")) c.grid = io::grid_from_json(j.at("grid"));
  if (j.contains("mpm")) c.mpm = io::mpm_config_from_json(j.at("mpm"));
  if (j.contains("extraction")) c.extraction = io::extraction_from_json(j.at("extraction"));
  if (j.contains("templates")) c.templates = io::templates_from_json(j.at("templates"));
  c.validate();
  return c;
}

}  // namespace medtag
