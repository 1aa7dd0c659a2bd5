#pragma once

#include <optional>
#include <string>
#include <vector>

#include "medtag/channel.hpp"
#include "medtag/emar.hpp"
#include "medtag/events.hpp"
#include "medtag/io.hpp"
#include "medtag/pra.hpp"
#include "medtag/sem.hpp"

namespace medtag {

/// The container's true state from `t` onwards. A channel here overrides the
/// script-wide channel for the following observations.
struct TimelinePoint {
  double t = 0.0;
  TagState state = TagState::kClosed;
  std::optional<ChannelConfig> channel;
};

struct SinkConfig {
  /// "none", "stdout", "file" or "http".
  std::string type = "none";
  std::string path;
  std::string url;
  int max_attempts = 3;
  double timeout_s = 2.0;
};

struct ScenarioScript {
  std::string name = "scenario";
  std::string tag_id = "bottle-1";
  TagSignature open_signature = default_open_signature();
  TagSignature closed_signature = default_closed_signature();
  double accept_radius = 0.5;
  SamplingGrid grid;
  ExtractionConfig extraction;
  std::vector<TimelinePoint> timeline;
  double end_time = 0.0;
  double observation_rate_hz = 10.0;
  ChannelConfig channel;
  DebounceConfig debounce;
  PrescriptionSchedule schedule;
  double check_cadence = 1.0;
  SinkConfig sink;

  void validate() const;
};

struct ScenarioResult {
  std::string name;
  std::size_t observations = 0;
  std::vector<DrugEvent> events;
  std::vector<Alert> alerts;
  std::vector<DeliveryReceipt> receipts;
  AdministrationRecord record;

  io::json summary() const;
};

/// Open/closed templates extracted from the script's noiseless signatures.
TagTemplateSet scenario_templates(const ScenarioScript& script);

/// Runs the sense -> classify -> debounce -> rules -> publish loop. When
/// `sink` is null the script's sink configuration is used.
ScenarioResult run_scenario(const ScenarioScript& script, AlertSink* sink = nullptr);

/// Writes events.jsonl, record.jsonl, alerts.json and summary.json.
void write_scenario_outputs(const ScenarioResult& result, const std::string& out_dir);

ScenarioScript scenario_from_json(const io::json& j);

}  // namespace medtag
