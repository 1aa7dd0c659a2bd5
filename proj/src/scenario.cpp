#include "medtag/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>

#include "medtag/error.hpp"
#include "medtag/sweep.hpp"

namespace medtag {
namespace {

constexpr double kTimeEpsilon = 1e-9;

std::unique_ptr<AlertSink> make_sink(const SinkConfig& cfg) {
  if (cfg.type == "none") return nullptr;
  if (cfg.type == "stdout") return std::make_unique<StreamSink>(std::cout);
  if (cfg.type == "file") {
    if (cfg.path.empty()) invalid("file sink needs a path");
    return std::make_unique<FileSink>(cfg.path);
  }
  if (cfg.type == "http") return std::make_unique<HttpSink>(cfg.url, cfg.timeout_s);
  invalid("unknown sink type '" + cfg.type + "'");
}

}  // namespace

void ScenarioScript::validate() const {
  grid.validate();
  extraction.validate();
  channel.validate();
  debounce.validate();
  schedule.validate();
  if (timeline.empty()) invalid("scenario timeline is empty");
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    if (timeline[i].state == TagState::kUnknown) invalid("timeline states must be OPEN or CLOSED");
    if (i > 0 && !(timeline[i].t > timeline[i - 1].t)) invalid("timeline timestamps must be strictly increasing");
    if (timeline[i].channel) timeline[i].channel->validate();
  }
  if (!(end_time >= timeline.front().t)) invalid("scenario end_time precedes the timeline");
  if (!(observation_rate_hz > 0.0)) invalid("observation rate must be > 0");
  if (!(check_cadence > 0.0)) invalid("check cadence must be > 0");
  if (schedule.tag_id != tag_id) {
    invalid("schedule is for tag '" + schedule.tag_id + "' but the scenario tag is '" + tag_id + "'");
  }
  if (!(accept_radius > 0.0)) invalid("accept_radius must be > 0");
}

TagTemplateSet scenario_templates(const ScenarioScript& script) {
  TagTemplateSet set;
  set.tag_id = script.tag_id;
  set.open_template.label = "open";
  set.open_template.accept_radius = script.accept_radius;
  set.open_template.pattern = extract_pattern(clean_spectrum(script.open_signature, script.grid), script.extraction);
  set.closed_template.label = "closed";
  set.closed_template.accept_radius = script.accept_radius;
  set.closed_template.pattern =
      extract_pattern(clean_spectrum(script.closed_signature, script.grid), script.extraction);
  set.validate();
  return set;
}

ScenarioResult run_scenario(const ScenarioScript& script, AlertSink* sink) {
  script.validate();
  std::unique_ptr<AlertSink> owned;
  if (sink == nullptr) {
    owned = make_sink(script.sink);
    sink = owned.get();
  }
  const RetryPolicy retry{script.sink.max_attempts};

  const TagTemplateSet templates = scenario_templates(script);
  const Spectrum open_clean = clean_spectrum(script.open_signature, script.grid);
  const Spectrum closed_clean = clean_spectrum(script.closed_signature, script.grid);

  ScenarioResult result;
  result.name = script.name;
  StreamState stream = StreamState::start(script.tag_id);

  auto emit = [&](const std::vector<Alert>& alerts) {
    for (const Alert& a : alerts) {
      result.alerts.push_back(a);
      if (sink != nullptr) result.receipts.push_back(publish(a, *sink, retry));
    }
  };

  const double start = script.timeline.front().t;
  double next_check = start + script.check_cadence;
  const auto count = static_cast<std::size_t>(
      std::floor((script.end_time - start) * script.observation_rate_hz + kTimeEpsilon)) + 1;

  std::size_t segment = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = start + static_cast<double>(i) / script.observation_rate_hz;
    while (segment + 1 < script.timeline.size() && script.timeline[segment + 1].t <= t + kTimeEpsilon) ++segment;

    while (next_check <= t + kTimeEpsilon) {
      emit(check_missed(script.schedule, result.record, next_check));
      next_check += script.check_cadence;
    }

    const TimelinePoint& truth = script.timeline[segment];
    ChannelConfig channel = truth.channel ? *truth.channel : script.channel;
    channel.seed = mix_seed(channel.seed, i);
    const Spectrum& clean = truth.state == TagState::kOpen ? open_clean : closed_clean;
    const Spectrum observed = apply_channel(clean, channel);
    const auto [state, confidence] = classify_state(observed, templates, script.extraction);

    Advance step = advance(stream, Observation{state, confidence, t}, script.debounce);
    stream = std::move(step.state);
    if (step.event) {
      result.events.push_back(*step.event);
      emit(evaluate_event(*step.event, script.schedule, result.record, t));
    }
  }
  while (next_check <= script.end_time + kTimeEpsilon) {
    emit(check_missed(script.schedule, result.record, next_check));
    next_check += script.check_cadence;
  }
  result.observations = count;
  return result;
}

io::json ScenarioResult::summary() const {
  io::json events_json = io::json::array();
  for (const DrugEvent& e : events) events_json.push_back(io::to_json(e));
  io::json alerts_json = io::json::array();
  for (const Alert& a : alerts) alerts_json.push_back(io::alert_wire_json(a));
  io::json receipts_json = io::json::array();
  std::size_t delivered = 0;
  for (const DeliveryReceipt& r : receipts) {
    receipts_json.push_back({{"alert_id", r.alert_id}, {"delivered", r.delivered}, {"attempt_count", r.attempt_count}});
    delivered += r.delivered ? 1 : 0;
  }
  return {{"scenario", name},
          {"observations", observations},
          {"event_count", events.size()},
          {"alert_count", alerts.size()},
          {"delivered_count", delivered},
          {"events", events_json},
          {"alerts", alerts_json},
          {"receipts", receipts_json}};
}

void write_scenario_outputs(const ScenarioResult& result, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);
  io::write_text_file((dir / "events.jsonl").string(), io::events_jsonl(result.events));
  io::write_text_file((dir / "record.jsonl").string(), io::record_jsonl(result.record));
  io::json alerts = io::json::array();
  for (const Alert& a : result.record.alerts()) alerts.push_back(io::to_json(a));
  io::write_text_file((dir / "alerts.json").string(), alerts.dump(2) + "\n");
  io::write_text_file((dir / "summary.json").string(), result.summary().dump(2) + "\n");
}

ScenarioScript scenario_from_json(const io::json& j) {
  ScenarioScript s;
  try {
    s.name = j.value("name", s.name);
    s.tag_id = j.value("tag_id", s.tag_id);
    s.accept_radius = j.value("accept_radius", s.accept_radius);
    s.observation_rate_hz = j.value("observation_rate_hz", s.observation_rate_hz);
    s.check_cadence = j.value("check_cadence_s", s.check_cadence);
    for (const io::json& p : j.at("timeline")) {
      TimelinePoint tp;
      tp.t = p.at("t").get<double>();
      tp.state = parse_tag_state(p.at("state").get<std::string>());
      if (p.contains("channel")) tp.channel = io::channel_from_json(p.at("channel"));
      s.timeline.push_back(tp);
    }
    s.end_time = j.at("end_time_s").get<double>();
    if (j.contains("sink")) {
      const io::json& k = j.at("sink");
      s.sink.type = k.value("type", s.sink.type);
      s.sink.path = k.value("path", s.sink.path);
      s.sink.url = k.value("url", s.sink.url);
      s.sink.max_attempts = k.value("max_attempts", s.sink.max_attempts);
      s.sink.timeout_s = k.value("timeout_s", s.sink.timeout_s);
    }
  } catch (const io::json::exception& e) {
    invalid(std::string("malformed scenario: ") + e.what());
  }
  if (j.contains("open_signature")) s.open_signature = io::signature_from_json(j.at("open_signature"));
  if (j.contains("closed_signature")) s.closed_signature = io::signature_from_json(j.at("closed_signature"));
  if (j.contains("grid")) s.grid = io::grid_from_json(j.at("grid"));
  if (j.contains("extraction")) s.extraction = io::extraction_from_json(j.at("extraction"));
  if (j.contains("channel")) s.channel = io::channel_from_json(j.at("channel"));
  if (j.contains("debounce")) s.debounce = io::debounce_from_json(j.at("debounce"));
  if (!j.contains("schedule")) invalid("scenario needs a schedule");
  s.schedule = io::schedule_from_json(j.at("schedule"));
  s.validate();
  return s;
}

}  // namespace medtag
