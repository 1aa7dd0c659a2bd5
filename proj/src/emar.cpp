#include "medtag/emar.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "medtag/error.hpp"
#include "medtag/io.hpp"

namespace medtag {
namespace {

std::string fmt_seconds(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

bool in_window(const PrescriptionSchedule& s, std::size_t dose, double t) {
  return t >= s.dose_times[dose] - s.window_before && t <= s.dose_times[dose] + s.window_after;
}

}  // namespace

void PrescriptionSchedule::validate() const {
  if (tag_id.empty()) invalid("schedule needs a tag_id");
  for (std::size_t i = 0; i < dose_times.size(); ++i) {
    if (!std::isfinite(dose_times[i])) invalid("dose times must be finite");
    if (i > 0 && !(dose_times[i] > dose_times[i - 1])) invalid("dose times must be strictly increasing");
  }
  if (!(window_before >= 0.0) || !(window_after >= 0.0)) invalid("dose windows must be >= 0");
  if (max_cycles_per_window < 1) invalid("max_cycles_per_window must be >= 1");
  if (!(cycle_window >= 0.0)) invalid("cycle_window must be >= 0");
}

std::optional<std::size_t> PrescriptionSchedule::window_containing(double t) const {
  for (std::size_t i = 0; i < dose_times.size(); ++i) {
    if (in_window(*this, i, t)) return i;
  }
  return std::nullopt;
}

std::string_view to_string(AlertKind k) {
  switch (k) {
    case AlertKind::kMissedDose: return "MISSED_DOSE";
    case AlertKind::kDoubleDose: return "DOUBLE_DOSE";
    case AlertKind::kUnscheduledAdmin: return "UNSCHEDULED_ADMIN";
  }
  return "MISSED_DOSE";
}

AlertKind parse_alert_kind(std::string_view s) {
  if (s == "MISSED_DOSE") return AlertKind::kMissedDose;
  if (s == "DOUBLE_DOSE") return AlertKind::kDoubleDose;
  if (s == "UNSCHEDULED_ADMIN") return AlertKind::kUnscheduledAdmin;
  invalid("unknown alert kind '" + std::string(s) + "'");
}

std::vector<Alert> AdministrationRecord::alerts() const {
  std::vector<Alert> out;
  for (const RecordEntry& e : entries_) {
    if (const auto* a = std::get_if<AlertEntry>(&e.body)) out.push_back(a->alert);
  }
  for (const RecordEntry& e : entries_) {
    if (const auto* ack = std::get_if<AckEntry>(&e.body)) {
      for (Alert& a : out) {
        if (a.alert_id == ack->alert_id) a.acknowledged = ack->ack;
      }
    }
  }
  return out;
}

std::optional<Alert> AdministrationRecord::find_alert(std::string_view alert_id) const {
  for (const Alert& a : alerts()) {
    if (a.alert_id == alert_id) return a;
  }
  return std::nullopt;
}

std::vector<DrugEvent> AdministrationRecord::events() const {
  std::vector<DrugEvent> out;
  for (const RecordEntry& e : entries_) {
    if (const auto* ev = std::get_if<EventEntry>(&e.body)) out.push_back(ev->event);
  }
  return out;
}

std::string AdministrationRecord::next_alert_id() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "alert-%04zu", ++alert_counter_);
  return buf;
}

void AdministrationRecord::check_time(double now) const {
  if (!std::isfinite(now)) invalid("record time must be finite");
  if (!entries_.empty() && now < entries_.back().recorded_at) {
    invalid("administration record time went backwards");
  }
}

void AdministrationRecord::append_event(double now, EventEntry entry) {
  check_time(now);
  entries_.push_back({entries_.size(), now, std::move(entry)});
}

void AdministrationRecord::append_alert(double now, Alert alert) {
  check_time(now);
  if (find_alert(alert.alert_id)) invalid("duplicate alert id " + alert.alert_id);
  entries_.push_back({entries_.size(), now, AlertEntry{std::move(alert)}});
}

void AdministrationRecord::append_ack(double now, AckEntry entry) {
  check_time(now);
  entries_.push_back({entries_.size(), now, std::move(entry)});
}

std::vector<Alert> evaluate_event(const DrugEvent& ev, const PrescriptionSchedule& sched, AdministrationRecord& rec,
                                  double now) {
  sched.validate();
  if (ev.tag_id != sched.tag_id) {
    invalid("event for tag '" + ev.tag_id + "' evaluated against schedule of tag '" + sched.tag_id + "'");
  }
  if (ev.timestamp > now) invalid("event timestamp lies after the evaluation time");

  std::vector<Alert> raised;
  EventEntry entry{ev, {}, {}};
  auto raise = [&](AlertKind kind, std::string message) {
    Alert a;
    a.alert_id = rec.next_alert_id();
    a.kind = kind;
    a.tag_id = sched.tag_id;
    a.patient_id = sched.patient_id;
    a.timestamp = now;
    a.message = std::move(message);
    entry.alert_ids.push_back(a.alert_id);
    raised.push_back(std::move(a));
  };

  if (ev.kind == DrugEventKind::kOpened) {
    // The opening itself starts a cycle; add every completed cycle that
    // began within the trailing window.
    int cycles = 1;
    const std::vector<DrugEvent> history = rec.events();
    for (std::size_t i = 0; i < history.size(); ++i) {
      const DrugEvent& h = history[i];
      if (h.tag_id != ev.tag_id || h.kind != DrugEventKind::kOpened) continue;
      if (h.timestamp < ev.timestamp - sched.cycle_window) continue;
      const bool completed = std::any_of(history.begin() + static_cast<long>(i) + 1, history.end(), [&](const DrugEvent& c) {
        return c.tag_id == ev.tag_id && c.kind == DrugEventKind::kClosed;
      });
      if (completed) ++cycles;
    }
    if (cycles > sched.max_cycles_per_window) {
      entry.outcomes.emplace_back("double_dose");
      raise(AlertKind::kDoubleDose, "Possible double dose: " + std::to_string(cycles) + " open/close cycles of " +
                                        sched.tag_id + " within " + fmt_seconds(sched.cycle_window) + " s (limit " +
                                        std::to_string(sched.max_cycles_per_window) + ")");
    }
    if (!sched.window_containing(ev.timestamp)) {
      entry.outcomes.emplace_back("unscheduled_admin");
      raise(AlertKind::kUnscheduledAdmin,
            "Container " + sched.tag_id + " opened at t=" + fmt_seconds(ev.timestamp) + " s outside every dose window");
    }
  }
  if (entry.outcomes.empty()) entry.outcomes.emplace_back("ok");

  rec.append_event(now, entry);
  for (const Alert& a : raised) rec.append_alert(now, a);
  return raised;
}

std::vector<Alert> check_missed(const PrescriptionSchedule& sched, AdministrationRecord& rec, double now) {
  sched.validate();
  const std::vector<DrugEvent> history = rec.events();
  const std::vector<Alert> existing = rec.alerts();
  std::vector<Alert> raised;
  for (std::size_t i = 0; i < sched.dose_times.size(); ++i) {
    if (!(sched.dose_times[i] + sched.window_after < now)) continue;
    const bool taken = std::any_of(history.begin(), history.end(), [&](const DrugEvent& e) {
      return e.tag_id == sched.tag_id && e.kind == DrugEventKind::kOpened && in_window(sched, i, e.timestamp);
    });
    if (taken) continue;
    const bool reported = std::any_of(existing.begin(), existing.end(), [&](const Alert& a) {
      return a.kind == AlertKind::kMissedDose && a.tag_id == sched.tag_id && a.dose_index == i;
    });
    if (reported) continue;

    Alert a;
    a.alert_id = rec.next_alert_id();
    a.kind = AlertKind::kMissedDose;
    a.tag_id = sched.tag_id;
    a.patient_id = sched.patient_id;
    a.timestamp = now;
    a.message = "Dose scheduled at t=" + fmt_seconds(sched.dose_times[i]) + " s for patient " + sched.patient_id +
                " may have been missed or should be taken shortly";
    a.dose_index = i;
    rec.append_alert(now, a);
    raised.push_back(std::move(a));
  }
  return raised;
}

void acknowledge(AdministrationRecord& rec, std::string_view alert_id, const std::string& responder, double time) {
  const std::optional<Alert> alert = rec.find_alert(alert_id);
  if (!alert) invalid("no alert with id '" + std::string(alert_id) + "'");
  if (alert->acknowledged) invalid("alert '" + std::string(alert_id) + "' is already acknowledged");
  rec.append_ack(time, AckEntry{std::string(alert_id), Acknowledgement{time, responder}});
}

bool StreamSink::deliver(const std::string& payload) {
  os_ << payload << '\n';
  os_.flush();
  return static_cast<bool>(os_);
}

bool FileSink::deliver(const std::string& payload) {
  std::ofstream out(path_, std::ios::app);
  if (!out) return false;
  out << payload << '\n';
  out.flush();
  return static_cast<bool>(out);
}

HttpSink::HttpSink(const std::string& url, double timeout_s) : timeout_s_(timeout_s) {
  const auto scheme = url.find("://");
  if (url.rfind("http://", 0) != 0 || scheme == std::string::npos) {
    invalid("alert sink URL must start with http://, got '" + url + "'");
  }
  const auto slash = url.find('/', scheme + 3);
  origin_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (origin_.size() <= 7) invalid("alert sink URL has no host: '" + url + "'");
}

bool HttpSink::deliver(const std::string& payload) {
  httplib::Client client(origin_);
  const auto whole = static_cast<time_t>(timeout_s_);
  const auto micros = static_cast<time_t>((timeout_s_ - static_cast<double>(whole)) * 1e6);
  client.set_connection_timeout(whole, micros);
  client.set_read_timeout(whole, micros);
  client.set_write_timeout(whole, micros);
  const auto res = client.Post(path_, payload, "application/json");
  return res && res->status >= 200 && res->status < 300;
}

DeliveryReceipt publish(const Alert& alert, AlertSink& sink, const RetryPolicy& policy) {
  if (alert.alert_id.empty()) invalid("cannot publish an alert without an id");
  if (policy.max_attempts < 1) invalid("retry policy needs max_attempts >= 1");
  const std::string payload = io::alert_wire_json(alert).dump();
  DeliveryReceipt receipt{alert.alert_id, false, 0};
  while (receipt.attempt_count < policy.max_attempts) {
    ++receipt.attempt_count;
    bool ok = false;
    try {
      ok = sink.deliver(payload);
    } catch (const std::exception&) {
      ok = false;
    }
    if (ok) {
      receipt.delivered = true;
      break;
    }
  }
  return receipt;
}

}  // namespace medtag
