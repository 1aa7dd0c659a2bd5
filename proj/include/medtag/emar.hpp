#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "medtag/events.hpp"

namespace medtag {

struct PrescriptionSchedule {
  std::string tag_id;
  std::string patient_id;
  std::vector<double> dose_times;
  double window_before = 0.0;
  double window_after = 0.0;
  int max_cycles_per_window = 1;
  double cycle_window = 300.0;

  void validate() const;
  /// Index of the first dose whose window contains t.
  std::optional<std::size_t> window_containing(double t) const;
};

enum class AlertKind { kMissedDose, kDoubleDose, kUnscheduledAdmin };

std::string_view to_string(AlertKind k);
AlertKind parse_alert_kind(std::string_view s);

struct Acknowledgement {
  double time = 0.0;
  std::string responder;

  bool operator==(const Acknowledgement&) const = default;
};

struct Alert {
  std::string alert_id;
  AlertKind kind = AlertKind::kMissedDose;
  std::string tag_id;
  std::string patient_id;
  double timestamp = 0.0;
  std::string message;
  std::optional<Acknowledgement> acknowledged;
  /// Dose a MISSED_DOSE alert refers to.
  std::optional<std::size_t> dose_index;

  bool operator==(const Alert&) const = default;
};

struct EventEntry {
  DrugEvent event;
  std::vector<std::string> outcomes;
  std::vector<std::string> alert_ids;

  bool operator==(const EventEntry&) const = default;
};

struct AlertEntry {
  Alert alert;

  bool operator==(const AlertEntry&) const = default;
};

struct AckEntry {
  std::string alert_id;
  Acknowledgement ack;

  bool operator==(const AckEntry&) const = default;
};

struct RecordEntry {
  std::size_t seq = 0;
  double recorded_at = 0.0;
  std::variant<EventEntry, AlertEntry, AckEntry> body;

  bool operator==(const RecordEntry&) const = default;
};

/// Append-only administration log. Entries are never modified or removed;
/// acknowledgements are separate entries that refer back to an alert.
class AdministrationRecord {
 public:
  const std::vector<RecordEntry>& entries() const noexcept { return entries_; }

  /// Every alert in emission order, with acknowledgements folded in.
  std::vector<Alert> alerts() const;
  std::optional<Alert> find_alert(std::string_view alert_id) const;
  std::vector<DrugEvent> events() const;

  /// Deterministic id for the next alert ("alert-0001", ...).
  std::string next_alert_id();

  void append_event(double now, EventEntry entry);
  void append_alert(double now, Alert alert);
  void append_ack(double now, AckEntry entry);

 private:
  void check_time(double now) const;

  std::vector<RecordEntry> entries_;
  std::size_t alert_counter_ = 0;
};

/// Records `ev` and returns any DOUBLE_DOSE / UNSCHEDULED_ADMIN alerts it
/// raises. The alerts are also appended to the record.
std::vector<Alert> evaluate_event(const DrugEvent& ev, const PrescriptionSchedule& sched, AdministrationRecord& rec,
                                  double now);

/// One MISSED_DOSE alert per dose whose window closed before `now` without an
/// OPENED event. Idempotent.
std::vector<Alert> check_missed(const PrescriptionSchedule& sched, AdministrationRecord& rec, double now);

void acknowledge(AdministrationRecord& rec, std::string_view alert_id, const std::string& responder, double time);

class AlertSink {
 public:
  virtual ~AlertSink() = default;
  /// One delivery attempt; true on success.
  virtual bool deliver(const std::string& payload) = 0;
};

class StreamSink : public AlertSink {
 public:
  explicit StreamSink(std::ostream& os) : os_(os) {}
  bool deliver(const std::string& payload) override;

 private:
  std::ostream& os_;
};

/// Appends one JSON line per alert.
class FileSink : public AlertSink {
 public:
  explicit FileSink(std::string path) : path_(std::move(path)) {}
  bool deliver(const std::string& payload) override;

 private:
  std::string path_;
};

/// POSTs the alert JSON to an http:// URL. 2xx counts as delivered.
class HttpSink : public AlertSink {
 public:
  explicit HttpSink(const std::string& url, double timeout_s = 2.0);
  bool deliver(const std::string& payload) override;

 private:
  std::string origin_;
  std::string path_;
  double timeout_s_;
};

struct RetryPolicy {
  int max_attempts = 3;
};

struct DeliveryReceipt {
  std::string alert_id;
  bool delivered = false;
  int attempt_count = 0;
};

DeliveryReceipt publish(const Alert& alert, AlertSink& sink, const RetryPolicy& policy = {});

}  // namespace medtag
