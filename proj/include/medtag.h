/*
 * medtag C API.
 *
 * Every function returns a medtag_status. On failure, medtag_last_error()
 * returns a message for the calling thread until its next API call.
 * Objects are opaque handles released with their *_destroy function.
 * Strings returned through char** are heap allocated and must be released
 * with medtag_string_free(). Structured inputs and outputs are JSON text in
 * the same formats the file interfaces use.
 */
#ifndef MEDTAG_H
#define MEDTAG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MEDTAG_BUILDING_LIBRARY)
#define MEDTAG_API __declspec(dllexport)
#else
#define MEDTAG_API __declspec(dllimport)
#endif
#else
#define MEDTAG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum medtag_status {
  MEDTAG_OK = 0,
  MEDTAG_ERR_INVALID_ARGUMENT = 1,
  MEDTAG_ERR_RUNTIME = 2,
  MEDTAG_ERR_IO = 3,
  MEDTAG_ERR_NULL_POINTER = 4,
  MEDTAG_ERR_OUT_OF_RANGE = 5
} medtag_status;

typedef struct medtag_signature medtag_signature;
typedef struct medtag_time_signal medtag_time_signal;
typedef struct medtag_spectrum medtag_spectrum;
typedef struct medtag_debouncer medtag_debouncer;
typedef struct medtag_emar medtag_emar;
typedef struct medtag_sweep_table medtag_sweep_table;

MEDTAG_API const char* medtag_version(void);
MEDTAG_API const char* medtag_last_error(void);
MEDTAG_API const char* medtag_status_string(medtag_status status);
MEDTAG_API void medtag_string_free(char* s);

/* ---- signal model ------------------------------------------------------ */

/* {label, poles: [{alpha, omega, residue_re, residue_im}]} */
MEDTAG_API medtag_status medtag_signature_from_json(const char* json, medtag_signature** out);
/* The three-pole reference signature (1.0 / 1.75 / 2.5 GHz). */
MEDTAG_API medtag_status medtag_signature_reference(medtag_signature** out);
/* Default container event signature: closed != 0 for the lid-on state. */
MEDTAG_API medtag_status medtag_signature_event(int closed, medtag_signature** out);
MEDTAG_API medtag_status medtag_signature_pole_count(const medtag_signature* sig, size_t* out);
MEDTAG_API medtag_status medtag_signature_to_json(const medtag_signature* sig, char** out);
MEDTAG_API void medtag_signature_destroy(medtag_signature* sig);

/* grid_json may be NULL for the default grid:
 * {dt_s, n_samples, f_start_hz, f_stop_hz} */
MEDTAG_API medtag_status medtag_synthesize_time(const medtag_signature* sig, const char* grid_json,
                                                medtag_time_signal** out);
MEDTAG_API medtag_status medtag_time_signal_size(const medtag_time_signal* ts, size_t* out);
MEDTAG_API medtag_status medtag_time_signal_sample(const medtag_time_signal* ts, size_t index, double* re,
                                                   double* im);
/* header t_s,re,im,abs */
MEDTAG_API medtag_status medtag_time_signal_to_csv(const medtag_time_signal* ts, char** out);
MEDTAG_API void medtag_time_signal_destroy(medtag_time_signal* ts);

/* Discrete transform on every DFT bin of the signal's grid, or only the
 * bins inside the sweep band when band_only != 0. */
MEDTAG_API medtag_status medtag_spectrum_dft(const medtag_time_signal* ts, int band_only, medtag_spectrum** out);
MEDTAG_API medtag_status medtag_spectrum_analytic(const medtag_signature* sig, const char* grid_json, int band_only,
                                                  medtag_spectrum** out);
/* header f_hz,re,im[,abs] */
MEDTAG_API medtag_status medtag_spectrum_from_csv(const char* csv, medtag_spectrum** out);
MEDTAG_API medtag_status medtag_spectrum_to_csv(const medtag_spectrum* sp, char** out);
MEDTAG_API medtag_status medtag_spectrum_size(const medtag_spectrum* sp, size_t* out);
MEDTAG_API medtag_status medtag_spectrum_bin(const medtag_spectrum* sp, size_t index, double* f_hz, double* re,
                                             double* im);
/* {snr_db | null, phase_noise_deg, seed} */
MEDTAG_API medtag_status medtag_spectrum_apply_channel(const medtag_spectrum* sp, const char* channel_json,
                                                       medtag_spectrum** out);
MEDTAG_API medtag_status medtag_spectrum_inverse(const medtag_spectrum* sp, const char* grid_json,
                                                 medtag_time_signal** out);
MEDTAG_API void medtag_spectrum_destroy(medtag_spectrum* sp);

/* ---- decoders ---------------------------------------------------------- */

/* mpm_json may be NULL: {pencil_param, order | threshold, engine} */
MEDTAG_API medtag_status medtag_estimate_poles(const medtag_time_signal* ts, const char* mpm_json,
                                               char** estimate_json);
MEDTAG_API medtag_status medtag_mpm_error(const medtag_signature* truth, const char* estimate_json, double* out);

/* extraction_json may be NULL for defaults. Output: [{f_hz, w_hz, d_db}] */
MEDTAG_API medtag_status medtag_extract_pattern(const medtag_spectrum* sp, const char* extraction_json,
                                                char** pattern_json);
MEDTAG_API medtag_status medtag_pattern_distance(const char* pattern_a_json, const char* pattern_b_json,
                                                 double* out);
/* templates_json: [{label, notches, weights, accept_radius}].
 * Output: {label, distance, template_index | null} */
MEDTAG_API medtag_status medtag_classify(const medtag_spectrum* sp, const char* templates_json,
                                         const char* extraction_json, char** result_json);
/* One template per pole subset, labelled by bit string. */
MEDTAG_API medtag_status medtag_code_templates(const medtag_signature* sig, const char* extraction_json,
                                               double accept_radius, char** templates_json);
/* tagset_json: {tag_id, open_template, closed_template, codebook?}.
 * Output: {state, confidence} */
MEDTAG_API medtag_status medtag_classify_state(const medtag_spectrum* sp, const char* tagset_json,
                                               const char* extraction_json, char** result_json);
/* slots_json: {slot_freqs_hz: [...], tolerance_hz, codebook?: {"101": "..."}}.
 * Output: {bits: "101", code: string | null} */
MEDTAG_API medtag_status medtag_decode_bits(const char* pattern_json, const char* slots_json, char** result_json);

/* ---- event stream ------------------------------------------------------ */

MEDTAG_API medtag_status medtag_debouncer_create(const char* tag_id, double hold_time_s, double unknown_grace_s,
                                                 medtag_debouncer** out);
/* state is "OPEN", "CLOSED" or "UNKNOWN". *event_json is set to NULL when no
 * event is emitted, otherwise to {ts, tag_id, kind, confidence}. */
MEDTAG_API medtag_status medtag_debouncer_advance(medtag_debouncer* d, const char* state, double confidence,
                                                  double timestamp, char** event_json);
MEDTAG_API void medtag_debouncer_destroy(medtag_debouncer* d);

/* ---- eMAR -------------------------------------------------------------- */

/* {tag_id, patient_id, dose_times, window_before_s, window_after_s,
 *  max_cycles_per_window, cycle_window_s} */
MEDTAG_API medtag_status medtag_emar_create(const char* schedule_json, medtag_emar** out);
/* Output: JSON list of alerts raised by the event. */
MEDTAG_API medtag_status medtag_emar_evaluate_event(medtag_emar* emar, const char* event_json, double now,
                                                    char** alerts_json);
MEDTAG_API medtag_status medtag_emar_check_missed(medtag_emar* emar, double now, char** alerts_json);
MEDTAG_API medtag_status medtag_emar_acknowledge(medtag_emar* emar, const char* alert_id, const char* responder,
                                                 double time);
MEDTAG_API medtag_status medtag_emar_record_jsonl(const medtag_emar* emar, char** out);
MEDTAG_API medtag_status medtag_emar_alerts_json(const medtag_emar* emar, char** out);
/* sink_json: {type: "stdout" | "file" | "http", path, url, max_attempts, timeout_s}.
 * Output: {alert_id, delivered, attempt_count} */
MEDTAG_API medtag_status medtag_emar_publish(const medtag_emar* emar, const char* alert_id, const char* sink_json,
                                             char** receipt_json);
MEDTAG_API void medtag_emar_destroy(medtag_emar* emar);

/* ---- experiment harness ------------------------------------------------ */

MEDTAG_API medtag_status medtag_sweep_run(const char* config_json, medtag_sweep_table** out);
MEDTAG_API medtag_status medtag_sweep_table_rows(const medtag_sweep_table* t, size_t* out);
MEDTAG_API medtag_status medtag_sweep_table_row(const medtag_sweep_table* t, size_t index, double* snr_db,
                                                size_t* trials, double* mpm_err_mean, double* mpm_err_std,
                                                double* pra_err_rate);
/* header snr_db,trials,mpm_err_mean,mpm_err_std,pra_err_rate */
MEDTAG_API medtag_status medtag_sweep_table_csv(const medtag_sweep_table* t, char** out);
/* Writes the CSV plus a .manifest.json next to it. */
MEDTAG_API medtag_status medtag_sweep_table_export(const medtag_sweep_table* t, const char* path);
MEDTAG_API void medtag_sweep_table_destroy(medtag_sweep_table* t);

/* out_dir may be NULL (nothing written). sink_json may be NULL to use the
 * script's sink. Output: run summary JSON. */
MEDTAG_API medtag_status medtag_scenario_run(const char* script_json, const char* out_dir, const char* sink_json,
                                             char** summary_json);

/* Output: [{name, passed, value, limit}]; *all_passed is 1 when every check passed. */
MEDTAG_API medtag_status medtag_self_check(char** report_json, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* MEDTAG_H */
