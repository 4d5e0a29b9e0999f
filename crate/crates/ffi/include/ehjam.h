#ifndef EHJAM_H
#define EHJAM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Battery size meaning "unbounded".
#define EHJAM_BATTERY_INFINITE 0

typedef enum EhjamStatus {
  EHJAM_STATUS_OK = 0,
  // Argument outside the domain of the model.
  EHJAM_STATUS_DOMAIN = 1,
  // Antenna scheme and counts disagree.
  EHJAM_STATUS_CONFIG = 2,
  // Arrival rate not below the service rate.
  EHJAM_STATUS_UNSTABLE = 3,
  // Constrained problem has no feasible point.
  EHJAM_STATUS_INFEASIBLE = 4,
  // A numerical routine could not be trusted.
  EHJAM_STATUS_NUMERICAL = 5,
  // A required pointer was null.
  EHJAM_STATUS_NULL_POINTER = 6,
  // Internal panic caught at the boundary.
  EHJAM_STATUS_PANIC = 7,
} EhjamStatus;

typedef enum EhjamScheme {
  EHJAM_SCHEME_MISO = 0,
  EHJAM_SCHEME_SIMO = 1,
  EHJAM_SCHEME_ALAMOUTI = 2,
} EhjamScheme;

typedef enum EhjamBufferMode {
  EHJAM_BUFFER_MODE_CASE_SPLIT = 0,
  EHJAM_BUFFER_MODE_EXACT = 1,
} EhjamBufferMode;

typedef enum EhjamBinding {
  EHJAM_BINDING_INTERIOR = 0,
  EHJAM_BINDING_DELAY_BOUND = 1,
  EHJAM_BINDING_STABILITY_BOUND = 2,
} EhjamBinding;

// Opaque two-user broadcast configuration.
typedef struct EhjamBroadcast EhjamBroadcast;

// Opaque point-to-point link: antennas, powers, rate and jammer.
typedef struct EhjamLink EhjamLink;

typedef struct EhjamLatency {
  double queue_length;
  double delay;
  double aaoi;
} EhjamLatency;

typedef struct EhjamOptimum {
  double lambda_opt;
  double aaoi_opt;
  double delay_at_opt;
  enum EhjamBinding binding;
} EhjamOptimum;

typedef struct EhjamSimReport {
  double mu_hat;
  double mu_std_err;
  double delay_hat;
  double delay_tx_hat;
  double delay_queue_hat;
  double aaoi_hat;
  double qlen_hat;
  double jam_fraction;
  double empty_fraction;
  uint64_t deliveries;
  uint64_t n_slots;
  uint64_t warmup;
  uint64_t seed;
  bool unstable_warning;
} EhjamSimReport;

typedef struct EhjamSuccess {
  // Success probability of user 1 and 2 when transmitting alone.
  double single[2];
  // Success probability of user 1 and 2 when both transmit.
  double both[2];
} EhjamSuccess;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a
// success. The pointer stays valid until the next call on the same thread.
const char *ehjam_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ehjam_version(void);

// Create a link. `battery` is the jammer's battery size in energy units,
// or `EHJAM_BATTERY_INFINITE`. Powers are linear with unit noise.
//
// # Safety
// `out` must be valid for a pointer write.
enum EhjamStatus ehjam_link_new(enum EhjamScheme scheme,
                                uint32_t n_t,
                                uint32_t n_r,
                                double power_tx,
                                double power_jam,
                                double rate,
                                double p_jam,
                                double delta,
                                uint32_t battery,
                                enum EhjamBufferMode mode,
                                struct EhjamLink **out);

// Release a link. Null is ignored.
//
// # Safety
// `link` must be null or a handle from `ehjam_link_new` not yet freed.
void ehjam_link_free(struct EhjamLink *link);

// Outage probability with a jamming burst and without one.
//
// # Safety
// `link` must be a live handle; outputs must be valid for writes.
enum EhjamStatus ehjam_link_outage(const struct EhjamLink *link,
                                   double *out_jam,
                                   double *out_no_jam);

// Long-run probability that the jammer's battery is empty.
//
// # Safety
// `link` must be a live handle; `out` must be valid for a write.
enum EhjamStatus ehjam_link_buffer_empty_probability(const struct EhjamLink *link, double *out);

// Average per-slot service rate.
//
// # Safety
// `link` must be a live handle; `out` must be valid for a write.
enum EhjamStatus ehjam_link_service_rate(const struct EhjamLink *link, double *out);

// Queue length, delay and average age for arrival rate `lambda` and
// service rate `mu`. Fails with `EHJAM_STATUS_UNSTABLE` unless `lambda < mu`.
//
// # Safety
// `out` must be valid for a write.
enum EhjamStatus ehjam_latency(double lambda, double mu, struct EhjamLatency *out);

// Age-optimal arrival rate. Pass `d_th = INFINITY` for no delay cap.
//
// # Safety
// `out` must be valid for a write.
enum EhjamStatus ehjam_optimize(double mu, double d_th, struct EhjamOptimum *out);

// Slot-level simulation with Bernoulli(`lambda`) arrivals. The first
// `warmup_fraction` of the slots is discarded.
//
// # Safety
// `link` must be a live handle; `out` must be valid for a write.
enum EhjamStatus ehjam_link_simulate(const struct EhjamLink *link,
                                     double lambda,
                                     uint64_t n_slots,
                                     double warmup_fraction,
                                     uint64_t seed,
                                     struct EhjamSimReport *out);

// Create a two-user broadcast configuration with `n_r` receive antennas
// per user, powers `p1`/`p2`, decoding thresholds `gamma1`/`gamma2`.
//
// # Safety
// `out` must be valid for a pointer write.
enum EhjamStatus ehjam_broadcast_new(uint32_t n_r,
                                     double p1,
                                     double p2,
                                     double gamma1,
                                     double gamma2,
                                     double power_jam,
                                     double p_jam,
                                     struct EhjamBroadcast **out);

// Release a broadcast configuration. Null is ignored.
//
// # Safety
// `b` must be null or a handle from `ehjam_broadcast_new` not yet freed.
void ehjam_broadcast_free(struct EhjamBroadcast *b);

// The four per-user success probabilities.
//
// # Safety
// `b` must be a live handle; `out` must be valid for a write.
enum EhjamStatus ehjam_broadcast_probabilities(const struct EhjamBroadcast *b,
                                               struct EhjamSuccess *out);

// Whether the arrival pair lies in the stability region.
//
// # Safety
// `b` must be a live handle; `out` must be valid for a write.
enum EhjamStatus ehjam_broadcast_is_stable(const struct EhjamBroadcast *b,
                                           double lambda_1,
                                           double lambda_2,
                                           bool *out);

// Vertices of the stability region's boundary, counter-clockwise from
// the origin, as interleaved `(lambda_1, lambda_2)` pairs. Writes up to
// `capacity` pairs into `xy` (which may be null when `capacity` is 0) and
// the total number of vertices into `out_len`.
//
// # Safety
// `b` must be a live handle; `xy` must be valid for `2 * capacity` doubles.
enum EhjamStatus ehjam_broadcast_region_vertices(const struct EhjamBroadcast *b,
                                                 double *xy,
                                                 size_t capacity,
                                                 size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EHJAM_H */
