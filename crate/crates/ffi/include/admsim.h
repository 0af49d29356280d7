#ifndef ADMSIM_H
#define ADMSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Polarity codes used across the interface.
 */
#define ADMSIM_OFF 0

#define ADMSIM_ON 1

/**
 * Returned by `admsim_encoder_step` when no event fires.
 */
#define ADMSIM_NO_EVENT -1

/**
 * Result code of every call.
 */
typedef enum AdmsimStatus {
  ADMSIM_STATUS_OK = 0,
  ADMSIM_STATUS_NULL_POINTER = 1,
  ADMSIM_STATUS_INVALID_ARGUMENT = 2,
  ADMSIM_STATUS_PARSE = 3,
  ADMSIM_STATUS_FORMAT = 4,
  ADMSIM_STATUS_DOMAIN = 5,
  ADMSIM_STATUS_NUMERICAL = 6,
  ADMSIM_STATUS_IO = 7,
  ADMSIM_STATUS_BUFFER_TOO_SMALL = 8,
  ADMSIM_STATUS_PANIC = 9,
} AdmsimStatus;

/**
 * Streaming delta modulator handle.
 */
typedef struct AdmsimEncoder AdmsimEncoder;

/**
 * Spike train handle.
 */
typedef struct AdmsimSpikeTrain AdmsimSpikeTrain;

/**
 * Delta modulator parameters, mirroring the library's configuration.
 */
typedef struct AdmsimAdmConfig {
  double delta_on_v;
  double delta_off_v;
  double gain_a;
  uint64_t reset_delay_us;
  uint64_t refractory_us;
  double v_ref;
} AdmsimAdmConfig;

typedef struct AdmsimMatchReport {
  uint64_t tp;
  uint64_t fp;
  uint64_t fn_;
  double precision;
  double recall;
  double f1;
} AdmsimMatchReport;

typedef struct AdmsimEnergyModel {
  double energy_per_spike_j;
  double dynamic_power_w;
  double supply_v;
} AdmsimEnergyModel;

typedef struct AdmsimEnergyReport {
  double dynamic_energy_j;
  double avg_power_w;
} AdmsimEnergyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` as a
 * NUL-terminated string, truncating if needed. Returns the full message
 * length in bytes, excluding the terminator.
 */
size_t admsim_last_error_message(char *buf, size_t buf_len);

enum AdmsimStatus admsim_adm_config_default(struct AdmsimAdmConfig *out);

enum AdmsimStatus admsim_encoder_new(const struct AdmsimAdmConfig *config,
                                     struct AdmsimEncoder **out);

/**
 * Feeds one sample. `out_polarity` receives `ADMSIM_ON`, `ADMSIM_OFF` or
 * `ADMSIM_NO_EVENT`. Samples must arrive in time order.
 */
enum AdmsimStatus admsim_encoder_step(struct AdmsimEncoder *encoder,
                                      uint64_t t_us,
                                      double x,
                                      int32_t *out_polarity);

enum AdmsimStatus admsim_encoder_reset(struct AdmsimEncoder *encoder);

void admsim_encoder_free(struct AdmsimEncoder *encoder);

/**
 * Behavioral delta modulation of a whole sample buffer starting at t = 0.
 */
enum AdmsimStatus admsim_adm_encode(const double *samples,
                                    size_t len,
                                    double sample_rate_hz,
                                    const struct AdmsimAdmConfig *config,
                                    struct AdmsimSpikeTrain **out);

/**
 * Threshold detector. `absolute` selects a fixed level in volts; otherwise
 * `k_or_level` multiplies the buffer's rms.
 */
enum AdmsimStatus admsim_threshold_encode(const double *samples,
                                          size_t len,
                                          double sample_rate_hz,
                                          bool absolute,
                                          double k_or_level,
                                          uint64_t refractory_us,
                                          struct AdmsimSpikeTrain **out);

/**
 * Builds a train from parallel timestamp and polarity arrays.
 */
enum AdmsimStatus admsim_train_new(const uint64_t *timestamps_us,
                                   const int32_t *polarities,
                                   size_t len,
                                   uint64_t duration_us,
                                   struct AdmsimSpikeTrain **out);

enum AdmsimStatus admsim_train_len(const struct AdmsimSpikeTrain *train, size_t *out_len);

enum AdmsimStatus admsim_train_duration(const struct AdmsimSpikeTrain *train,
                                        uint64_t *out_duration_us);

enum AdmsimStatus admsim_train_get(const struct AdmsimSpikeTrain *train,
                                   size_t index,
                                   uint64_t *out_timestamp_us,
                                   int32_t *out_polarity);

void admsim_train_free(struct AdmsimSpikeTrain *train);

/**
 * Tolerance-windowed matching, per polarity.
 */
enum AdmsimStatus admsim_match(const struct AdmsimSpikeTrain *reference,
                               const struct AdmsimSpikeTrain *candidate,
                               uint64_t tolerance_us,
                               struct AdmsimMatchReport *out);

enum AdmsimStatus admsim_energy_model_default(struct AdmsimEnergyModel *out);

enum AdmsimStatus admsim_energy(const struct AdmsimSpikeTrain *train,
                                const struct AdmsimEnergyModel *model,
                                struct AdmsimEnergyReport *out);

enum AdmsimStatus admsim_pearson(const double *x, const double *y, size_t len, double *out);

/**
 * Encodes parallel event arrays as 8-byte AER records into `buf`.
 * `out_written` receives the byte count; when `buf_len` is too small it
 * receives the required size and `BufferTooSmall` is returned.
 */
enum AdmsimStatus admsim_aer_serialize(const uint64_t *timestamps_us,
                                       const uint16_t *channels,
                                       const int32_t *polarities,
                                       size_t len,
                                       uint8_t *buf,
                                       size_t buf_len,
                                       size_t *out_written);

/**
 * Decodes AER records into caller arrays with room for `capacity` events.
 * `out_len` receives the event count, also when the arrays are too small.
 */
enum AdmsimStatus admsim_aer_deserialize(const uint8_t *bytes,
                                         size_t bytes_len,
                                         uint64_t *timestamps_us,
                                         uint16_t *channels,
                                         int32_t *polarities,
                                         size_t capacity,
                                         size_t *out_len);

/**
 * Size in bytes of one AER record.
 */
size_t admsim_aer_record_bytes(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADMSIM_H */
