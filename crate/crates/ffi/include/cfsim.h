#ifndef CFSIM_H
#define CFSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CfsimStatus {
  CFSIM_STATUS_OK = 0,
  CFSIM_STATUS_NULL_POINTER = 1,
  CFSIM_STATUS_INVALID_ARGUMENT = 2,
  CFSIM_STATUS_PARSE = 3,
  CFSIM_STATUS_POWER_FLOW = 4,
  CFSIM_STATUS_INTEGRATION = 5,
  CFSIM_STATUS_EIGEN = 6,
  CFSIM_STATUS_BUFFER_TOO_SMALL = 7,
  CFSIM_STATUS_PANIC = 8,
} CfsimStatus;

typedef enum CfsimControl {
  CFSIM_CONTROL_NO_CIG = 0,
  CFSIM_CONTROL_CIG_OMEGA = 1,
  CFSIM_CONTROL_CIG_OMEGA_TILDE = 2,
} CfsimControl;

// A network case.
typedef struct CfsimNetwork CfsimNetwork;

// A time-domain simulation with its model and state.
typedef struct CfsimSimulation CfsimSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message into `buf` (NUL-terminated, truncated to
// `len`) and returns the full message length excluding the terminator.
// `buf` must be null or valid for `len` bytes.
size_t cfsim_last_error(char *buf, size_t len);

// Loads the bundled WSCC 9-bus case.
// `out` must be valid for a pointer write.
enum CfsimStatus cfsim_network_wscc9(struct CfsimNetwork **out);

// Parses a case from NUL-terminated text.
// `text` must be a valid C string and `out` valid for a pointer write.
enum CfsimStatus cfsim_network_parse(const char *text, struct CfsimNetwork **out);

// `net` must be null or a handle from this library not yet freed.
void cfsim_network_free(struct CfsimNetwork *net);

// Number of buses, or 0 for a null handle.
// `net` must be null or a live handle.
size_t cfsim_network_bus_count(const struct CfsimNetwork *net);

// Scales the load at `bus` by `factor` in place.
// `net` must be a live handle.
enum CfsimStatus cfsim_network_scale_load(struct CfsimNetwork *net, int64_t bus, double factor);

// Solves the power flow; writes magnitudes (pu) and angles (rad) in bus
// order into arrays of length `len`, which must be at least the bus count.
// `v_mag` and `v_ang` must be valid for `len` writes.
enum CfsimStatus cfsim_power_flow(const struct CfsimNetwork *net,
                                  double tol,
                                  double *v_mag,
                                  double *v_ang,
                                  size_t len);

// Initializes a simulation at the power-flow equilibrium. `k` is used only
// with `CFSIM_CONTROL_CIG_OMEGA_TILDE`.
// `net` must be a live handle and `out` valid for a pointer write.
enum CfsimStatus cfsim_simulation_new(const struct CfsimNetwork *net,
                                      enum CfsimControl control,
                                      double k,
                                      struct CfsimSimulation **out);

// `sim` must be null or a live handle.
void cfsim_simulation_free(struct CfsimSimulation *sim);

// Advances the simulation by `h` seconds with one trapezoidal step.
// `sim` must be a live handle.
enum CfsimStatus cfsim_simulation_step(struct CfsimSimulation *sim, double h);

// Scales the load at `bus` at the current time.
// `sim` must be a live handle.
enum CfsimStatus cfsim_simulation_scale_load(struct CfsimSimulation *sim,
                                             int64_t bus,
                                             double factor);

// Current simulation time in seconds, or NaN for a null handle.
// `sim` must be null or a live handle.
double cfsim_simulation_time(const struct CfsimSimulation *sim);

// Number of output channels.
// `sim` must be null or a live handle.
size_t cfsim_simulation_channel_count(const struct CfsimSimulation *sim);

// Copies the name of channel `index` into `buf` as a C string.
// `sim` must be a live handle and `buf` valid for `len` bytes.
enum CfsimStatus cfsim_simulation_channel_name(const struct CfsimSimulation *sim,
                                               size_t index,
                                               char *buf,
                                               size_t len);

// Writes the current value of every channel into `values`.
// `sim` must be a live handle and `values` valid for `len` writes.
enum CfsimStatus cfsim_simulation_channels(const struct CfsimSimulation *sim,
                                           double *values,
                                           size_t len);

// Eigenvalue of the frequency-control mode with the converter frequency
// loop disconnected.
// `net` must be a live handle; `re` and `im` valid for writes.
enum CfsimStatus cfsim_frequency_mode(const struct CfsimNetwork *net, double *re, double *im);

// Instantaneous `rho` (1/s) and `omega` (rad/s) of a dq voltage with
// derivative `(vd_dot, vq_dot)` in a frame rotating at `omega_ref`.
// `rho` and `omega` must be valid for writes.
enum CfsimStatus cfsim_complex_frequency(double vd,
                                         double vq,
                                         double vd_dot,
                                         double vq_dot,
                                         double omega_ref,
                                         double *rho,
                                         double *omega);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CFSIM_H */
