#ifndef CHAINDP_H
#define CHAINDP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum ChaindpStatus {
  CHAINDP_STATUS_OK = 0,
  CHAINDP_STATUS_NULL_POINTER = 1,
  CHAINDP_STATUS_INVALID_INPUT = 2,
  CHAINDP_STATUS_RESOURCE = 3,
  CHAINDP_STATUS_INTERNAL = 4,
  CHAINDP_STATUS_PANIC = 5,
} ChaindpStatus;

/**
 * Opaque chain Hamiltonian.
 */
typedef struct ChaindpHamiltonian ChaindpHamiltonian;

/**
 * Opaque result of the MPS net solver.
 */
typedef struct ChaindpMpsSolution ChaindpMpsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *chaindp_last_error(void);

/**
 * Build a preset chain (`ising_zz`, `heisenberg`, `aklt`, `tfim:g=<g>`).
 *
 * # Safety
 * `name` must be a valid C string and `out` a valid pointer.
 */
enum ChaindpStatus chaindp_hamiltonian_from_preset(const char *name,
                                                   size_t n,
                                                   bool periodic,
                                                   struct ChaindpHamiltonian **out);

/**
 * Parse a Hamiltonian JSON document.
 *
 * # Safety
 * `json` must be a valid C string and `out` a valid pointer.
 */
enum ChaindpStatus chaindp_hamiltonian_from_json(const char *json, struct ChaindpHamiltonian **out);

/**
 * # Safety
 * `h` must come from this library and not be used afterwards.
 */
void chaindp_hamiltonian_free(struct ChaindpHamiltonian *h);

/**
 * Local dimension and chain length.
 *
 * # Safety
 * `h`, `d` and `n` must be valid pointers.
 */
enum ChaindpStatus chaindp_hamiltonian_shape(const struct ChaindpHamiltonian *h,
                                             size_t *d,
                                             size_t *n);

/**
 * Ground energy by dense diagonalization.
 *
 * # Safety
 * `h` and `energy` must be valid pointers.
 */
enum ChaindpStatus chaindp_exact_ground_energy(const struct ChaindpHamiltonian *h, double *energy);

/**
 * Exact minimum of a diagonal chain; writes `N` spin values into
 * `configuration` (capacity `len`).
 *
 * # Safety
 * `configuration` must hold `len` entries; other pointers must be valid.
 */
enum ChaindpStatus chaindp_solve_classical(const struct ChaindpHamiltonian *h,
                                           double *energy,
                                           size_t *configuration,
                                           size_t len);

/**
 * Best product state energy to accuracy `delta`.
 *
 * # Safety
 * `h` and `energy` must be valid pointers.
 */
enum ChaindpStatus chaindp_solve_mean_field(const struct ChaindpHamiltonian *h,
                                            double delta,
                                            double *energy);

/**
 * MPS net solver at bond dimension `bond_dim` with explicit net radii.
 *
 * # Safety
 * `h` and `out` must be valid pointers.
 */
enum ChaindpStatus chaindp_solve_mps(const struct ChaindpHamiltonian *h,
                                     size_t bond_dim,
                                     double eps_rho,
                                     double eps_a,
                                     struct ChaindpMpsSolution **out);

/**
 * Energy of the returned state and the error budget of the nets used.
 *
 * # Safety
 * All pointers must be valid.
 */
enum ChaindpStatus chaindp_mps_solution_energy(const struct ChaindpMpsSolution *s,
                                               double *energy,
                                               double *budget);

/**
 * JSON export of the solution; release with [`chaindp_string_free`].
 *
 * # Safety
 * `s` and `out` must be valid pointers.
 */
enum ChaindpStatus chaindp_mps_solution_json(const struct ChaindpMpsSolution *s, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void chaindp_mps_solution_free(struct ChaindpMpsSolution *s);

/**
 * # Safety
 * `s` must be a string returned by this library.
 */
void chaindp_string_free(char *s);

/**
 * Base-10 logarithms of the mean-field and MPS operation counts.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum ChaindpStatus chaindp_cost_log10(uint64_t n,
                                      uint64_t d,
                                      uint64_t bond_dim,
                                      double delta,
                                      double *mean_field,
                                      double *mps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINDP_H */
