#ifndef TRISTOCH_H
#define TRISTOCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `TS_STATUS_OK` is zero; everything else is an error.
 */
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_ARGUMENT = 2,
  TS_STATUS_DIMENSION = 3,
  TS_STATUS_NOT_CHANNEL = 4,
  TS_STATUS_NO_IDENTITY = 5,
  TS_STATUS_TOO_LARGE = 6,
  TS_STATUS_PARSE = 7,
  TS_STATUS_IO = 8,
  TS_STATUS_PANIC = 9,
} TsStatus;

/**
 * Opaque channel, stored as its dynamical matrix.
 */
typedef struct TsChannel TsChannel;

/**
 * Opaque stochastic tensor.
 */
typedef struct TsTensor TsTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread; empty after a
 * successful call. Valid until the next call on the same thread.
 */
const char *ts_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer obtained from this library and not yet freed.
 */
void ts_string_free(char *s);

/**
 * Builds a tensor of `order` indices over `dim` symbols from `dim^order`
 * row-major entries. Entries are validated as a probability array.
 *
 * # Safety
 * `entries` must point to `len` doubles; `out` must be writable.
 */
enum TsStatus ts_tensor_new(size_t order,
                            size_t dim,
                            const double *entries,
                            size_t len,
                            struct TsTensor **out);

/**
 * The cyclic group tensor `A[i,j,k] = [i = j + k mod n]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum TsStatus ts_tensor_cyclic(size_t n, struct TsTensor **out);

/**
 * Parses `{"order", "dim", "entries"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TsStatus ts_tensor_from_json(const char *json, struct TsTensor **out);

/**
 * Serialises a tensor; release the result with [`ts_string_free`].
 *
 * # Safety
 * `t` must be a live tensor handle; `out` must be writable.
 */
enum TsStatus ts_tensor_to_json(const struct TsTensor *t, char **out);

/**
 * # Safety
 * `t` must be null or a live tensor handle.
 */
void ts_tensor_free(struct TsTensor *t);

/**
 * Number of symbols per index; zero for a null handle.
 *
 * # Safety
 * `t` must be null or a live tensor handle.
 */
size_t ts_tensor_dim(const struct TsTensor *t);

/**
 * Number of indices; zero for a null handle.
 *
 * # Safety
 * `t` must be null or a live tensor handle.
 */
size_t ts_tensor_order(const struct TsTensor *t);

/**
 * Writes 1 if every axis sums to one within `tol`, else 0.
 *
 * # Safety
 * `t` must be a live tensor handle; `out` must be writable.
 */
enum TsStatus ts_tensor_is_m_stochastic(const struct TsTensor *t, double tol, int32_t *out);

/**
 * Convolution `r_i = sum_jk A[i,j,k] p_j q_k` of a 3-index tensor.
 *
 * # Safety
 * `p`, `q` and `out` must each hold `n` doubles, `n` the tensor dimension.
 */
enum TsStatus ts_tensor_convolve(const struct TsTensor *t,
                                 const double *p,
                                 const double *q,
                                 size_t n,
                                 double *out);

/**
 * Writes the 0-based index of the identity vertex, or -1 if there is none.
 *
 * # Safety
 * `t` must be a live tensor handle; `out` must be writable.
 */
enum TsStatus ts_tensor_find_identity(const struct TsTensor *t, int64_t *out);

/**
 * Writes the number of reducing sets found by exhaustive search.
 *
 * # Safety
 * `t` must be a live tensor handle; `out` must be writable.
 */
enum TsStatus ts_tensor_reducing_set_count(const struct TsTensor *t, size_t *out);

/**
 * Coherifies a permutation tensor with the default block family for its
 * dimension.
 *
 * # Safety
 * `t` must be a live tensor handle; `out` must be writable.
 */
enum TsStatus ts_channel_coherify(const struct TsTensor *t, struct TsChannel **out);

/**
 * Diagonal lift `D = diag(A)` of any tensor.
 *
 * # Safety
 * `t` must be a live tensor handle; `out` must be writable.
 */
enum TsStatus ts_channel_diagonal(const struct TsTensor *t, struct TsChannel **out);

/**
 * Parses `{"parts", "dim", "re", "im"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TsStatus ts_channel_from_json(const char *json, struct TsChannel **out);

/**
 * Serialises a channel; release the result with [`ts_string_free`].
 *
 * # Safety
 * `c` must be a live channel handle; `out` must be writable.
 */
enum TsStatus ts_channel_to_json(const struct TsChannel *c, char **out);

/**
 * # Safety
 * `c` must be null or a live channel handle.
 */
void ts_channel_free(struct TsChannel *c);

/**
 * Local dimension of each subsystem; zero for a null handle.
 *
 * # Safety
 * `c` must be null or a live channel handle.
 */
size_t ts_channel_dim(const struct TsChannel *c);

/**
 * Writes 1 if the dynamical matrix is positive and trace preserving, else 0.
 *
 * # Safety
 * `c` must be a live channel handle; `out` must be writable.
 */
enum TsStatus ts_channel_is_channel(const struct TsChannel *c, int32_t *out);

/**
 * Writes 1 if every single-subsystem partial trace is the identity, else 0.
 *
 * # Safety
 * `c` must be a live channel handle; `out` must be writable.
 */
enum TsStatus ts_channel_is_m_stochastic(const struct TsChannel *c, int32_t *out);

/**
 * Writes the l2 coherence: squared off-diagonal moduli of the dynamical
 * matrix, summed and divided by `N^(2(m-1))`.
 *
 * # Safety
 * `c` must be a live channel handle; `out` must be writable.
 */
enum TsStatus ts_channel_c2(const struct TsChannel *c, double *out);

/**
 * Writes the entropic coherence of the channel in nats.
 *
 * # Safety
 * `c` must be a live channel handle; `out` must be writable.
 */
enum TsStatus ts_channel_entropic(const struct TsChannel *c, double *out);

/**
 * Quantum convolution of two `n x n` density matrices through a
 * three-subsystem channel. All arrays hold `n * n` doubles, row-major.
 *
 * # Safety
 * Every pointer must reference `n * n` doubles; outputs must be writable.
 */
enum TsStatus ts_channel_convolve(const struct TsChannel *c,
                                  size_t n,
                                  const double *rho_re,
                                  const double *rho_im,
                                  const double *sigma_re,
                                  const double *sigma_im,
                                  double *out_re,
                                  double *out_im);

/**
 * The two-qubit convolution gate `U(alpha, theta, phi)` as 16 + 16 doubles.
 *
 * # Safety
 * `out_re` and `out_im` must each hold 16 doubles.
 */
enum TsStatus ts_qubit_gate(double alpha, double theta, double phi, double *out_re, double *out_im);

/**
 * Entangling power and gate typicality of `U(alpha, theta, phi)`.
 *
 * # Safety
 * `e_p` and `g_t` must be writable.
 */
enum TsStatus ts_qubit_metrics(double alpha, double theta, double phi, double *e_p, double *g_t);

/**
 * Circuit for `U(alpha, theta, phi)` as OpenQASM 3 text; release with
 * [`ts_string_free`].
 *
 * # Safety
 * `out` must be writable.
 */
enum TsStatus ts_qubit_qasm(double alpha, double theta, double phi, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRISTOCH_H */
