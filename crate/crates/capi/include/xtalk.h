#ifndef XTALK_H
#define XTALK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  XTALK_STATUS_OK = 0,
  /**
   * Null pointer, invalid UTF-8, or an argument outside its domain.
   */
  XTALK_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Netlist text failed to parse or validate.
   */
  XTALK_STATUS_PARSE_ERROR = 2,
  /**
   * Singular capacitance matrix (floating subcircuit).
   */
  XTALK_STATUS_SINGULAR_MATRIX = 3,
  /**
   * The requested target coordinate carries zero drive weight.
   */
  XTALK_STATUS_ZERO_TARGET_WEIGHT = 4,
  /**
   * A coordinate label does not exist in the reduced system.
   */
  XTALK_STATUS_UNKNOWN_COORDINATE = 5,
  /**
   * Unexpected internal failure.
   */
  XTALK_STATUS_INTERNAL = 6,
} XtalkStatus;

/**
 * Opaque analysis: the full pipeline output for one netlist.
 */
typedef struct XtalkAnalysis XtalkAnalysis;

/**
 * Opaque parsed netlist.
 */
typedef struct XtalkNetlist XtalkNetlist;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *xtalk_version(void);

/**
 * Message for the most recent failure on this thread; valid until the next
 * failing call on the same thread. Do not free.
 */
const char *xtalk_last_error(void);

/**
 * Parse a netlist document. On success stores a handle in `out`.
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid
 * location to store the handle.
 */
XtalkStatus xtalk_netlist_parse(const char *text, XtalkNetlist **out);

/**
 * Render a netlist back to its document form.
 * # Safety
 * `handle` must come from `xtalk_netlist_parse` and not be freed.
 */
XtalkStatus xtalk_netlist_render(const XtalkNetlist *handle, char **out);

/**
 * # Safety
 * `handle` must come from `xtalk_netlist_parse`; passing it again after
 * this call is undefined.
 */
void xtalk_netlist_free(XtalkNetlist *handle);

/**
 * Run the full pipeline on a parsed netlist.
 * # Safety
 * `netlist` must be a live handle from `xtalk_netlist_parse` and `out` a
 * valid location to store the handle.
 */
XtalkStatus xtalk_analysis_new(const XtalkNetlist *netlist, XtalkAnalysis **out);

/**
 * # Safety
 * `handle` must come from `xtalk_analysis_new`; passing it again after
 * this call is undefined.
 */
void xtalk_analysis_free(XtalkAnalysis *handle);

/**
 * Full analysis report as a JSON document. `target` selects the ratio
 * denominator; pass NULL for the default (the first qubit mode).
 * # Safety
 * `handle` must be a live analysis handle; `target`, when non-NULL, must
 * be NUL-terminated; `out` must be a valid location.
 */
XtalkStatus xtalk_analysis_report_json(const XtalkAnalysis *handle, const char *target, char **out);

/**
 * Exact crosstalk ratio as a `p/q` string.
 * # Safety
 * `handle` must be a live analysis handle; the label strings must be
 * NUL-terminated; `out` must be a valid location.
 */
XtalkStatus xtalk_analysis_ratio(const XtalkAnalysis *handle,
                                 const char *drive,
                                 const char *target,
                                 const char *victim,
                                 char **out);

/**
 * Crosstalk strength in dB; an exact zero ratio yields -INFINITY.
 * # Safety
 * `handle` must be a live analysis handle; the label strings must be
 * NUL-terminated; `out` must be a valid location.
 */
XtalkStatus xtalk_analysis_ratio_db(const XtalkAnalysis *handle,
                                    const char *drive,
                                    const char *target,
                                    const char *victim,
                                    double *out);

/**
 * Free a string returned by this library.
 * # Safety
 * `s` must be a string returned by this library, freed at most once.
 */
void xtalk_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* XTALK_H */
