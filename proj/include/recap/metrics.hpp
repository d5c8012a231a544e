#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recap/corruptions.hpp"

namespace recap {

// Per-model error table: clean error plus one entry per (kind, severity).
// Errors are stored as fractions in [0,1] and rendered as percent with one
// decimal. Partial tables are fine for raw reporting; mCE needs all 15 kinds.
struct ErrorTable {
  std::string model_name;
  std::optional<double> clean_error;
  std::map<std::pair<CorruptionKind, int>, double> errors;

  bool complete_for(CorruptionKind kind) const;
  bool complete() const;  // all 15 kinds x 5 severities plus clean
};

// Reference tables (the AlexNet role in the protocol) share the shape; they
// are always loaded from a file since the reference model is out of scope.
using ReferenceTable = ErrorTable;

// CE_c = sum_s E_{c,s} / sum_s E^ref_{c,s}. Throws DataError when either
// table is incomplete for the kind or the reference sum is zero.
double corruption_error(const ErrorTable& table, const ReferenceTable& reference,
                        CorruptionKind kind);

// RelCE_c = sum_s (E_{c,s} - E_clean) / sum_s (E^ref_{c,s} - E^ref_clean).
// May be negative. A zero reference denominator yields nullopt (flagged
// undefined; excluded from mCE with a warning).
std::optional<double> relative_ce(const ErrorTable& table, const ReferenceTable& reference,
                                  CorruptionKind kind);

struct MceResult {
  double value = 0.0;  // mean RelCE as a fraction of the reference (1.0 == 100%)
  std::vector<CorruptionKind> excluded;  // kinds with undefined RelCE
};

// Mean of per-kind RelCE over the 15 corruption types. Throws DataError when
// any kind is missing entirely; undefined kinds are excluded from the mean
// and reported.
MceResult relative_mce(const ErrorTable& table, const ReferenceTable& reference);

// Flat text format: one `kind,severity,error` record per line plus a
// `clean,,error` line; '#' starts a comment.
ErrorTable load_error_table(const std::filesystem::path& path);
void save_error_table(const ErrorTable& table, const std::filesystem::path& path);

// Renders a fraction as percent with one decimal, Table-3 style.
std::string format_percent(double fraction);

}  // namespace recap
