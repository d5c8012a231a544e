#include "recap/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "recap/errors.hpp"

namespace recap {
namespace {

double severity_sum(const ErrorTable& table, CorruptionKind kind) {
  double sum = 0.0;
  for (int severity = 1; severity <= kNumSeverities; ++severity)
    sum += table.errors.at({kind, severity});
  return sum;
}

void require_complete(const ErrorTable& table, CorruptionKind kind, const char* role) {
  if (!table.complete_for(kind))
    throw DataError(std::string(role) + " table incomplete for corruption '" +
                    std::string(corruption_name(kind)) + "'");
}

}  // namespace

bool ErrorTable::complete_for(CorruptionKind kind) const {
  for (int severity = 1; severity <= kNumSeverities; ++severity)
    if (!errors.contains({kind, severity})) return false;
  return true;
}

bool ErrorTable::complete() const {
  if (!clean_error.has_value()) return false;
  for (CorruptionKind kind : all_corruption_kinds())
    if (!complete_for(kind)) return false;
  return true;
}

double corruption_error(const ErrorTable& table, const ReferenceTable& reference,
                        CorruptionKind kind) {
  require_complete(table, kind, "model");
  require_complete(reference, kind, "reference");
  const double denominator = severity_sum(reference, kind);
  if (denominator == 0.0)
    throw DataError("reference severity sum is zero for corruption '" +
                    std::string(corruption_name(kind)) + "'");
  return severity_sum(table, kind) / denominator;
}

std::optional<double> relative_ce(const ErrorTable& table, const ReferenceTable& reference,
                                  CorruptionKind kind) {
  require_complete(table, kind, "model");
  require_complete(reference, kind, "reference");
  if (!table.clean_error.has_value()) throw DataError("model table is missing the clean error");
  if (!reference.clean_error.has_value())
    throw DataError("reference table is missing the clean error");

  const double denominator =
      severity_sum(reference, kind) - kNumSeverities * (*reference.clean_error);
  if (denominator == 0.0) return std::nullopt;
  const double numerator = severity_sum(table, kind) - kNumSeverities * (*table.clean_error);
  return numerator / denominator;
}

MceResult relative_mce(const ErrorTable& table, const ReferenceTable& reference) {
  MceResult result;
  double sum = 0.0;
  int counted = 0;
  for (CorruptionKind kind : all_corruption_kinds()) {
    const auto value = relative_ce(table, reference, kind);
    if (!value.has_value()) {
      result.excluded.push_back(kind);
      continue;
    }
    sum += *value;
    ++counted;
  }
  if (counted == 0) throw DataError("every corruption kind has an undefined RelCE");
  result.value = sum / counted;
  return result;
}

ErrorTable load_error_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open error table: " + path.string());
  ErrorTable table;
  table.model_name = path.stem().string();
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    std::istringstream fields(line);
    std::string kind_field, severity_field, error_field;
    if (!std::getline(fields, kind_field, ',') || !std::getline(fields, severity_field, ',') ||
        !std::getline(fields, error_field))
      throw DataError(path.string() + ":" + std::to_string(line_number) +
                      ": expected kind,severity,error");
    const double error = std::stod(error_field);
    if (!(error >= 0.0 && error <= 1.0))
      throw DataError(path.string() + ":" + std::to_string(line_number) +
                      ": error must be in [0,1]");
    if (kind_field == "clean") {
      table.clean_error = error;
    } else {
      const CorruptionKind kind = parse_corruption(kind_field);
      const int severity = std::stoi(severity_field);
      if (severity < 1 || severity > kNumSeverities)
        throw DataError(path.string() + ":" + std::to_string(line_number) + ": bad severity");
      table.errors[{kind, severity}] = error;
    }
  }
  return table;
}

void save_error_table(const ErrorTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write error table: " + path.string());
  out << "# kind,severity,error\n";
  if (table.clean_error.has_value()) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.9g", *table.clean_error);
    out << "clean,," << buffer << "\n";
  }
  for (const auto& [key, error] : table.errors) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.9g", error);
    out << corruption_name(key.first) << "," << key.second << "," << buffer << "\n";
  }
  if (!out) throw DataError("failed writing error table: " + path.string());
}

std::string format_percent(double fraction) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f%%", fraction * 100.0);
  return buffer;
}

}  // namespace recap
