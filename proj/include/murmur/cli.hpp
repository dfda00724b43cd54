#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "murmur/experiments.hpp"
#include "murmur/ingest.hpp"

namespace murmur::cli {

// One runnable experiment name.  class_variant and bqf_class only apply to
// their families; slope_sweep marks the slope-over-X postprocess.
struct CatalogEntry {
  const char* name;
  experiments::Family family;
  int class_variant;
  arith::DiscriminantClass bqf_class;
  bool needs_data;
  ingest::DataKind data_kind;
  bool slope_sweep;
  const char* summary;
};

const std::vector<CatalogEntry>& experiment_catalog();
const CatalogEntry* find_experiment(const std::string& name);

// CSV with header x,x_scaled,value,class; rows ordered by (class, x); floats
// rendered to 12 significant digits.
std::string render_csv(const std::vector<experiments::SeriesPoint>& points);

struct CsvRow {
  long long x = 0;
  double x_scaled = 0.0;
  double value = 0.0;
  std::string class_tag;
};

// Parses the emitted schema back; malformed rows are validation errors with
// line numbers.
std::vector<CsvRow> parse_series_csv(const std::string& text);

// Deterministic standalone SVG scatter: per-class colors in first-appearance
// order (blue, red, green, orange), with the four local-sign patterns pinned
// to blue ++, green --, red +-, orange -+.
std::string svg_scatter(const std::vector<CsvRow>& rows);

// Thrown when a strict-policy run would have to drop unresolved xi terms;
// mapped to exit code 4.
class xi_abort : public std::runtime_error {
 public:
  explicit xi_abort(const std::string& msg) : std::runtime_error(msg) {}
};

// Full command-line entry point (sieve / run / plot / ingest).  Returns the
// process exit code: 0 ok, 2 validation or domain failure, 3 resource
// exhaustion, 4 unresolved-xi abort.
int run_cli(int argc, char** argv);

}  // namespace murmur::cli
