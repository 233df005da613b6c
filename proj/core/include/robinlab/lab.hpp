#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "robinlab/assembly.hpp"
#include "robinlab/mesh.hpp"

namespace robinlab {

// Insertion-ordered JSON so that identical runs serialize byte-for-byte.
using OrderedJson = nlohmann::ordered_json;

// Census expectation attached to a config: exactly one nondegenerate maximum,
// at least a given number of maxima/saddles, or no census at all.
struct CensusPolicy {
  enum class Mode { Off, UniqueMax, Multimodal };
  Mode mode = Mode::UniqueMax;
  int min_max = 1;
  int min_saddle = 0;
};

// Flat key-value experiment description with [section] headers; see
// parse_text for the accepted keys.
struct ExperimentConfig {
  std::string domain = "disk(1)";
  std::string problem = "torsion";  // torsion | eigen | gelfand
  std::string g_name = "exp";       // exp | power (gelfand only)
  double power_p = 2.0;
  std::string lambda_policy = "fraction";  // fraction | value
  double lambda_value = 0.5;  // fraction of the bracketed extremal value, or a value
  std::vector<double> betas = {1.0};
  double h = 0.05;
  CensusPolicy census;
  bool check_stability = true;
  bool check_winding = true;  // folded into the census block of the record
  bool check_monotonicity = true;
  bool check_comparison = false;
  bool check_boundary_criterion = false;
  std::string output_directory;
  bool emit_contours = false;
  std::string raw_text;  // exact bytes the config was parsed from (hashed)

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_text(const std::string& text);
  void validate() const;  // throws ConfigError
};

struct RunOutcome {
  OrderedJson record;
  bool any_check_failed = false;
  bool any_cell_error = false;
  // 0 all checks pass, 1 a check failed, 2 a cell hit a solver/mesh error.
  int exit_status() const { return any_cell_error ? 2 : (any_check_failed ? 1 : 0); }
};

// Executes the configured solves cell-by-cell (one cell per beta), runs the
// requested checks, and assembles a deterministic record in config order.
// jobs > 1 distributes cells over a thread pool without changing the record.
// When the config names an output directory, writes record.json (and contour
// CSVs per cell when requested) into it.
RunOutcome run_experiment(const ExperimentConfig& config, int jobs = 1);

// Writes <prefix>_nodes.csv (node,x,y,u) and <prefix>_triangles.csv
// (triangle,i,j,k); values round-trip bit-exactly.
void emit_contour_data(const Mesh& mesh, const Field& u, const std::string& prefix);

struct FieldComparison {
  double sup_diff = 0.0;
  double l2_diff = 0.0;               // via the mass matrix
  double max_location_distance = 0.0;
};
FieldComparison compare_fields(const Field& a, const Field& b);

// Recursive comparison with |x-y| <= atol + rtol*max(|x|,|y|) on numbers;
// returns the paths that differ (capped). A top-level "tolerance" object in
// either record is skipped (it carries the bands, it is not a metric).
struct RecordComparison {
  bool match = true;
  std::vector<std::string> diffs;
};
RecordComparison compare_records(const OrderedJson& a, const OrderedJson& b,
                                 double rtol, double atol);

std::uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace robinlab
