#include "robinlab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "robinlab/critpoints.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/solvers.hpp"
#include "robinlab/stability.hpp"

namespace robinlab {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_on_off(const std::string& v, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "' expects on/off, got '" + v + "'");
}

double parse_number(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string beta_tag(double beta) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", beta);
  std::string s = buf;
  for (char& c : s)
    if (c == '.' || c == '+' || c == '-') c = '_';
  return s;
}

struct CellResult {
  OrderedJson json;
  bool check_failed = false;
  bool cell_error = false;
  double seconds = 0.0;
  Field u;
  bool has_field = false;
  double eigenvalue = std::numeric_limits<double>::quiet_NaN();
  double lam_lo = std::numeric_limits<double>::quiet_NaN();
  double lam_hi = std::numeric_limits<double>::quiet_NaN();
};

const char* verdict(bool pass) { return pass ? "pass" : "fail"; }

OrderedJson census_to_json(const CritCensus& c) {
  OrderedJson j;
  OrderedJson pts = OrderedJson::array();
  for (const CriticalPoint& p : c.points) {
    OrderedJson pj;
    pj["x"] = p.position.x;
    pj["y"] = p.position.y;
    pj["value"] = p.value;
    pj["grad_residual"] = p.grad_residual;
    pj["kind"] = CriticalPoint::kind_name(p.kind);
    pj["index"] = p.index;
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  j["signature"] = c.signature();
  j["index_sum"] = c.index_sum;
  j["boundary_winding"] = c.boundary_winding;
  j["winding_residue"] = c.winding_residue;
  j["hopf_ok"] = c.hopf_ok;
  j["any_degenerate"] = c.any_degenerate;
  return j;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.raw_text = text;
  cfg.betas.clear();
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "domain" && section != "problem" && section != "grid" &&
          section != "checks" && section != "output")
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unknown section [" + section + "]");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key before any [section]");

    if (section == "domain") {
      if (key == "spec") cfg.domain = val;
      else throw ConfigError("unknown key '" + key + "' in [domain]");
    } else if (section == "problem") {
      if (key == "kind") cfg.problem = val;
      else if (key == "g") cfg.g_name = val;
      else if (key == "p") cfg.power_p = parse_number(val, key);
      else if (key == "lambda_policy") cfg.lambda_policy = val;
      else if (key == "lambda") cfg.lambda_value = parse_number(val, key);
      else throw ConfigError("unknown key '" + key + "' in [problem]");
    } else if (section == "grid") {
      if (key == "beta") {
        std::istringstream bs(val);
        std::string tok;
        const size_t before = cfg.betas.size();
        while (bs >> tok) cfg.betas.push_back(parse_number(tok, key));
        if (cfg.betas.size() == before)
          throw ConfigError("'beta' was given without any values");
      } else if (key == "h") {
        cfg.h = parse_number(val, key);
      } else {
        throw ConfigError("unknown key '" + key + "' in [grid]");
      }
    } else if (section == "checks") {
      if (key == "census") {
        if (val == "off") cfg.census.mode = CensusPolicy::Mode::Off;
        else if (val == "unique_max") cfg.census.mode = CensusPolicy::Mode::UniqueMax;
        else if (val.rfind("multimodal:", 0) == 0) {
          cfg.census.mode = CensusPolicy::Mode::Multimodal;
          const int n = static_cast<int>(parse_number(val.substr(11), key));
          if (n < 2) throw ConfigError("multimodal census expects at least 2 maxima");
          cfg.census.min_max = n;
          cfg.census.min_saddle = n - 1;
        } else {
          throw ConfigError("census expects off | unique_max | multimodal:N");
        }
      } else if (key == "stability") cfg.check_stability = parse_on_off(val, key);
      else if (key == "winding") cfg.check_winding = parse_on_off(val, key);
      else if (key == "monotonicity") cfg.check_monotonicity = parse_on_off(val, key);
      else if (key == "comparison") cfg.check_comparison = parse_on_off(val, key);
      else if (key == "boundary_criterion")
        cfg.check_boundary_criterion = parse_on_off(val, key);
      else throw ConfigError("unknown key '" + key + "' in [checks]");
    } else if (section == "output") {
      if (key == "directory") cfg.output_directory = val;
      else if (key == "contours") cfg.emit_contours = parse_on_off(val, key);
      else throw ConfigError("unknown key '" + key + "' in [output]");
    }
  }
  if (cfg.betas.empty()) cfg.betas = {1.0};
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

void ExperimentConfig::validate() const {
  DomainSpec::parse(domain);  // throws on malformed domain strings
  if (problem != "torsion" && problem != "eigen" && problem != "gelfand")
    throw ConfigError("problem kind must be torsion | eigen | gelfand");
  if (problem == "gelfand") {
    if (g_name != "exp" && g_name != "power")
      throw ConfigError("gelfand g must be exp | power");
    if (g_name == "power" && !(power_p > 0.0))
      throw ConfigError("power nonlinearity needs p > 0");
    if (lambda_policy != "fraction" && lambda_policy != "value")
      throw ConfigError("lambda_policy must be fraction | value");
    if (!(lambda_value > 0.0)) throw ConfigError("lambda must be positive");
  }
  if (betas.empty()) throw ConfigError("beta grid is empty");
  for (size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw ConfigError("beta grid must be positive");
    if (i > 0 && !(betas[i] > betas[i - 1]))
      throw ConfigError("beta grid must be strictly increasing");
  }
  if (!(h > 0.0)) throw ConfigError("mesh size h must be positive");
}

void emit_contour_data(const Mesh& mesh, const Field& u, const std::string& prefix) {
  if (u.mesh != &mesh) throw SolveError("field does not belong to this mesh");
  u.ensure_valid();
  {
    std::ofstream out(prefix + "_nodes.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + prefix + "_nodes.csv");
    out << "node,x,y,u\n";
    for (int i = 0; i < mesh.node_count(); ++i)
      out << i << ',' << format_double(mesh.nodes[i].x) << ','
          << format_double(mesh.nodes[i].y) << ',' << format_double(u[i]) << '\n';
    if (!out) throw IoError("failed writing " + prefix + "_nodes.csv");
  }
  {
    std::ofstream out(prefix + "_triangles.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + prefix + "_triangles.csv");
    out << "triangle,i,j,k\n";
    for (int t = 0; t < mesh.triangle_count(); ++t)
      out << t << ',' << mesh.triangles[t][0] << ',' << mesh.triangles[t][1] << ','
          << mesh.triangles[t][2] << '\n';
    if (!out) throw IoError("failed writing " + prefix + "_triangles.csv");
  }
}

FieldComparison compare_fields(const Field& a, const Field& b) {
  if (!a.mesh || !b.mesh) throw SolveError("comparing an empty field");
  a.ensure_valid();
  b.ensure_valid();
  if (a.mesh != b.mesh) {
    const Mesh& ma = *a.mesh;
    const Mesh& mb = *b.mesh;
    if (ma.node_count() != mb.node_count())
      throw SolveError("fields live on different meshes");
    for (int i = 0; i < ma.node_count(); ++i)
      if (ma.nodes[i].x != mb.nodes[i].x || ma.nodes[i].y != mb.nodes[i].y)
        throw SolveError("fields live on different meshes");
  }
  FieldComparison out;
  Vector d(a.values.size());
  for (size_t i = 0; i < d.size(); ++i) {
    d[i] = a.values[i] - b.values[i];
    out.sup_diff = std::max(out.sup_diff, std::abs(d[i]));
  }
  const SparseMatrix M = interior_mass(*a.mesh);
  out.l2_diff = std::sqrt(std::max(0.0, dot(d, M.multiply(d))));
  out.max_location_distance = (a.argmax_location() - b.argmax_location()).norm();
  return out;
}

namespace {

void compare_rec(const OrderedJson& a, const OrderedJson& b, double rtol, double atol,
                 const std::string& path, int depth, RecordComparison& out) {
  if (out.diffs.size() >= 64) return;
  const auto mismatch = [&](const std::string& why) {
    out.match = false;
    out.diffs.push_back(path.empty() ? why : path + ": " + why);
  };
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (!(std::abs(x - y) <= atol + rtol * std::max(std::abs(x), std::abs(y))))
      mismatch("numbers differ (" + format_double(x) + " vs " + format_double(y) + ")");
    return;
  }
  if (a.type() != b.type()) {
    mismatch("type mismatch");
    return;
  }
  if (a.is_object()) {
    for (const auto& [key, val] : a.items()) {
      if (depth == 0 && key == "tolerance") continue;
      if (!b.contains(key)) mismatch("missing key '" + key + "' in second record");
      else compare_rec(val, b.at(key), rtol, atol, path + "/" + key, depth + 1, out);
    }
    for (const auto& [key, val] : b.items()) {
      if (depth == 0 && key == "tolerance") continue;
      if (!a.contains(key)) mismatch("missing key '" + key + "' in first record");
    }
    return;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) {
      mismatch("array sizes differ");
      return;
    }
    for (size_t i = 0; i < a.size(); ++i)
      compare_rec(a[i], b[i], rtol, atol, path + "/" + std::to_string(i), depth + 1,
                  out);
    return;
  }
  if (a != b) mismatch("values differ");
}

}  // namespace

RecordComparison compare_records(const OrderedJson& a, const OrderedJson& b,
                                 double rtol, double atol) {
  RecordComparison out;
  compare_rec(a, b, rtol, atol, "", 0, out);
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& config, int jobs) {
  config.validate();
  const BoundaryCurve curve = make_domain(DomainSpec::parse(config.domain));
  const Mesh mesh = triangulate(curve, config.h);

  const bool is_gelfand = config.problem == "gelfand";
  const bool is_eigen = config.problem == "eigen";
  const Nonlinearity g_base =
      !is_gelfand ? Nonlinearity::torsion()
                  : (config.g_name == "exp" ? Nonlinearity::gelfand_exp(1.0)
                                            : Nonlinearity::power(config.power_p, 1.0));

  const size_t ncell = config.betas.size();
  std::vector<CellResult> cells(ncell);

  const auto run_cell = [&](size_t ci) {
    CellResult& res = cells[ci];
    const double beta = config.betas[ci];
    const auto t0 = std::chrono::steady_clock::now();
    OrderedJson& cell = res.json;
    cell["beta"] = beta;
    try {
      Field u;
      double lambda_run = 0.0;
      Branch branch;
      if (config.problem == "torsion") {
        u = solve_torsion(mesh, beta);
      } else if (is_eigen) {
        const EigenResult er = robin_eigenpair(mesh, beta);
        u = er.field;
        res.eigenvalue = er.lambda_beta;
        cell["lambda_beta"] = er.lambda_beta;
        cell["eigen_residual"] = er.residual;
      } else {
        StepPolicy pol;
        pol.with_mu1 = config.check_stability;
        branch = continue_branch(mesh, beta, g_base, pol);
        res.lam_lo = branch.lambda_star_lo;
        res.lam_hi = branch.lambda_star_hi;
        lambda_run = config.lambda_policy == "fraction"
                         ? config.lambda_value * 0.5 *
                               (branch.lambda_star_lo + branch.lambda_star_hi)
                         : config.lambda_value;
        const PicardResult pr = picard_minimal(mesh, beta, lambda_run, g_base);
        if (!pr.converged)
          throw SolveError("no converged minimal solution at the requested lambda");
        u = pr.field;
        cell["lambda"] = lambda_run;
        cell["lambda_star"] = {branch.lambda_star_lo, branch.lambda_star_hi};
        cell["branch_points"] = static_cast<int>(branch.points.size());
        cell["picard_iters"] = pr.iterations;
      }
      res.u = u;
      res.has_field = true;
      cell["sup_norm"] = u.sup_norm();
      const Vec2 mx = u.argmax_location();
      cell["max_location"] = {mx.x, mx.y};

      OrderedJson checks;

      double mu1 = std::numeric_limits<double>::quiet_NaN();
      if (config.check_stability) {
        const double scale =
            is_eigen ? res.eigenvalue : robin_eigenpair(mesh, beta).lambda_beta;
        if (config.problem == "torsion") {
          mu1 = linearized_mu1(mesh, beta, u, Nonlinearity::torsion()).first;
        } else if (is_eigen) {
          Field w(mesh, res.eigenvalue);
          mu1 = linearized_mu1_weighted(mesh, beta, w).first;
        } else {
          mu1 = linearized_mu1(mesh, beta, u, g_base.with_scale(lambda_run)).first;
        }
        cell["mu1"] = mu1;
        cell["lambda_beta_scale"] = scale;
        bool ok = mu1 >= -1e-8 * scale;
        if (is_gelfand) {
          for (const BranchPoint& bp : branch.points)
            if (!bp.stable) ok = false;
          for (size_t k = 1; k < branch.points.size(); ++k)
            if (branch.points[k].mu1 > branch.points[k - 1].mu1 + 1e-6 * scale)
              ok = false;
        }
        checks["stability"] = verdict(ok);
        if (!ok) res.check_failed = true;
      } else {
        checks["stability"] = "n/a";
      }

      if (config.census.mode != CensusPolicy::Mode::Off) {
        const CritCensus c = census(mesh, u, beta);
        cell["census"] = census_to_json(c);
        bool ok = !c.any_degenerate && c.index_sum == 1 && c.hopf_ok;
        if (config.check_winding && c.boundary_winding != 1) ok = false;
        if (config.census.mode == CensusPolicy::Mode::UniqueMax) {
          if (c.points.size() != 1 ||
              c.points[0].kind != CriticalPoint::Kind::Max)
            ok = false;
        } else {
          if (c.count(CriticalPoint::Kind::Max) < config.census.min_max ||
              c.count(CriticalPoint::Kind::Saddle) < config.census.min_saddle)
            ok = false;
        }
        checks["census"] = verdict(ok);
        if (!ok) res.check_failed = true;
      } else if (config.check_winding) {
        double residue = 0.0;
        const int w = boundary_winding(mesh, u, &residue);
        cell["boundary_winding"] = w;
        cell["winding_residue"] = residue;
        const bool ok = w == 1;
        checks["winding"] = verdict(ok);
        if (!ok) res.check_failed = true;
      }

      if (config.check_comparison && !is_eigen) {
        const ComparisonReport rep = comparison_bound(
            mesh, beta, g_base, config.problem == "torsion" ? 1.0 : lambda_run);
        OrderedJson cj;
        cj["holds"] = rep.holds;
        cj["max_violation"] = rep.max_violation;
        cj["bound_constant"] = rep.bound_constant;
        cell["comparison"] = std::move(cj);
        checks["comparison"] = verdict(rep.holds);
        if (!rep.holds) res.check_failed = true;
      } else if (config.check_comparison) {
        checks["comparison"] = "n/a";
      }

      if (config.check_boundary_criterion && !is_eigen) {
        const Nonlinearity g_for_boundary =
            config.problem == "torsion" ? Nonlinearity::torsion()
                                        : g_base.with_scale(lambda_run);
        const StabilityReport rep =
            boundary_instability_check(mesh, curve, beta, u, g_for_boundary);
        OrderedJson bj;
        bj["boundary_integral"] = rep.boundary_integral;
        bj["min_curvature"] = rep.min_curvature;
        bj["curvature_condition"] = rep.curvature_condition;
        bj["unstable"] = rep.unstable;
        cell["boundary_criterion"] = std::move(bj);
        // Consistency audit: a positive instability verdict must agree with a
        // negative linearized eigenvalue whenever the latter was computed.
        bool ok = true;
        if (rep.unstable && std::isfinite(mu1) && mu1 >= 0.0) ok = false;
        checks["boundary_criterion"] = verdict(ok);
        if (!ok) res.check_failed = true;
      } else if (config.check_boundary_criterion) {
        checks["boundary_criterion"] = "n/a";
      }

      cell["checks"] = std::move(checks);
    } catch (const std::exception& e) {
      cell["error"] = e.what();
      res.cell_error = true;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
  };

  const int nworkers = std::max(1, std::min<int>(jobs, static_cast<int>(ncell)));
  if (nworkers == 1) {
    for (size_t i = 0; i < ncell; ++i) run_cell(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (int w = 0; w < nworkers; ++w)
      pool.emplace_back([&] {
        while (true) {
          const size_t i = next.fetch_add(1);
          if (i >= ncell) break;
          run_cell(i);
        }
      });
    for (std::thread& t : pool) t.join();
  }

  RunOutcome out;
  OrderedJson& rec = out.record;
  {
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(config.raw_text)));
    rec["config_hash"] = std::string(hex);
  }
  rec["domain"] = config.domain;
  rec["problem"] = config.problem;
  if (is_gelfand) {
    rec["g"] = config.g_name;
    if (config.g_name == "power") rec["p"] = config.power_p;
    rec["lambda_policy"] = config.lambda_policy;
    rec["lambda_value"] = config.lambda_value;
  }
  rec["h"] = config.h;
  {
    OrderedJson mj;
    mj["nodes"] = mesh.node_count();
    mj["triangles"] = mesh.triangle_count();
    mj["min_angle_deg"] = mesh.min_angle_deg();
    mj["area"] = mesh.total_area();
    mj["perimeter"] = mesh.boundary_length();
    rec["mesh"] = std::move(mj);
  }
  OrderedJson cell_arr = OrderedJson::array();
  for (CellResult& c : cells) {
    out.any_check_failed = out.any_check_failed || c.check_failed;
    out.any_cell_error = out.any_cell_error || c.cell_error;
    cell_arr.push_back(c.json);
  }
  rec["cells"] = std::move(cell_arr);

  OrderedJson top_checks;
  if (config.check_monotonicity && ncell >= 2) {
    bool applicable = true;
    bool ok = true;
    if (config.problem == "torsion" ||
        (is_gelfand && config.lambda_policy == "value")) {
      for (size_t k = 0; k + 1 < ncell; ++k) {
        if (!cells[k].has_field || !cells[k + 1].has_field) {
          applicable = false;
          break;
        }
        for (int i = 0; i < mesh.node_count(); ++i)
          if (cells[k + 1].u[i] > cells[k].u[i] + 1e-8) {
            ok = false;
            break;
          }
      }
    } else if (is_eigen) {
      for (size_t k = 0; k + 1 < ncell; ++k) {
        if (!std::isfinite(cells[k].eigenvalue) ||
            !std::isfinite(cells[k + 1].eigenvalue)) {
          applicable = false;
          break;
        }
        if (!(cells[k + 1].eigenvalue > cells[k].eigenvalue)) ok = false;
      }
    } else {
      // Gelfand under the fraction policy: the extremal value grows with beta;
      // brackets of consecutive betas must not be strictly decreasing.
      for (size_t k = 0; k + 1 < ncell; ++k) {
        if (!std::isfinite(cells[k].lam_lo) || !std::isfinite(cells[k + 1].lam_hi)) {
          applicable = false;
          break;
        }
        if (cells[k + 1].lam_hi < cells[k].lam_lo) ok = false;
      }
    }
    if (!applicable) {
      top_checks["monotonicity"] = "n/a";
    } else {
      top_checks["monotonicity"] = verdict(ok);
      if (!ok) out.any_check_failed = true;
    }
  } else {
    top_checks["monotonicity"] = "n/a";
  }
  top_checks["overall"] =
      (!out.any_check_failed && !out.any_cell_error) ? "pass" : "fail";
  rec["checks"] = std::move(top_checks);

  // Progress/timing is logged to stderr so stdout stays parseable; timings
  // never enter the record (they would break rerun determinism).
  for (size_t i = 0; i < ncell; ++i)
    std::cerr << "cell beta=" << config.betas[i] << " finished in "
              << cells[i].seconds << " s\n";

  if (!config.output_directory.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.output_directory, ec);
    if (ec) throw IoError("cannot create output directory: " + config.output_directory);
    const std::string rec_path = config.output_directory + "/record.json";
    std::ofstream outf(rec_path, std::ios::binary);
    if (!outf) throw IoError("cannot write " + rec_path);
    outf << rec.dump(2) << '\n';
    if (!outf) throw IoError("failed writing " + rec_path);
    if (config.emit_contours) {
      for (size_t i = 0; i < ncell; ++i) {
        if (!cells[i].has_field) continue;
        emit_contour_data(mesh, cells[i].u,
                          config.output_directory + "/cell_" +
                              beta_tag(config.betas[i]));
      }
    }
  }
  return out;
}

}  // namespace robinlab
