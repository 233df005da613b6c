// Command-line front end: config-driven experiment runs, mesh generation with
// text dumps, parallel sweeps, and tolerance-based record comparison.
//
// Exit codes: 0 = success / all checks pass, 1 = a check failed or records
// differ, 2 = configuration, meshing, solver, or I/O error.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/lab.hpp"
#include "robinlab/mesh.hpp"

namespace {

using namespace robinlab;

void write_record(const OrderedJson& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write record to " + path);
  out << record.dump(2) << '\n';
  if (!out) throw IoError("failed writing record to " + path);
}

int do_run(const std::string& config_path, int jobs, const std::string& out_path) {
  const ExperimentConfig cfg = ExperimentConfig::parse_file(config_path);
  const RunOutcome rc = run_experiment(cfg, jobs);
  if (!out_path.empty()) write_record(rc.record, out_path);

  for (const auto& cell : rc.record.at("cells")) {
    std::cout << "beta=" << cell.at("beta").get<double>();
    if (cell.contains("error")) {
      std::cout << "  ERROR: " << cell.at("error").get<std::string>() << '\n';
      continue;
    }
    if (cell.contains("checks"))
      for (const auto& [name, v] : cell.at("checks").items())
        std::cout << "  " << name << "=" << v.get<std::string>();
    std::cout << '\n';
  }
  const auto& checks = rc.record.at("checks");
  std::cout << "monotonicity=" << checks.at("monotonicity").get<std::string>()
            << "  overall=" << checks.at("overall").get<std::string>() << '\n';
  return rc.exit_status();
}

int do_mesh(const std::string& domain, double h, const std::string& dump_mesh,
            const std::string& dump_curve) {
  const DomainSpec spec = DomainSpec::parse(domain);
  const BoundaryCurve curve = make_domain(spec);
  const Mesh mesh = triangulate(curve, h);
  const GeometricMeasures gm = geometric_measures(curve);
  std::cout << "domain: " << spec.describe() << '\n'
            << "h: " << h << '\n'
            << "nodes: " << mesh.node_count() << '\n'
            << "triangles: " << mesh.triangle_count() << '\n'
            << "min angle (deg): " << mesh.min_angle_deg() << '\n'
            << "mesh area: " << mesh.total_area() << "  (curve: " << gm.area << ")\n"
            << "mesh perimeter: " << mesh.boundary_length()
            << "  (curve: " << gm.perimeter << ")\n";
  if (!dump_mesh.empty()) {
    mesh.write_text(dump_mesh);
    std::cout << "mesh written to " << dump_mesh << '\n';
  }
  if (!dump_curve.empty()) {
    curve.write_coefficients(dump_curve);
    std::cout << "curve coefficients written to " << dump_curve << '\n';
  }
  return 0;
}

int do_compare(const std::string& path_a, const std::string& path_b, double rtol,
               double atol, bool tol_given) {
  const auto load = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open record " + p);
    OrderedJson j;
    in >> j;
    return j;
  };
  const OrderedJson a = load(path_a);
  const OrderedJson b = load(path_b);
  // A golden record may carry its own tolerance band.
  if (!tol_given && b.is_object() && b.contains("tolerance")) {
    const auto& t = b.at("tolerance");
    rtol = t.value("rtol", rtol);
    atol = t.value("atol", atol);
  }
  const RecordComparison cmp = compare_records(a, b, rtol, atol);
  if (cmp.match) {
    std::cout << "records match (rtol=" << rtol << ", atol=" << atol << ")\n";
    return 0;
  }
  std::cout << "records differ (rtol=" << rtol << ", atol=" << atol << "):\n";
  for (const std::string& d : cmp.diffs) std::cout << "  " << d << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robinlab experiment runner"};
  app.require_subcommand(1);
  // `mesh --h` is part of the interface, so help must not claim "-h".
  app.set_help_flag("--help", "print help");

  std::string config_path, out_path;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "run a config and emit its record");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--jobs", jobs, "worker threads for grid cells");
  run->add_option("--out", out_path, "also write the record JSON here");

  std::string mesh_domain, dump_mesh, dump_curve;
  double mesh_h = 0.1;
  auto* mesh = app.add_subcommand("mesh", "triangulate a domain and report stats");
  mesh->set_help_flag("--help", "print help");
  mesh->add_option("domain", mesh_domain, "domain spec, e.g. disk(1) or ellipse(2,1)")
      ->required();
  mesh->add_option("--h", mesh_h, "target element size")->required();
  mesh->add_option("--dump-mesh", dump_mesh, "write the mesh as text");
  mesh->add_option("--dump-curve", dump_curve, "write boundary curve coefficients");

  std::string sweep_config, sweep_out;
  int sweep_jobs = static_cast<int>(std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "run a config across a worker pool");
  sweep->add_option("config", sweep_config, "experiment config file")->required();
  sweep->add_option("--jobs", sweep_jobs, "worker threads (default: hardware)");
  sweep->add_option("--out", sweep_out, "also write the record JSON here");

  std::string cmp_a, cmp_b;
  double rtol = 1e-6, atol = 1e-9;
  auto* cmp = app.add_subcommand("compare", "compare two run records");
  cmp->add_option("record1", cmp_a, "record JSON")->required();
  cmp->add_option("record2", cmp_b, "record JSON (may carry a tolerance block)")
      ->required();
  auto* rt = cmp->add_option("--rtol", rtol, "relative tolerance");
  auto* at = cmp->add_option("--atol", atol, "absolute tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Bad usage is an infrastructure error (exit 2); --help remains 0.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return do_run(config_path, jobs, out_path);
    if (mesh->parsed()) return do_mesh(mesh_domain, mesh_h, dump_mesh, dump_curve);
    if (sweep->parsed())
      return do_run(sweep_config, std::max(1, sweep_jobs), sweep_out);
    if (cmp->parsed())
      return do_compare(cmp_a, cmp_b, rtol, atol, rt->count() > 0 || at->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
