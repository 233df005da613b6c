#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "robinlab/lab.hpp"
#include "robinlab/solvers.hpp"

using namespace robinlab;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "# exercise every section\n"
    "[domain]\n"
    "spec = disk(1)\n"
    "[problem]\n"
    "kind = torsion\n"
    "[grid]\n"
    "beta = 0.5 1\n"
    "h = 0.12\n"
    "[checks]\n"
    "census = unique_max\n"
    "stability = on\n"
    "winding = on\n"
    "monotonicity = on\n"
    "comparison = on\n"
    "boundary_criterion = on\n";

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "robinlab_labcli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path.string();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LAB_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("labcli") {

TEST_CASE("config parsing and defaults") {
  const ExperimentConfig cfg = ExperimentConfig::parse_text(kSmallConfig);
  CHECK(cfg.domain == "disk(1)");
  CHECK(cfg.problem == "torsion");
  CHECK(cfg.betas.size() == 2);
  CHECK(cfg.betas[0] == 0.5);
  CHECK(cfg.h == 0.12);
  CHECK(cfg.census.mode == CensusPolicy::Mode::UniqueMax);
  CHECK(cfg.check_comparison);
  CHECK_NOTHROW(cfg.validate());

  const ExperimentConfig bare = ExperimentConfig::parse_text("[domain]\nspec=disk(1)\n");
  CHECK(bare.betas.size() == 1);  // default grid

  const ExperimentConfig multi = ExperimentConfig::parse_text(
      "[domain]\nspec = corrugated_strip(6,0.08,3)\n[checks]\ncensus = multimodal:3\n");
  CHECK(multi.census.mode == CensusPolicy::Mode::Multimodal);
  CHECK(multi.census.min_max == 3);
  CHECK(multi.census.min_saddle == 2);

  const ExperimentConfig gel = ExperimentConfig::parse_text(
      "[problem]\nkind = gelfand\ng = power\np = 3\nlambda_policy = value\nlambda = "
      "0.25\n");
  CHECK(gel.problem == "gelfand");
  CHECK(gel.g_name == "power");
  CHECK(gel.power_p == 3.0);
  CHECK(gel.lambda_policy == "value");
  CHECK(gel.lambda_value == 0.25);
}

TEST_CASE("config rejection") {
  CHECK_THROWS_AS(ExperimentConfig::parse_text("[domain]\nradius = 1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("[nosuch]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("[grid]\nh = zero\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("loose line\n"), ConfigError);

  ExperimentConfig cfg = ExperimentConfig::parse_text(kSmallConfig);
  cfg.betas.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.betas = {2.0, 1.0};  // not increasing
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.betas = {1.0};
  cfg.h = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.h = 0.1;
  cfg.domain = "hexagon(1)";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  // Empty beta line: grid present but vacuous.
  CHECK_THROWS_AS(
      ExperimentConfig::parse_text("[grid]\nbeta = \n").validate(), ConfigError);
}

TEST_CASE("bundled configs stay valid") {
  const fs::path dir = TEST_CONFIG_DIR;
  const ExperimentConfig disk = ExperimentConfig::parse_file((dir / "disk_torsion.cfg").string());
  CHECK_NOTHROW(disk.validate());
  CHECK(disk.problem == "torsion");
  CHECK(disk.betas.size() == 3);

  const ExperimentConfig cor =
      ExperimentConfig::parse_file((dir / "corrugated_k3.cfg").string());
  CHECK_NOTHROW(cor.validate());
  CHECK(cor.census.mode == CensusPolicy::Mode::Multimodal);
  CHECK(cor.census.min_max == 3);
  CHECK(cor.betas == std::vector<double>{100.0});
}

TEST_CASE("byte hashing") {
  CHECK(fnv1a_hash("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a_hash("abc") == 0xe71fa2190541574bULL);
  CHECK(fnv1a_hash("abc") != fnv1a_hash("abd"));
}

TEST_CASE("field comparison metrics") {
  const Mesh mesh = triangulate(make_domain(DomainSpec::disk(1.0)), 0.05);
  const Field u10 = solve_torsion(mesh, 10.0);

  const FieldComparison self = compare_fields(u10, u10);
  CHECK(self.sup_diff == 0.0);
  CHECK(self.l2_diff == 0.0);
  CHECK(self.max_location_distance == 0.0);

  // u_beta - u_D = 1/(2 beta) on the disk, a constant shift.
  const Field ud = solve_torsion_dirichlet(mesh);
  const FieldComparison shift = compare_fields(u10, ud);
  CHECK(shift.sup_diff == doctest::Approx(0.05).epsilon(0.1));
  CHECK(shift.l2_diff == doctest::Approx(0.05 * std::sqrt(mesh.total_area())).epsilon(0.1));
  CHECK(shift.max_location_distance <= 2.0 * mesh.h);

  const Mesh other = triangulate(make_domain(DomainSpec::disk(1.0)), 0.1);
  const Field v(other, 1.0);
  CHECK_THROWS_AS((void)compare_fields(u10, v), SolveError);
}

TEST_CASE("record comparison with tolerance bands") {
  OrderedJson a;
  a["x"] = 1.0;
  a["nested"]["y"] = {1.0, 2.0, 3.0};
  a["name"] = "run";
  OrderedJson b = a;

  CHECK(compare_records(a, b, 1e-9, 1e-12).match);

  b["nested"]["y"][1] = 2.0 + 1e-7;
  const RecordComparison close = compare_records(a, b, 1e-6, 1e-9);
  CHECK(close.match);
  const RecordComparison tight = compare_records(a, b, 1e-9, 1e-12);
  CHECK(!tight.match);
  REQUIRE(!tight.diffs.empty());
  CHECK(tight.diffs[0].find("nested") != std::string::npos);

  b = a;
  b["name"] = "other";
  CHECK(!compare_records(a, b, 1e-6, 1e-9).match);

  // The tolerance block itself is not a metric.
  b = a;
  b["tolerance"] = {{"rtol", 1e-3}, {"atol", 1e-9}};
  CHECK(compare_records(a, b, 1e-9, 1e-12).match);

  // Structural mismatch.
  b = a;
  b["extra"] = 1;
  CHECK(!compare_records(a, b, 1e-6, 1e-9).match);
}

TEST_CASE("contour data round-trips") {
  const Mesh mesh = triangulate(make_domain(DomainSpec::disk(1.0)), 0.15);
  const Field u = solve_torsion(mesh, 1.0);
  const fs::path prefix = temp_dir() / "contour";
  emit_contour_data(mesh, u, prefix.string());

  std::ifstream nodes(prefix.string() + "_nodes.csv");
  REQUIRE(nodes.good());
  std::string line;
  std::getline(nodes, line);
  CHECK(line == "node,x,y,u");
  int rows = 0;
  while (std::getline(nodes, line)) {
    const size_t last = line.rfind(',');
    const double value = std::strtod(line.c_str() + last + 1, nullptr);
    CHECK(value == u[rows]);  // bit-exact round-trip
    ++rows;
  }
  CHECK(rows == mesh.node_count());

  std::ifstream tris(prefix.string() + "_triangles.csv");
  REQUIRE(tris.good());
  std::getline(tris, line);
  int trows = 0;
  while (std::getline(tris, line)) ++trows;
  CHECK(trows == mesh.triangle_count());

  CHECK_THROWS_AS(emit_contour_data(mesh, u, "/nonexistent_dir_zz/x"), IoError);
}

TEST_CASE("experiment run: checks, determinism, parallel equivalence") {
  const ExperimentConfig cfg = ExperimentConfig::parse_text(kSmallConfig);
  const RunOutcome first = run_experiment(cfg);
  CHECK(first.exit_status() == 0);
  CHECK(!first.any_check_failed);
  CHECK(!first.any_cell_error);

  const OrderedJson& rec = first.record;
  CHECK(rec.at("cells").size() == 2);
  CHECK(rec.at("checks").at("overall") == "pass");
  CHECK(rec.at("config_hash").get<std::string>().size() == 16);
  for (const auto& cell : rec.at("cells")) {
    CHECK(cell.at("checks").at("census") == "pass");
    CHECK(cell.at("checks").at("stability") == "pass");
    CHECK(cell.at("census").at("signature") == "max:1");
  }

  // Rerun and parallel run produce byte-identical records.
  CHECK(run_experiment(cfg).record.dump(2) == rec.dump(2));
  CHECK(run_experiment(cfg, 2).record.dump(2) == rec.dump(2));
}

TEST_CASE("experiment run: failed check versus cell error") {
  ExperimentConfig impossible = ExperimentConfig::parse_text(
      "[domain]\nspec = disk(1)\n[grid]\nbeta = 1\nh = 0.12\n"
      "[checks]\ncensus = multimodal:5\nstability = off\nmonotonicity = off\n");
  const RunOutcome failed = run_experiment(impossible);
  CHECK(failed.exit_status() == 1);
  CHECK(failed.any_check_failed);
  CHECK(!failed.any_cell_error);
  CHECK(failed.record.at("cells").at(0).at("checks").at("census") == "fail");

  ExperimentConfig hopeless = ExperimentConfig::parse_text(
      "[domain]\nspec = disk(1)\n[problem]\nkind = gelfand\ng = exp\n"
      "lambda_policy = value\nlambda = 50\n[grid]\nbeta = 1\nh = 0.12\n"
      "[checks]\ncensus = off\nstability = off\nmonotonicity = off\n");
  const RunOutcome error = run_experiment(hopeless);
  CHECK(error.exit_status() == 2);
  CHECK(error.any_cell_error);
  CHECK(error.record.at("cells").at(0).contains("error"));
}

TEST_CASE("cli: mesh dumps") {
  const fs::path dir = temp_dir();
  const fs::path meshfile = dir / "mesh.txt";
  const fs::path curvefile = dir / "curve.txt";
  CHECK(run_cli("mesh \"disk(1)\" --h 0.2 --dump-mesh " + meshfile.string() +
                " --dump-curve " + curvefile.string()) == 0);

  const Mesh mesh = Mesh::read_text(meshfile.string());
  CHECK_NOTHROW(mesh.validate());
  CHECK(mesh.node_count() >= 70);
  CHECK(mesh.node_count() <= 130);
  CHECK_NOTHROW(BoundaryCurve::read_coefficients(curvefile.string()));

  CHECK(run_cli("mesh \"disk(1)\"") == 2);  // --h is required
  CHECK(run_cli("mesh \"heptagon(1)\" --h 0.2") == 2);
}

TEST_CASE("cli: run, sweep, compare") {
  const fs::path dir = temp_dir();
  const fs::path cfg = dir / "small.cfg";
  write_file(cfg, kSmallConfig);
  const fs::path rec = dir / "rec.json";
  const fs::path rec2 = dir / "rec2.json";

  CHECK(run_cli("run " + cfg.string() + " --out " + rec.string()) == 0);
  const OrderedJson record = OrderedJson::parse(read_file(rec));

  // The stored hash is the FNV-1a of the raw config bytes.
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(read_file(cfg))));
  CHECK(record.at("config_hash") == std::string(hash));

  // A parallel sweep writes the identical record.
  CHECK(run_cli("sweep " + cfg.string() + " --jobs 2 --out " + rec2.string()) == 0);
  CHECK(read_file(rec) == read_file(rec2));

  CHECK(run_cli("compare " + rec.string() + " " + rec2.string()) == 0);

  // Perturb one metric beyond the band: compare must fail with exit 1.
  OrderedJson bumped = record;
  bumped["cells"][0]["sup_norm"] = record["cells"][0]["sup_norm"].get<double>() + 0.01;
  const fs::path bad = dir / "bumped.json";
  write_file(bad, bumped.dump(2));
  CHECK(run_cli("compare " + rec.string() + " " + bad.string()) == 1);

  CHECK(run_cli("run /nonexistent/missing.cfg") == 2);

  // Failing census check surfaces as exit 1 through the CLI as well.
  const fs::path failcfg = dir / "fail.cfg";
  write_file(failcfg,
             "[domain]\nspec = disk(1)\n[grid]\nbeta = 1\nh = 0.12\n"
             "[checks]\ncensus = multimodal:4\nstability = off\nmonotonicity = off\n");
  CHECK(run_cli("run " + failcfg.string()) == 1);
}

}  // TEST_SUITE
