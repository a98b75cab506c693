#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "greenfem/cli.hpp"
#include "greenfem/config.hpp"
#include "greenfem/geometry.hpp"
#include "greenfem/green.hpp"
#include "greenfem/io.hpp"
#include "greenfem/mesh.hpp"

using namespace greenfem;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const fs::path d = fs::temp_directory_path() / "greenfem_io_test";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  REQUIRE(f.good());
  f << text;
}

}  // namespace

TEST_CASE("domain files round-trip and missing files are config errors") {
  const fs::path dir = work_dir();
  const Domain dom = zaremba_square(0.5, 4.0, 0.25);
  const fs::path p = dir / "zaremba_rt.dom";
  write_domain(dom, p.string());
  const Domain back = read_domain_file(p.string());
  REQUIRE(back.num_vertices() == dom.num_vertices());
  for (int i = 0; i < dom.num_vertices(); ++i) {
    CHECK(back.vertex(i).x == dom.vertex(i).x);
    CHECK(back.vertex(i).y == dom.vertex(i).y);
  }
  REQUIRE(back.arcs().size() == dom.arcs().size());
  for (size_t i = 0; i < dom.arcs().size(); ++i) {
    CHECK(back.arcs()[i].first == dom.arcs()[i].first);
    CHECK(back.arcs()[i].last == dom.arcs()[i].last);
    CHECK(back.arcs()[i].tag == dom.arcs()[i].tag);
  }
  CHECK(back.M() == dom.M());
  CHECK(back.r0() == dom.r0());

  try {
    read_domain_file((dir / "no_such_file.dom").string());
    FAIL("missing file accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("config: domain file not found") !=
          std::string::npos);
  }

  const fs::path bad = dir / "bad.dom";
  spit(bad, "v 0 0\nv 1 0\nwat 3\n");
  CHECK_THROWS_AS(read_domain_file(bad.string()), std::runtime_error);
}

TEST_CASE("mesh files round-trip exactly") {
  const fs::path p = work_dir() / "square_rt.mesh";
  const Mesh m = triangulate(unit_square_bottom(BoundaryTag::D, BoundaryTag::N),
                             0.21);
  write_mesh(m, p.string());
  const Mesh back = read_mesh(p.string());
  REQUIRE(back.num_nodes() == m.num_nodes());
  REQUIRE(back.num_tris() == m.num_tris());
  REQUIRE(back.bedges.size() == m.bedges.size());
  for (int i = 0; i < m.num_nodes(); ++i) {
    CHECK(back.nodes[i].x == m.nodes[i].x);
    CHECK(back.nodes[i].y == m.nodes[i].y);
  }
  for (int t = 0; t < m.num_tris(); ++t) CHECK(back.tris[t] == m.tris[t]);
  for (size_t e = 0; e < m.bedges.size(); ++e) {
    CHECK(back.bedges[e].a == m.bedges[e].a);
    CHECK(back.bedges[e].b == m.bedges[e].b);
    CHECK(back.bedges[e].tag == m.bedges[e].tag);
  }
  CHECK(back.target_h == doctest::Approx(max_edge_length(m)));
}

TEST_CASE("solution CSV round-trips and skips leading comment lines") {
  const Mesh m = triangulate(unit_square(), 0.3);
  for (const int comps : {1, 2}) {
    Eigen::VectorXd dofs(m.num_nodes() * comps);
    for (int i = 0; i < dofs.size(); ++i)
      dofs[i] = std::sin(3.7 * i) / (1.0 + i);
    std::ostringstream os;
    os << provenance_line("deadbeefdeadbeef", 7);
    write_solution(os, m, comps, dofs);
    std::istringstream is(os.str());
    const auto [mm, back] = read_solution(is);
    CHECK(mm == comps);
    REQUIRE(back.size() == dofs.size());
    for (int i = 0; i < dofs.size(); ++i) CHECK(back[i] == dofs[i]);
  }
  Eigen::VectorXd wrong(3);
  std::ostringstream os;
  CHECK_THROWS_AS(write_solution(os, m, 1, wrong), std::invalid_argument);
  std::istringstream junk("x,y\n1,2\n");
  CHECK_THROWS_AS(read_solution(junk), std::runtime_error);
}

TEST_CASE("config files parse, canonicalize, and hash deterministically") {
  const fs::path p = work_dir() / "sample.cfg";
  spit(p,
       "# sample\n"
       "domain = some.dom\n"
       "h = 0.04   # mesh size\n"
       "rho = 0.16\n"
       "bc = mixed\n"
       "coeff.kind = lame\n"
       "coeff.m = 2\n"
       "coeff.mu = 1 + 0.3*y1\n"
       "poles = 0.5,0.5; 0.25,0.75\n"
       "levels = 0.04, 0.02\n"
       "checks = poincare, symmetry\n"
       "seed = 9\n");
  const RunConfig cfg = read_config_file(p.string());
  CHECK(cfg.domain_file == "some.dom");
  CHECK(cfg.h == 0.04);
  CHECK(cfg.rho == 0.16);
  CHECK(cfg.bc == "mixed");
  CHECK(cfg.op == "lame");
  CHECK(cfg.m == 2);
  CHECK(cfg.mu == "1 + 0.3*y1");
  REQUIRE(cfg.poles.size() == 2);
  CHECK(cfg.poles[1].x == 0.25);
  CHECK(cfg.poles[1].y == 0.75);
  REQUIRE(cfg.levels.size() == 2);
  CHECK(cfg.levels[1] == 0.02);
  REQUIRE(cfg.checks.size() == 2);
  CHECK(cfg.checks[1] == "symmetry");
  CHECK(cfg.seed == 9);

  RunConfig d;  // defaults
  CHECK(d.op == "laplace");
  CHECK(d.h == 0.05);
  CHECK(d.bc == "auto");
  CHECK(d.seed == 1);

  const std::string hash = config_hash(cfg);
  REQUIRE(hash.size() == 16);
  for (char c : hash) CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
  CHECK(config_hash(cfg) == hash);
  RunConfig cfg2 = cfg;
  cfg2.h = 0.05;
  CHECK(config_hash(cfg2) != hash);
  CHECK(canonical_config(cfg) == canonical_config(cfg));

  std::istringstream bad_key("nonsense = 1\n");
  CHECK_THROWS_AS(parse_config(bad_key), std::runtime_error);
  std::istringstream no_eq("just words\n");
  CHECK_THROWS_AS(parse_config(no_eq), std::runtime_error);
  std::istringstream bad_bc("bc = dirichlet\n");
  CHECK_THROWS_AS(parse_config(bad_bc), std::runtime_error);
  CHECK_THROWS_AS(read_config_file("/no/such/file.cfg"), std::runtime_error);

  CHECK_THROWS_AS(parse_points("0.5"), std::runtime_error);
}

TEST_CASE("config-driven data and coefficients") {
  const auto f1 = make_data("", 2);
  CHECK(!f1);
  const auto broad = make_data("2 + y1", 2);
  double out[2] = {0, 0};
  broad({0.5, 0.0}, out);
  CHECK(out[0] == doctest::Approx(2.5));
  CHECK(out[1] == doctest::Approx(2.5));
  const auto two = make_data("y1; y2", 2);
  two({0.25, 0.75}, out);
  CHECK(out[0] == doctest::Approx(0.25));
  CHECK(out[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(make_data("y1; y2", 1), std::runtime_error);

  RunConfig cfg;
  cfg.op = "laplace";
  cfg.m = 2;
  CHECK_THROWS_AS(make_coefficients(cfg), std::runtime_error);
  cfg.m = 1;
  CHECK(make_coefficients(cfg).m == 1);

  RunConfig tens;
  tens.op = "tensor";
  tens.m = 1;
  tens.tensor = {"1", "0", "0", "1"};
  const CoefficientField cf = make_coefficients(tens);
  double A[4];
  cf.tensor({0.3, 0.4}, A);
  CHECK(A[0] == 1.0);
  CHECK(A[1] == 0.0);
  CHECK(A[3] == 1.0);
  tens.tensor = {"1", "0", "0"};
  CHECK_THROWS_AS(make_coefficients(tens), std::runtime_error);

  RunConfig lame;
  lame.op = "lame";
  lame.mu = "1";
  lame.lambda = "0.5";
  CHECK(make_coefficients(lame).m == 2);
  CHECK(make_coefficients(lame).is_elasticity);
}

TEST_CASE("green tables tolerate a provenance line") {
  const Mesh m = triangulate(unit_square(), 0.2);
  GreenTable gt;
  gt.rho = 0.1;
  gt.h = 0.2;
  gt.bc = GreenBC::Mixed;
  Eigen::MatrixXd val(1, 1);
  val(0, 0) = -0.25;
  gt.rows.push_back({{0.5, 0.5}, {0.25, 0.25}, val});
  std::ostringstream os;
  os << provenance_line("0123456789abcdef", 3);
  write_green_table(os, gt);
  std::istringstream is(os.str());
  const GreenTable back = read_green_table(is);
  REQUIRE(back.rows.size() == 1);
  CHECK(back.rows[0].val(0, 0) == -0.25);
  CHECK(back.rho == 0.1);
}

TEST_CASE("command line: solve is deterministic and exit codes track errors") {
  const fs::path dir = work_dir();
  const fs::path domf = dir / "square.dom";
  write_domain(unit_square(), domf.string());
  const fs::path out1 = dir / "u1.csv", out2 = dir / "u2.csv";

  REQUIRE(run_command({"solve", "--domain", domf.string(), "--h", "0.08",
                       "--f", "1", "--out", out1.string()}) == 0);
  REQUIRE(run_command({"solve", "--domain", domf.string(), "--h", "0.08",
                       "--f", "1", "--out", out2.string()}) == 0);
  const std::string text = slurp(out1);
  CHECK(text.rfind("# greenfem", 0) == 0);
  CHECK(text.find("node,y1,y2,u_0") != std::string::npos);
  CHECK(text == slurp(out2));
  {
    std::ifstream f(out1);
    const auto [mm, dofs] = read_solution(f);
    CHECK(mm == 1);
    CHECK(dofs.lpNorm<Eigen::Infinity>() ==
          doctest::Approx(0.0736).epsilon(0.05));  // square sup is ~0.0737
  }

  // Same inputs through a config file: byte-identical output.
  const fs::path cfgf = dir / "solve.cfg";
  spit(cfgf, "domain = " + domf.string() + "\nh = 0.08\nf = 1\n");
  const fs::path out3 = dir / "u3.csv";
  REQUIRE(run_command({"solve", "--config", cfgf.string(), "--out",
                       out3.string()}) == 0);
  CHECK(slurp(out3) == text);

  const fs::path meshf = dir / "square.mesh";
  REQUIRE(run_command({"solve", "--domain", domf.string(), "--h", "0.08",
                       "--f", "1", "--out", (dir / "u4.csv").string(),
                       "--mesh-out", meshf.string()}) == 0);
  CHECK(read_mesh(meshf.string()).num_nodes() > 50);

  CHECK(run_command({"solve", "--domain", (dir / "ghost.dom").string(),
                     "--h", "0.08", "--f", "1"}) == 2);
  CHECK(run_command({"solve", "--domain", domf.string(), "--h", "0.08"}) == 2);
  CHECK(run_command({"solve", "--domain", domf.string(), "--h", "0.5",
                     "--f", "1"}) == 2);  // h above r0
  CHECK(run_command({"nonsense"}) == 2);
  CHECK(run_command({}) == 2);
  CHECK(run_command({"--help"}) == 0);
}

TEST_CASE("command line: incompatible flux data fails, compatible passes") {
  const fs::path dir = work_dir();
  const fs::path domf = dir / "allflux.dom";
  write_domain(unit_square(BoundaryTag::N), domf.string());
  // f = 1 pairs nonzero with the constant kernel field: refused.
  CHECK(run_command({"solve", "--domain", domf.string(), "--h", "0.08",
                     "--f", "1", "--out", (dir / "n0.csv").string()}) == 1);
  // f = y1 - 1/2 has zero mean: solvable.
  CHECK(run_command({"solve", "--domain", domf.string(), "--h", "0.08",
                     "--f", "y1 - 0.5", "--out",
                     (dir / "n1.csv").string()}) == 0);
}

TEST_CASE("command line: green tables, gating, and the flux variant") {
  const fs::path dir = work_dir();
  const fs::path domf = dir / "square.dom";
  write_domain(unit_square(), domf.string());
  const fs::path gout = dir / "g.csv";
  REQUIRE(run_command({"green", "--domain", domf.string(), "--h", "0.05",
                       "--pole", "0.5,0.5", "--out", gout.string()}) == 0);
  const std::string text = slurp(gout);
  CHECK(text.rfind("# greenfem", 0) == 0);
  {
    std::ifstream f(gout);
    const GreenTable gt = read_green_table(f);
    CHECK(gt.rows.size() > 50);
    CHECK(gt.rho == doctest::Approx(0.2));  // default 4h
    CHECK(gt.bc == GreenBC::Dirichlet);
  }

  CHECK(run_command({"green", "--domain", domf.string(), "--h", "0.05",
                     "--pole", "0.5,0.5", "--rho", "0.1"}) == 2);
  CHECK(run_command({"green", "--domain", domf.string(), "--h", "0.05"}) == 2);
  CHECK(run_command({"green", "--domain", domf.string(), "--h", "0.05",
                     "--pole", "1.5,0.5"}) == 2);

  const fs::path nflux = dir / "allflux.dom";
  write_domain(unit_square(BoundaryTag::N), nflux.string());
  CHECK(run_command({"neumann-green", "--domain", domf.string(), "--h", "0.05",
                     "--pole", "0.5,0.5"}) == 2);
  const fs::path ngout = dir / "ng.csv";
  REQUIRE(run_command({"neumann-green", "--domain", nflux.string(), "--h",
                       "0.05", "--pole", "0.5,0.5", "--out",
                       ngout.string()}) == 0);
  std::ifstream f(ngout);
  const GreenTable gt = read_green_table(f);
  CHECK(gt.rows.size() > 50);
  CHECK(gt.bc == GreenBC::Neumann);
}

TEST_CASE("command line: fundamental tables") {
  const fs::path out = work_dir() / "fund.csv";
  REQUIRE(run_command({"fundamental", "--rho", "1", "--out", out.string()}) ==
          0);
  std::ifstream f(out);
  const GreenTable gt = read_green_table(f);
  CHECK(gt.rows.size() == 5 * 16);
  CHECK(gt.bc == GreenBC::Free);
}

TEST_CASE("command line: verify writes reports and report renders them") {
  const fs::path dir = work_dir();
  const fs::path domf = dir / "square.dom";
  write_domain(unit_square(), domf.string());
  const fs::path rep = dir / "rep.txt";
  REQUIRE(run_command({"verify", "--domain", domf.string(), "--h", "0.1",
                       "--checks", "poincare,green_identity", "--seed", "3",
                       "--out", rep.string()}) == 0);
  const std::string text = slurp(rep);
  CHECK(text.rfind("# greenfem", 0) == 0);
  CHECK(text.find("check poincare  PASS") != std::string::npos);
  CHECK(text.find("check green_identity  PASS") != std::string::npos);
  CHECK(text.find("verify: 2 checks, 2 passed, 0 failed") !=
        std::string::npos);

  const fs::path csv = fs::path(rep.string() + ".csv");
  const std::string csv_text = slurp(csv);
  CHECK(csv_text.find("kind,section,key,value") != std::string::npos);
  CHECK(csv_text.find("poincare,result,pass,1") != std::string::npos);

  REQUIRE(run_command({"report", csv.string(), "--out",
                       (dir / "rendered.txt").string()}) == 0);
  const std::string rendered = slurp(dir / "rendered.txt");
  CHECK(rendered.find("check poincare  PASS") != std::string::npos);
  CHECK(rendered.find("report: 2 checks, 2 passed, 0 failed") !=
        std::string::npos);

  CHECK(run_command({"verify", "--domain", domf.string(), "--h", "0.1",
                     "--checks", "nonsense"}) == 2);
  CHECK(run_command({"report", (dir / "ghost.csv").string()}) == 2);
  const fs::path notcsv = dir / "not_report.csv";
  spit(notcsv, "a,b\n1,2\n");
  CHECK(run_command({"report", notcsv.string()}) == 2);
}
