#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "dissipcert/feedback.hpp"
#include "dissipcert/gain.hpp"
#include "dissipcert/systems.hpp"

using namespace dissipcert;
using nlohmann::json;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
  json report;  // parsed stdout when it is JSON, null otherwise
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("dissipcert");
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  RunResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  r.report = json::value_t::null;
  if (!r.out.empty() && r.out.front() == '{')
    r.report = json::parse(r.out, nullptr, /*allow_exceptions=*/false);
  return r;
}

// A scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const std::filesystem::path p = path / name;
    std::ofstream f(p);
    f << content;
    return p.string();
  }
  std::string str() const { return path.string(); }
};

std::string lag_doc(double beta, double a, double d = 0.0) {
  json j{{"kind", "lti"},
         {"A", {{-a}}},
         {"B", {{beta}}},
         {"C", {{1.0}}},
         {"D", {{d}}}};
  return j.dump();
}

std::string loop_doc(const std::string& s1, const std::string& s2,
                     const char* e2 = nullptr) {
  std::string doc = "{\"sigma1\": " + s1 + ", \"sigma2\": " + s2;
  if (e2) doc += std::string(", \"e2\": \"") + e2 + "\"";
  return doc + "}";
}

long count_lines(const std::filesystem::path& p) {
  std::ifstream f(p);
  long n = 0;
  std::string line;
  while (std::getline(f, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("analyze reproduces the damped mass oracle") {
  TempDir dir("dissipcert_cli_analyze");
  // 1/(s + 2): output strict passivity index 2, peak gain 1/2 at omega = 0.
  const std::string sys = dir.file("mass.json", lag_doc(1.0, 2.0));

  RunResult r = run_cli({"analyze", sys, "--no-plots"});
  REQUIRE(r.code == 0);
  REQUIRE(r.report.is_object());
  CHECK(r.report["schema"] == 1);
  CHECK(r.report["kind"] == "analyze");

  const json& body = r.report["report"];
  CHECK(body["verdict"] == "stable");
  CHECK(body["operator"]["lti"] == true);
  CHECK(body["gain"]["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(body["gain"]["method"] == "hamiltonian_bisection");
  CHECK(body["gain_scan"]["value"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-4));
  CHECK(body["osp_index"]["value"].get<double>() ==
        doctest::Approx(2.0).epsilon(1e-6));
  CHECK(body["pr_margin"]["value"].get<double>() ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(body["passivity"]["is_certificate"] == true);
  CHECK(body["spectral_abscissa"]["value"].get<double>() ==
        doctest::Approx(-2.0));
  CHECK(body["plots"].empty());

  SUBCASE("every numeric block carries a method tag and a tolerance") {
    for (const char* key : {"gain", "gain_scan", "osp_index", "pr_margin",
                            "spectral_abscissa"}) {
      INFO(key);
      CHECK(body[key].contains("method"));
      CHECK(body[key].contains("tol"));
    }
  }

  SUBCASE("plots are written unless suppressed") {
    RunResult rp = run_cli({"analyze", sys, "--out", dir.str()});
    REQUIRE(rp.code == 0);
    const auto svg = dir.path / "gain_vs_frequency.svg";
    REQUIRE(std::filesystem::exists(svg));
    std::ifstream f(svg);
    std::string head;
    std::getline(f, head);
    CHECK(head.rfind("<svg", 0) == 0);
    CHECK(rp.report["report"]["plots"][0] == svg.string());
  }
}

TEST_CASE("input errors exit with code 2 and a located message") {
  TempDir dir("dissipcert_cli_errors");

  SUBCASE("empty file") {
    const std::string p = dir.file("empty.json", "");
    RunResult r = run_cli({"analyze", p});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find(p + ":$") != std::string::npos);
  }
  SUBCASE("missing file") {
    RunResult r = run_cli({"analyze", (dir.path / "nope.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.json") != std::string::npos);
  }
  SUBCASE("unknown document kind names the offending path") {
    const std::string p = dir.file("odd.json", "{\"kind\": \"banana\"}");
    RunResult r = run_cli({"analyze", p});
    CHECK(r.code == 2);
    CHECK(r.err.find(":$.kind") != std::string::npos);
  }
  SUBCASE("unknown subcommand") {
    RunResult r = run_cli({"bogus"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
  }
  SUBCASE("parameter box arity is validated") {
    const std::string p = dir.file("lag.json", lag_doc(1.0, 1.0));
    RunResult r = run_cli(
        {"falsify", p, "--family", "first_order", "--lo", "0.1", "--hi", "5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("first_order") != std::string::npos);
  }
  SUBCASE("an input signal excludes probe grid flags") {
    const std::string lp = dir.file(
        "loop.json", loop_doc(lag_doc(1.0, 2.0), lag_doc(1.0, 1.0)));
    const std::string csv = dir.file("e1.csv", "t,u[0]\n0,1\n0.5,1\n1,1\n");
    RunResult r =
        run_cli({"interconnect", lp, "--input", csv, "--dt", "0.1",
                 "--no-plots", "--out", dir.str()});
    CHECK(r.code == 2);
    CHECK(r.err.find("--dt") != std::string::npos);
  }
  SUBCASE("ensemble sampling rejects non-lti documents") {
    const std::string p = dir.file(
        "sat.json", "{\"kind\": \"static\", \"map\": \"saturation\", "
                    "\"dim\": 1, \"limit\": 1.0}");
    RunResult r = run_cli({"sproc", p, "--form", "gain"});
    CHECK(r.code == 2);
    CHECK(r.err.find("lti") != std::string::npos);
  }
  SUBCASE("transform demands lti blocks") {
    const std::string lp = dir.file(
        "mixed.json",
        loop_doc(lag_doc(1.0, 2.0), "{\"kind\": \"static\", \"map\": "
                                    "\"saturation\", \"dim\": 1, \"limit\": "
                                    "1.0}"));
    RunResult r = run_cli({"transform", lp});
    CHECK(r.code == 2);
    CHECK(r.err.find("lti") != std::string::npos);
  }
}

TEST_CASE("help is printed on request") {
  RunResult top = run_cli({"--help"});
  CHECK(top.code == 0);
  CHECK(top.out.find("Usage") != std::string::npos);
  CHECK(top.out.find("analyze") != std::string::npos);

  RunResult sub = run_cli({"falsify", "--help"});
  CHECK(sub.code == 0);
  CHECK(sub.out.find("--family") != std::string::npos);
}

TEST_CASE("reports are byte-deterministic for a fixed configuration") {
  TempDir dir("dissipcert_cli_determinism");
  const std::string sys = dir.file("mass.json", lag_doc(1.0, 2.0));
  RunResult a = run_cli({"analyze", sys, "--no-plots"});
  RunResult b = run_cli({"analyze", sys, "--no-plots"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  RunResult f1 = run_cli({"falsify", sys, "--family", "static_gain", "--lo",
                          "0.2", "--hi", "5", "--budget", "40"});
  RunResult f2 = run_cli({"falsify", sys, "--family", "static_gain", "--lo",
                          "0.2", "--hi", "5", "--budget", "40"});
  REQUIRE(f1.code == 0);
  CHECK(f1.out == f2.out);
}

TEST_CASE("interconnect simulates the loop and certifies its gain") {
  TempDir dir("dissipcert_cli_interconnect");
  const std::string lp =
      dir.file("loop.json", loop_doc(lag_doc(1.0, 2.0), lag_doc(1.0, 1.0)));

  RunResult r = run_cli({"interconnect", lp, "--steps", "501", "--no-plots",
                         "--out", dir.str(), "--expect-stable"});
  REQUIRE(r.code == 0);
  const json& body = r.report["report"];
  CHECK(body["verdict"] == "stable");
  CHECK(body["loop"]["lti"] == true);

  // The e1 -> y1 certificate must agree with a direct closed-loop norm.
  const StateSpace s1 = StateSpace::first_order(1.0, 2.0);
  const StateSpace s2 = StateSpace::first_order(1.0, 1.0);
  const ClosedLoop cl(OperatorExpr::lti(s1), OperatorExpr::lti(s2));
  const double direct = loop_gain(cl, LoopChannel::kE1ToY1).value;
  CHECK(body["loop_gain"]["e1_to_y1"]["value"].get<double>() ==
        doctest::Approx(direct).epsilon(1e-9));
  CHECK(body["loop_gain"]["full"]["value"].get<double>() >= direct - 1e-9);

  const auto traj = dir.path / "trajectory.csv";
  REQUIRE(std::filesystem::exists(traj));
  CHECK(count_lines(traj) == 502);  // header + one row per step
  std::ifstream f(traj);
  std::string head;
  std::getline(f, head);
  CHECK(head == "t,e1[0],e2[0],u1[0],u2[0],y1[0],y2[0]");
  CHECK(body["trajectory"]["rows"] == 501);
  CHECK(body["trajectory"]["input_energy"]["value"].get<double>() > 0.0);

  SUBCASE("a supplied drive signal fixes the grid") {
    std::ostringstream csv;
    csv << "t,u[0]\n";
    for (int k = 0; k < 200; ++k) csv << 0.05 * k << ",1\n";
    const std::string drive = dir.file("e1.csv", csv.str());
    RunResult rd = run_cli({"interconnect", lp, "--input", drive,
                            "--no-plots", "--out", dir.str()});
    REQUIRE(rd.code == 0);
    CHECK(rd.report["report"]["trajectory"]["rows"] == 200);
    CHECK(rd.report["report"]["trajectory"]["dt"].get<double>() ==
          doctest::Approx(0.05));
  }
}

TEST_CASE("unstable loops are verdict data, and exit one only on request") {
  TempDir dir("dissipcert_cli_unstable");
  // beta/(s+1) in negative-unity feedback via scale -1: pole at beta - 1.
  const std::string lp = dir.file(
      "hot.json",
      loop_doc(lag_doc(1.2, 1.0),
               "{\"kind\": \"identity\", \"dim\": 1, \"scale\": -1.0}"));

  RunResult plain = run_cli({"interconnect", lp, "--no-plots", "--out",
                             dir.str(), "--steps", "301"});
  CHECK(plain.code == 0);
  const json& body = plain.report["report"];
  CHECK(body["verdict"] == "unstable-unbounded");
  CHECK(body["loop_gain"]["full"].is_null());
  CHECK(body["loop_gain"]["closed_loop_abscissa"]["value"].get<double>() ==
        doctest::Approx(0.2).epsilon(1e-6));

  RunResult strict = run_cli({"interconnect", lp, "--no-plots", "--out",
                              dir.str(), "--steps", "301",
                              "--expect-stable"});
  CHECK(strict.code == 1);
}

TEST_CASE("falsify searches the gain ball and reports the witness") {
  TempDir dir("dissipcert_cli_falsify");

  SUBCASE("an expansive block is destabilized at the ball boundary") {
    const std::string sys = dir.file("hot.json", lag_doc(1.2, 1.0));
    RunResult r = run_cli({"falsify", sys, "--family", "gain_ball", "--alpha",
                           "1", "--budget", "80", "--expect-stable"});
    CHECK(r.code == 1);
    const json& body = r.report["report"];
    CHECK(body["verdict"] == "destabilized");
    CHECK(body["result"]["destabilized"] == true);
    CHECK(body["result"]["theta"][0].get<double>() == doctest::Approx(-1.0));
    CHECK(body["result"]["closed_loop_abscissa"]["value"].get<double>() ==
          doctest::Approx(0.2).epsilon(1e-6));
    CHECK(body["result"]["member_certificate"]["mode"] == "gain_bound");
  }

  SUBCASE("a contractive block survives the whole ball") {
    const std::string sys = dir.file("cool.json", lag_doc(0.5, 1.0));
    RunResult r = run_cli({"falsify", sys, "--family", "gain_ball", "--alpha",
                           "1", "--budget", "80", "--expect-stable"});
    CHECK(r.code == 0);
    const json& body = r.report["report"];
    CHECK(body["verdict"] == "survived");
    CHECK(body["result"]["max_gain_lb"]["method"] == "hamiltonian_bisection");
    CHECK(body["result"]["max_gain_lb"]["value"].get<double>() > 0.5);
  }

  SUBCASE("mode overrides reach the member filter") {
    const std::string sys = dir.file("plant.json", lag_doc(1.0, 1.0));
    RunResult r =
        run_cli({"falsify", sys, "--family", "first_order", "--lo", "0.5,0.5",
                 "--hi", "2,2", "--mode", "osp", "--level", "0.25",
                 "--budget", "16"});
    REQUIRE(r.code == 0);
    CHECK(r.report["report"]["family"]["mode"] == "osp");
    CHECK(r.report["report"]["family"]["mode_level"] == 0.25);
  }
}

TEST_CASE("sproc certifies the strictly passive block on the ensemble") {
  TempDir dir("dissipcert_cli_sproc");
  // 0.5 + 1/(s+2): feedthrough keeps every sampled supply integral strict.
  const std::string sys = dir.file("spass.json", lag_doc(1.0, 2.0, 0.5));

  RunResult r = run_cli({"sproc", sys, "--form", "gain", "--generators", "16",
                         "--shifts", "2"});
  REQUIRE(r.code == 0);
  const json& body = r.report["report"];
  CHECK(body["verdict"] == "conditionally-negative");
  CHECK(body["ensemble"]["members"] == 32);
  CHECK(body["form"]["target"] == "gain_form(gamma)");
  CHECK(body["result"]["conditionally_negative"] == true);
  REQUIRE_FALSE(body["result"]["mu"].is_null());

  // The reported multiplier must re-verify on the reported pairs.
  const double mu_hat = body["result"]["mu_hat"].get<double>();
  const double tol = body["result"]["tol"].get<double>();
  for (const auto& pr : body["result"]["pairs"]) {
    const double a = pr["a"].get<double>();
    const double b = pr["b"].get<double>();
    CHECK(a + mu_hat * b <= tol);
  }

  SUBCASE("the small-gain pairing takes its own ball radius") {
    RunResult rs = run_cli({"sproc", sys, "--form", "small_gain", "--alpha",
                            "1", "--generators", "16", "--shifts", "2"});
    REQUIRE(rs.code == 0);
    CHECK(rs.report["report"]["form"]["alpha"] == 1.0);
    CHECK(rs.report["report"]["form"]["constraint"] ==
          "small_gain_supply(alpha)");
    CHECK_FALSE(rs.report["report"]["result"]["mu"].is_null());
  }
}

TEST_CASE("example sweeps the phase plane and emits the boundary curve") {
  TempDir dir("dissipcert_cli_example");
  RunResult r = run_cli({"example", "--m", "1", "--k", "1", "--grid", "11x11",
                         "--out", dir.str()});
  REQUIRE(r.code == 0);
  const json& body = r.report["report"];
  CHECK(body["counts"]["cells"] == 121);
  CHECK(body["counts"]["stable"].get<long>() > 0);
  CHECK(body["counts"]["stable"].get<long>() < 121);
  CHECK(body["boundary"] == "d/m + s0 = 0");

  // The trace-only predicate disagrees with the eigenvalues in the
  // quadrant where the determinant goes negative; the sweep must report
  // that honestly.
  CHECK(body["counts"]["mismatch"].get<long>() > 0);
  CHECK(body["predicate_matches_eigenvalues"] == false);

  const auto sweep = dir.path / "sweep.csv";
  const auto boundary = dir.path / "boundary.csv";
  REQUIRE(std::filesystem::exists(sweep));
  REQUIRE(std::filesystem::exists(boundary));
  CHECK(count_lines(sweep) == 122);  // header + 11x11 cells
  std::ifstream bf(boundary);
  std::string head, first;
  std::getline(bf, head);
  std::getline(bf, first);
  CHECK(head == "d,s0");
  CHECK(first == "-1,1");  // s0 = -d/m enters the window at d = -1
  CHECK(std::filesystem::exists(dir.path / "phase_diagram.svg"));

  SUBCASE("the grid spec is validated") {
    RunResult bad = run_cli({"example", "--grid", "1x9"});
    CHECK(bad.code == 2);
    RunResult junk = run_cli({"example", "--grid", "11x11x3"});
    CHECK(junk.code == 2);
  }
}

TEST_CASE("transform checks gain preservation of the loop shift") {
  TempDir dir("dissipcert_cli_transform");
  const std::string lp =
      dir.file("loop.json", loop_doc(lag_doc(1.0, 2.0), lag_doc(1.0, 1.0)));

  RunResult r = run_cli({"transform", lp, "--eps", "0.05,0.2"});
  REQUIRE(r.code == 0);
  const json& body = r.report["report"];
  CHECK(body["verdict"] == "equivalent");
  REQUIRE(body["shifts"].size() == 2);
  CHECK(body["shifts"][0]["eps"] == 0.05);
  CHECK(body["shifts"][1]["eps"] == 0.2);
  for (const auto& entry : body["shifts"]) {
    CHECK(entry["gain_preserved"] == true);
    CHECK(entry["relative_difference"].get<double>() <= 1e-4);
    // The shift hands the first block an output margin of at least eps.
    CHECK(entry["shifted_sigma1_osp_index"]["value"].get<double>() >=
          entry["eps"].get<double>() - 1e-6);
    CHECK(entry["wrapped_sigma2_pr_margin"]["value"].get<double>() >= -1e-9);
  }
  CHECK(body["multiplier"]["gain_preserved"] == true);
  CHECK(body["multiplier"]["relative_difference"].get<double>() <= 1e-4);

  SUBCASE("an unstable closed loop is a verdict, not a crash") {
    const std::string hot = dir.file(
        "hot.json",
        loop_doc(lag_doc(1.2, 1.0),
                 "{\"kind\": \"identity\", \"dim\": 1, \"scale\": -1.0}"));
    RunResult rh = run_cli({"transform", hot});
    CHECK(rh.code == 0);
    CHECK(rh.report["report"]["verdict"] == "unstable-unbounded");
    RunResult strict = run_cli({"transform", hot, "--expect-stable"});
    CHECK(strict.code == 1);
  }
}
