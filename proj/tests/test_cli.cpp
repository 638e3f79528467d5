#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "phf/cli.hpp"
#include "phf/families.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = phf::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("phf_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("exact menger") {
  const auto r = run({"exact", "menger", "--json", "--no-meta"});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(std::abs(doc.at("euler_phf").get<double>() + 0.0001353) < 5e-5);
}

TEST_CASE("exact cantor json has the report schema") {
  const auto r = run({"exact", "cantor", "--json"});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc.at("fractal").is_string());
  CHECK(doc.at("diameter").is_number());
  CHECK(doc.at("euler_phf").is_number());
  REQUIRE(doc.at("degrees").is_array());
  for (const auto& d : doc.at("degrees")) {
    CHECK(d.at("i").is_number_integer());
    CHECK(d.at("sigma").is_number());
    CHECK((d.at("beta_closed").is_number() || d.at("beta_closed").is_null()));
    CHECK((d.at("beta_sequence").is_number() || d.at("beta_sequence").is_null()));
    CHECK(d.at("trace").is_array());
  }
  const auto& lw = doc.at("lw_comparison");
  CHECK(lw.at("sigma").is_number());
  CHECK(lw.at("chi_estimate").is_number());
  CHECK(lw.at("delta_min").is_number());
  CHECK(doc.at("meta").at("generated_at").is_string());
}

TEST_CASE("exact cantor_dust table") {
  const auto r = run({"exact", "cantor_dust"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0.145687") != std::string::npos);
  CHECK(r.out.find("0.0438746") != std::string::npos);
  CHECK(r.out.find("euler_phf 0.101812") != std::string::npos);
}

TEST_CASE("exact reports non-convergence with exit 3 and still writes") {
  const auto dir = scratch("conv");
  const auto r = run({"exact", "cantor_dust", "--j-max", "3", "--tol", "1e-300", "--out", dir.string()});
  CHECK(r.code == 3);
  CHECK(fs::exists(dir / "cantor_dust_report.json"));
  const auto doc = json::parse(slurp(dir / "cantor_dust_report.json"));
  CHECK_FALSE(doc.at("converged").get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("argument errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"exact"}).code == 2);
  CHECK(run({"exact", "koch"}).code == 2);
  CHECK(run({"numeric", "cantor", "--depth", "4", "--res", "100"}).code == 2);
  CHECK(run({"numeric", "cantor", "--res", "81"}).code == 2);
  CHECK(run({"numeric", "cantor", "--depth", "2", "--res", "9", "--workers", "0"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  const auto r = run({"numeric", "cantor", "--depth", "4", "--res", "100"});
  CHECK(r.err.find("162") != std::string::npos);
}

TEST_CASE("numeric menger depth 2") {
  const auto r = run({"numeric", "menger", "--depth", "2", "--res", "27", "--curve-eps", "0.0786",
                      "--json", "--no-meta"});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc.at("curve_eps")[0].at("betti")[1] == 5);
}

TEST_CASE("numeric writes outputs deterministically") {
  const auto a = scratch("num_a");
  const auto b = scratch("num_b");
  const std::vector<std::string> base{"numeric", "cantor", "--depth", "4", "--res", "243", "--no-meta",
                                      "--dump-bitmap", "--dump-distance", "0"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out", a.string(), "--workers", "1"});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out", b.string(), "--workers", "3"});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  for (const char* f : {"cantor_k4_n243_diagram.csv", "cantor_k4_n243_betti.csv",
                        "cantor_k4_n243_summary.json", "cantor_k4_n243_bitmap.nrrd",
                        "cantor_k4_n243_distance.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto betti = slurp(a / "cantor_k4_n243_betti.csv");
  CHECK(std::count(betti.begin(), betti.end(), '\n') == 201);
  const auto diagram = slurp(a / "cantor_k4_n243_diagram.csv");
  CHECK(diagram.rfind("dim,birth,death,multiplicity\n", 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("resource errors exit 4 and leave no outputs") {
  const auto dir = scratch("res");
  const auto r = run({"numeric", "menger", "--depth", "2", "--res", "27", "--memory-budget", "1M",
                      "--out", dir.string()});
  CHECK(r.code == 4);
  CHECK((!fs::exists(dir) || fs::is_empty(dir)));
  setenv("PHF_MEMORY_BUDGET", "100", 1);
  CHECK(run({"numeric", "cantor", "--depth", "2", "--res", "9"}).code == 4);
  unsetenv("PHF_MEMORY_BUDGET");
  CHECK(run({"numeric", "cantor", "--depth", "2", "--res", "9"}).code == 0);
  fs::remove_all(dir);
}

TEST_CASE("compare") {
  CHECK(run({"compare", "cantor", "--depth", "5", "--res", "729"}).code == 0);
  const auto sc = run({"compare", "sierpinski_carpet", "--depth", "3", "--res", "108", "--json", "--no-meta"});
  REQUIRE(sc.code == 0);
  const auto doc = json::parse(sc.out);
  CHECK(doc.at("degrees")[1].at("unmatched_symbolic") == 0);
  CHECK(doc.at("degrees")[1].at("matched") == 9);
  CHECK(run({"compare", "cantor", "--depth", "4", "--res", "243", "--tol", "0"}).code == 5);
}

TEST_CASE("lw") {
  const auto sc8 = json::parse(run({"lw", "sierpinski_carpet", "--delta", "1e-8", "--json"}).out);
  const auto sc4 = json::parse(run({"lw", "sierpinski_carpet", "--delta", "1e-4", "--json"}).out);
  CHECK(sc8.at("discrepancy").get<double>() < sc4.at("discrepancy").get<double>());
  const auto dust = run({"lw", "cantor_dust"});
  CHECK(dust.code == 6);
  CHECK(dust.err.find("not defined") != std::string::npos);
  CHECK(run({"lw", "menger"}).code == 6);
  CHECK(run({"lw", "cantor", "--delta", "2"}).code == 2);
}

TEST_CASE("no-meta output is byte identical") {
  for (const char* name : {"cantor", "menger"}) {
    const auto a = run({"exact", name, "--json", "--no-meta"});
    const auto b = run({"exact", name, "--json", "--no-meta"});
    CHECK(a.out == b.out);
    CHECK(a.out.find("generated_at") == std::string::npos);
  }
}

TEST_CASE("spec file accepted in place of a name") {
  const auto dir = scratch("spec");
  fs::create_directories(dir);
  const auto path = dir / "dust.json";
  {
    std::ofstream f(path);
    auto spec = phf::builtin_spec(phf::Builtin::cantor_dust);
    spec.name = "my_dust";
    f << phf::to_json(spec).dump();
  }
  const auto r = run({"exact", path.string(), "--json", "--no-meta"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("fractal") == "my_dust");
  fs::remove_all(dir);
}

TEST_CASE("parse_bytes") {
  CHECK(phf::cli::parse_bytes("1024") == 1024);
  CHECK(phf::cli::parse_bytes("2K") == 2048);
  CHECK(phf::cli::parse_bytes("8G") == (std::size_t{8} << 30));
  CHECK_THROWS(phf::cli::parse_bytes("lots"));
  CHECK_THROWS(phf::cli::parse_bytes("5X"));
}
