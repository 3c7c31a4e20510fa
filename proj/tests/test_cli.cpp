#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "qrec/absorption.hpp"
#include "qrec/catalog.hpp"
#include "qrec/cli.hpp"
#include "qrec/io.hpp"

using namespace qrec;
using Json = nlohmann::ordered_json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qrec");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(QREC_DATA_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const std::filesystem::path p = std::filesystem::temp_directory_path() / ("qrec_test_" + name);
  std::ofstream(p) << text;
  return p.string();
}

CMatrix matrix_of(const Json& rows) {
  const Index n = static_cast<Index>(rows.size());
  CMatrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const Json& e = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

std::map<std::string, std::string> csv_trailer(const std::string& csv) {
  std::map<std::string, std::string> kv;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) continue;
    const auto comma = line.find(',');
    kv[line.substr(2, comma - 2)] = line.substr(comma + 1);
  }
  return kv;
}

}  // namespace

TEST_CASE("help") {
  const Outcome o = run_cli({"--help"});
  CHECK(o.code == 0);
  CHECK(o.out.find("dihedral") != std::string::npos);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"bogus"}).code == 2);
}

TEST_CASE("analyze the three-level absorber") {
  const Outcome o = run_cli({"--seed", "7", "analyze", data("three_level.json")});
  REQUIRE(o.code == 0);
  const Json doc = Json::parse(o.out);
  CHECK(doc["dim"] == 3);
  CHECK(doc["fixed_points"]["dim"] == 4);
  CHECK(doc["fixed_points"]["closure"]["closed"] == false);
  CHECK(doc["recurrence"]["positive"]["dim"] == 2);
  CHECK(doc["absorbing_recurrent"]["absorbing"] == true);
  CHECK(doc["algebra"]["is_algebra"] == false);
  CHECK(std::abs(doc["algebra"]["worst_pair"]["norm"].get<double>() - 0.25) < 1e-6);
  CHECK(doc["reconstruction"]["matches"] == true);
  CHECK(doc["reconstruction"]["span_dim"] == 4);
  for (const Json& a : doc["absorption"]) CHECK(a["linear_agreement"].get<double>() < 1e-6);
}

TEST_CASE("reports are deterministic for a fixed seed") {
  const Outcome a = run_cli({"--seed", "3", "analyze", data("three_level.json")});
  const Outcome b = run_cli({"--seed", "3", "analyze", data("three_level.json")});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("fixed-points") {
  const Outcome o = run_cli({"fixed-points", data("amplitude_damping.json")});
  REQUIRE(o.code == 0);
  const Json doc = Json::parse(o.out);
  CHECK(doc["fixed_points"]["dim"] == 1);
  CHECK(doc["fixed_points"]["closure"]["closed"] == true);
}

TEST_CASE("absorption of a ray by both methods") {
  const Outcome o = run_cli({"absorption", data("three_level.json"), "--enclosure", data("ray_e0.json")});
  REQUIRE(o.code == 0);
  const Json doc = Json::parse(o.out);
  CHECK(doc["results"].size() == 2);
  CHECK(doc["agreement"]["agree"] == true);
  const CMatrix a = matrix_of(doc["results"][0]["matrix"]);
  CHECK(std::abs(a(0, 0).real() - 1.0) < 1e-8);
  CHECK(std::abs(a(2, 2).real() - 0.5) < 1e-8);

  const Outcome iter = run_cli({"absorption", data("three_level.json"), "--enclosure", data("ray_e0.json"),
                                "--method", "iter"});
  CHECK(Json::parse(iter.out)["results"].size() == 1);
  CHECK(run_cli({"absorption", data("three_level.json"), "--enclosure", data("ray_e0.json"), "--method", "x"}).code ==
        2);
}

TEST_CASE("absorption rejects a non-enclosure") {
  const std::string frame = write_temp("ray_e2.json", R"({"ambient_dim": 3, "vectors": [[0, 0, 1]]})");
  const Outcome o = run_cli({"absorption", data("three_level.json"), "--enclosure", frame});
  CHECK(o.code == 1);
  CHECK(o.err.rfind("absorption: ", 0) == 0);
}

TEST_CASE("classical gambler's ruin") {
  const Outcome o = run_cli({"classical", data("gambler5.chain"), "--closed", "4", "--cross-check"});
  REQUIRE(o.code == 0);
  const Json doc = Json::parse(o.out);
  const std::vector<double> a = doc["absorption"];
  const std::vector<double> expected{0.0, 0.25, 0.5, 0.75, 1.0};
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a[i] - expected[i]) < 1e-10);
  CHECK(doc["agree"] == true);
  CHECK(doc["max_deviation"].get<double>() < 1e-6);

  CHECK(run_cli({"classical", data("gambler5.chain"), "--closed", "2"}).code == 1);
}

TEST_CASE("embedded chain round trips through a spec file") {
  const Outcome o = run_cli({"embed", data("gambler5.chain")});
  REQUIRE(o.code == 0);
  const std::string path = write_temp("embedded.json", o.out);
  const io::ChannelSpec spec = io::load_channel_spec(path);
  CHECK(spec.channel.dim() == 5);
  const Superoperator map = superoperator_matrix(spec.channel, Picture::heisenberg);
  const RecurrenceDecomposition rd = recurrence_decomposition(map);
  const AbsorptionOperator a = absorption_linear(map, Subspace::coordinate(5, {4}), rd);
  const RVector classical = classical_absorption(catalog::gamblers_ruin(5), {4});
  CHECK((a.matrix.diagonal().real() - classical).cwiseAbs().maxCoeff() < 1e-6);

  const Outcome analyzed = run_cli({"analyze", path});
  REQUIRE(analyzed.code == 0);
  CHECK(Json::parse(analyzed.out)["fixed_points"]["dim"] == 2);
}

TEST_CASE("malformed specs are parse failures") {
  const std::string bad_rows = write_temp("bad_rows.json", R"({"dim": 2, "kraus": [[[1, 0], [0, 1], [0, 0]]]})");
  const Outcome o = run_cli({"analyze", bad_rows});
  CHECK(o.code == 2);
  CHECK(o.err.find("kraus[0]: expected 2 rows, found 3") != std::string::npos);

  const std::string not_json = write_temp("not_json.json", "{ dim: ");
  CHECK(run_cli({"analyze", not_json}).code == 2);
  CHECK(run_cli({"analyze", "/nonexistent/spec.json"}).code == 2);

  const std::string bad_chain = write_temp("bad.chain", "2\n0.5 0.5\n0.5\n");
  const Outcome c = run_cli({"classical", bad_chain, "--closed", "0"});
  CHECK(c.code == 2);
}

TEST_CASE("non-normalized Kraus operators are precondition failures") {
  const std::string half = write_temp("half.json", R"({"dim": 2, "kraus": [[[0.7071067811865476, 0], [0, 0.7071067811865476]]]})");
  const Outcome o = run_cli({"analyze", half});
  CHECK(o.code == 1);
  CHECK(o.err.rfind("channel: ", 0) == 0);
  CHECK(o.err.find("normalization residual") != std::string::npos);
  CHECK(o.err.find("0.4999999999") != std::string::npos);
}

TEST_CASE("dihedral series") {
  const Outcome o = run_cli({"dihedral", "--N", "1200", "--series"});
  REQUIRE(o.code == 0);
  std::istringstream in(o.out);
  std::string header, s1, s2, s3;
  std::getline(in, header);
  std::getline(in, s1);
  std::getline(in, s2);
  std::getline(in, s3);
  CHECK(header == "n,S_n");
  CHECK(s1 == "1,1");
  CHECK(s2 == "2,1");
  CHECK(s3 == "3,1.5");
  const auto kv = csv_trailer(o.out);
  CHECK(kv.at("leak") == "0");
  CHECK(kv.at("ratio_m") == "299");
  const double ratio = std::stod(kv.at("growth_ratio"));
  CHECK(ratio > 1.30);
  CHECK(ratio < 1.53);

  CHECK(run_cli({"dihedral", "--N", "10", "--series", "--n-max", "10"}).code == 1);
  CHECK(run_cli({"dihedral", "--N", "1"}).code == 1);
  CHECK(run_cli({"dihedral", "--N", "10", "--series", "--shift-check"}).code == 2);
}

TEST_CASE("dihedral shift check and partition") {
  const Outcome s = run_cli({"dihedral", "--N", "6", "--shift-check"});
  REQUIRE(s.code == 0);
  CHECK(csv_trailer(s.out).at("interior_residual") == "0");
  CHECK(s.out.find("3,even,3,0,e\n") != std::string::npos);

  const Outcome p = run_cli({"dihedral", "--N", "64", "--partition", "2"});
  REQUIRE(p.code == 0);
  const auto kv = csv_trailer(p.out);
  CHECK(kv.at("complete") == "true");
  CHECK(kv.at("orthogonal") == "true");
  CHECK(kv.at("refines") == "true");
  CHECK(kv.at("orbit_size_even") == "65");
  CHECK(kv.at("orbit_size_odd") == "64");
  CHECK(run_cli({"dihedral", "--N", "4", "--partition", "3"}).code == 1);
}
