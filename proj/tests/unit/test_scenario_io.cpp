#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ubcn/errors.hpp"
#include "ubcn/io/atomic_file.hpp"
#include "ubcn/io/scenario_io.hpp"

using namespace ubcn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ubcn_scenario_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("power quantities need units") {
  CHECK(io::parse_power_watts("6 W") == 6.0);
  CHECK(io::parse_power_watts("250 mW") == doctest::Approx(0.25));
  CHECK(io::parse_power_watts("30 dBm") == doctest::Approx(1.0));
  CHECK(io::parse_power_dbm("-144 dBm") == -144.0);
  CHECK(io::parse_power_dbm("1 W") == doctest::Approx(30.0));
  CHECK_THROWS_AS(io::parse_power_watts("6"), ConfigError);
  CHECK_THROWS_AS(io::parse_power_watts("6 kW"), ConfigError);
  CHECK_THROWS_AS(io::parse_power_watts("6 W extra"), ConfigError);
  CHECK_THROWS_AS(io::parse_power_dbm("0 W"), ConfigError);
}

TEST_CASE("exact number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -144.0, 6.02214076e23}) {
    CHECK(std::stod(io::format_exact(v)) == v);
  }
}

TEST_CASE("scenario documents round-trip") {
  const fs::path dir = scratch("roundtrip");
  io::GenerationSpec g;
  g.seed = 11;
  const Scenario s = io::generate_from_spec(g, {});
  io::save_scenario(dir / "scenario.json", s.params());
  CHECK(io::load_scenario(dir / "scenario.json") == s.params());

  const std::string text = slurp(dir / "scenario.json");
  CHECK(text.find("\"noise_power\": \"-144 dBm\"") != std::string::npos);
  CHECK(text.find("\"p_max\": \"6 W\"") != std::string::npos);

  io::GenerationSpec paper;
  paper.profile = Profile::Paper;
  const Scenario p = io::generate_from_spec(paper, {"qbar=1,2,3,4,5,6,7,8,9,10,11,12"});
  CHECK(io::scenario_from_json(nlohmann::json::parse(io::scenario_to_json(p.params()).dump())) == p.params());
  CHECK(p.num_bds() == 12);
  CHECK(p.qbar(11) == 12.0);
  CHECK(p.num_slots() == 200);
}

TEST_CASE("overrides") {
  io::GenerationSpec g;
  const Scenario s = io::generate_from_spec(
      g, {"T=50", "N=40", "M=1", "K=3", "area_side=20", "H=25", "qbar=12", "ebar=2e-4", "eta=0.4", "p_max=8 W",
          "v_max=12", "noise_power=-140 dBm", "beta0=2e-3", "carrier_freq=2.4e9"});
  CHECK(s.params().mission_time == 50.0);
  CHECK(s.num_slots() == 40);
  CHECK(s.num_ces() == 1);
  CHECK(s.num_bds() == 3);
  CHECK(s.altitude() == 25.0);
  CHECK(s.qbar(0) == 12.0);
  CHECK(s.ebar(2) == 2e-4);
  CHECK(s.eta(1) == 0.4);
  CHECK(s.params().p_max == 8.0);
  CHECK(s.params().v_max == 12.0);
  CHECK(s.params().noise_power_dbm == -140.0);
  CHECK(s.params().beta0 == 2e-3);
  CHECK(s.params().carrier_freq == 2.4e9);
  for (std::size_t k = 0; k < 3; ++k) CHECK(s.bd_position(k).maxCoeff() <= 20.0);

  CHECK_THROWS_AS(io::generate_from_spec(g, {"bogus=1"}), ConfigError);
  CHECK_THROWS_AS(io::generate_from_spec(g, {"T"}), ConfigError);
  CHECK_THROWS_AS(io::generate_from_spec(g, {"T=abc"}), ConfigError);
  CHECK_THROWS_AS(io::generate_from_spec(g, {"K=0"}), ConfigError);
  CHECK_THROWS_AS(io::generate_from_spec(g, {"N=-3"}), ConfigError);
  CHECK_THROWS_AS(io::generate_from_spec(g, {"p_max=8"}), ConfigError);
  CHECK_THROWS_AS(io::generate_from_spec(g, {"eta=2"}), ConfigError);
}

TEST_CASE("generation is deterministic per seed") {
  const fs::path dir = scratch("seed");
  io::GenerationSpec g;
  g.seed = 7;
  io::save_scenario(dir / "a.json", io::generate_from_spec(g, {}).params());
  io::save_scenario(dir / "b.json", io::generate_from_spec(g, {}).params());
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  g.seed = 8;
  io::save_scenario(dir / "c.json", io::generate_from_spec(g, {}).params());
  CHECK(slurp(dir / "a.json") != slurp(dir / "c.json"));
}

TEST_CASE("malformed scenario files") {
  const fs::path dir = scratch("bad");
  CHECK_THROWS_AS(io::load_scenario(dir / "missing.json"), ConfigError);
  io::write_atomic(dir / "garbage.json", "{ not json");
  CHECK_THROWS_AS(io::load_scenario(dir / "garbage.json"), ConfigError);

  io::GenerationSpec g;
  auto doc = io::scenario_to_json(io::generate_from_spec(g, {}).params());
  auto broken = [&](auto mutate) {
    nlohmann::json d = nlohmann::json::parse(doc.dump());
    mutate(d);
    CHECK_THROWS_AS(io::scenario_from_json(d), ConfigError);
  };
  broken([](nlohmann::json& d) { d.erase("altitude"); });
  broken([](nlohmann::json& d) { d["p_max"] = 6.0; });
  broken([](nlohmann::json& d) { d["noise_power"] = "-144"; });
  broken([](nlohmann::json& d) { d["num_slots"] = 2.5; });
  broken([](nlohmann::json& d) { d["ce_positions"] = {{1.0, 2.0, 3.0}}; });
  broken([](nlohmann::json& d) { d["altitude"] = "high"; });
  broken([](nlohmann::json& d) { d.erase("uav"); });
  CHECK_THROWS_AS(io::scenario_from_json(nlohmann::json::array()), ConfigError);

  nlohmann::json neg = nlohmann::json::parse(doc.dump());
  neg["altitude"] = -1.0;
  io::write_atomic(dir / "neg.json", neg.dump());
  CHECK_THROWS_AS(io::load_scenario(dir / "neg.json"), ConfigError);
}

TEST_CASE("atomic writes leave no temporary files") {
  const fs::path dir = scratch("atomic");
  io::write_atomic(dir / "x.txt", "one");
  io::write_atomic(dir / "x.txt", "two");
  CHECK(slurp(dir / "x.txt") == "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  io::write_atomic(dir / "new" / "y.txt", "three");
  CHECK(slurp(dir / "new" / "y.txt") == "three");
  CHECK_THROWS(io::write_atomic(dir / "x.txt" / "z.txt", "z"));
}
