#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "msqaoa/io.hpp"

using namespace msqaoa;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("msqaoa-io-" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("doubles round-trip exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(io::parse_double(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(code_of([] { io::parse_double("1.5x"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { io::parse_double(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { io::parse_int("2.0"); }) == ErrorCode::ParseError);
}

TEST_CASE("lists and grids") {
  CHECK(io::parse_int_list("3") == std::vector<int>{3});
  CHECK(io::parse_int_list("2..5,8") == std::vector<int>{2, 3, 4, 5, 8});
  CHECK(code_of([] { io::parse_int_list("5..2"); }) == ErrorCode::ParseError);
  CHECK(io::parse_double_list("0,0,1.5") == std::vector<double>{0, 0, 1.5});
  CHECK(io::parse_grid("-1:1:5") == std::vector<double>{-1, -0.5, 0, 0.5, 1});
  CHECK(io::parse_grid("0.3:9:1") == std::vector<double>{0.3});
  CHECK(code_of([] { io::parse_grid("0:1:0"); }) == ErrorCode::EmptyGrid);
  CHECK(code_of([] { io::parse_grid("0:1"); }) == ErrorCode::ParseError);
}

TEST_CASE("instance files round-trip") {
  const ProblemInstance inst = sample_instance(make_mixture_spec(3, {0.5, 1.0, 2.0}), 8, 0xdeadbeefULL);
  std::stringstream buf;
  io::write_instance(buf, inst);
  const std::string text = buf.str();
  CHECK(text.rfind("n=8 d=3 sigmas=0.5,1,2 seed=deadbeef\n", 0) == 0);
  CHECK(text.find("\n3 1,2,3 ") != std::string::npos);
  CHECK(io::read_instance(buf) == inst);
}

TEST_CASE("instance file errors") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return io::parse_instance_file(in);
  };
  CHECK(code_of([&] { parse(""); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse("n=3 d=1 seed=1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse("n=3 d=1 sigmas=1 seed=1\n1 4 0.5\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse("n=3 d=2 sigmas=0,1 seed=1\n2 1 0.5\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse("n=3 d=2 sigmas=0,1 seed=1\n2 1,1 0.5\n"); }) == ErrorCode::ParseError);
  const io::InstanceFile f = parse("n=3 d=2 sigmas=0,1 seed=0x1f\n2 1,3 0.5\n\n");
  CHECK(f.seed == 31);
  CHECK(f.couplings.size() == 1);
  CHECK(f.couplings[0].mask == 0b101);
  CHECK_THROWS_AS(io::to_instance(f), Error);
}

TEST_CASE("grid CSV round-trips bit for bit") {
  const std::vector<double> betas{-0.1, 0.2}, gammas{0.1, 0.3333333333333333, 1e-300};
  Eigen::MatrixXd v(2, 3);
  v << 1.0 / 3, -2e-17, 5, std::nextafter(1.0, 2.0), 0, -7.25;
  std::stringstream buf;
  io::write_grid_csv(buf, betas, gammas, v);
  const io::Grid g = io::read_grid_csv(buf);
  CHECK(g.betas == betas);
  CHECK(g.gammas == gammas);
  CHECK(g.values == v);
  CHECK_THROWS_AS(io::write_grid_csv(buf, betas, betas, v), Error);
}

TEST_CASE("moment records round-trip") {
  const MomentReport r{12, -0.29, 0.11, 0.11 - 0.29 * 0.29, false, MomentMethod::Oracle,
                       make_mixture_spec(2, {0.0, 1.0}), Angles{0.39, -0.5}};
  const MomentReport back = io::parse_moment_report_line(io::moment_report_line(r));
  CHECK(back.n == 12);
  CHECK(back.first == r.first);
  CHECK(back.second == r.second);
  CHECK(back.method == MomentMethod::Oracle);
  CHECK(back.spec == r.spec);
  CHECK(back.angles == r.angles);
  CHECK(io::to_json(r)["method"] == "oracle");
}

TEST_CASE("sha256") {
  TempDir dir;
  std::ofstream(dir.path / "abc.txt") << "abc";
  CHECK(io::sha256_file(dir.path / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(code_of([&] { io::sha256_file(dir.path / "missing"); }) == ErrorCode::IoError);
}

TEST_CASE("manifest round-trip and tamper detection") {
  TempDir dir;
  std::ofstream(dir.path / "a.csv") << "x\n";
  fs::create_directories(dir.path / "sub");
  std::ofstream(dir.path / "sub" / "b.csv") << "y\n";
  const std::vector<fs::path> outs{dir.path / "a.csv", dir.path / "sub" / "b.csv"};
  const io::RunManifest m = io::make_manifest("landscape", {{"beta", "0:1:3"}}, {7, 9}, dir.path, outs);
  CHECK(m.outputs[1].path == "sub/b.csv");
  io::write_manifest(dir.path / "m.json", m);
  const io::RunManifest back = io::read_manifest(dir.path / "m.json");
  CHECK(back.command == "landscape");
  CHECK(back.seeds == std::vector<std::uint64_t>{7, 9});
  CHECK(back.config["beta"] == "0:1:3");
  CHECK(back.version == m.version);
  CHECK(io::validate_manifest(dir.path / "m.json").empty());
  std::ofstream(dir.path / "a.csv") << "changed\n";
  fs::remove(dir.path / "sub" / "b.csv");
  CHECK(io::validate_manifest(dir.path / "m.json").size() == 2);
  std::ofstream(dir.path / "bad.json") << "{\"command\": 3}";
  CHECK(code_of([&] { io::read_manifest(dir.path / "bad.json"); }) == ErrorCode::ParseError);
}

TEST_CASE("optimum JSON") {
  Optimum o;
  o.angles = {0.1, -0.2};
  o.value = -0.3;
  const auto j = io::to_json(o);
  CHECK(j["beta"] == 0.1);
  CHECK(j["converged"] == false);
  CHECK(io::to_json(make_mixture_spec(2, {0.0, 1.0}))["sigmas"] == nlohmann::json::array({0.0, 1.0}));
}
