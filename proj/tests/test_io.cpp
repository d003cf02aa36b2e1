#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "heatlab/io.hpp"
#include "heatlab/scenario.hpp"
#include "heatlab/semigroup.hpp"
#include "heatlab/solutions.hpp"
#include "heatlab/space.hpp"
#include "helpers.hpp"

using namespace heatlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("heatlab_io_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_double round-trips bitwise") {
  // std::stod rejects subnormals (ERANGE), so parse with from_chars instead.
  for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 6.02e23, 5e-324, 1e308,
                   -0.3089414429945578, 3.141592653589793}) {
    const std::string s = format_double(v);
    double back = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(res.ec == std::errc{});
    CHECK(back == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("space json round-trip") {
  DirichletSpace grid = build_grid_2d(5, 4, 0.5, {{{2, 1}}}).space;
  DirichletSpace back = space_from_json(space_to_json(grid));
  CHECK(back.content_hash() == grid.content_hash());

  DirichletSpace rnd = random_connected_space(7, 23, 0.3, 0.4);
  fs::path dir = fresh_dir("space");
  save_space(rnd, dir / "s.json");
  CHECK(load_space(dir / "s.json").content_hash() == rnd.content_hash());

  auto doc = nlohmann::json::parse(space_to_json(rnd));
  CHECK(doc["schema"] == "heatlab-space/1");
  CHECK(doc["vertices"] == 23);
}

TEST_CASE("space json rejects malformed documents") {
  expect_error(Errc::invalid_input, [] { space_from_json("not json at all"); });
  expect_error(Errc::invalid_input, [] {
    space_from_json(R"({"schema":"heatlab-space/2","vertices":1,"mu":[1],"edges":[],"killing":[0]})");
  });
  expect_error(Errc::invalid_input, [] {
    space_from_json(R"({"schema":"heatlab-space/1","vertices":2,"mu":[1,1]})");
  });
  // Structurally fine JSON whose content is a bad space surfaces as geometry.
  expect_error(Errc::invalid_geometry, [] {
    space_from_json(
        R"({"schema":"heatlab-space/1","vertices":2,"mu":[1,1],"edges":[],"killing":[0,0]})");
  });
}

TEST_CASE("builder expressions") {
  CHECK(parse_space_arg("cycle(6)").content_hash() == build_cycle(6).content_hash());
  CHECK(parse_space_arg("cycle(5,2.0,0.25)").content_hash() ==
        build_cycle(5, 2.0, 0.25).content_hash());
  CHECK(parse_space_arg("path(40,0.25,absorbing,reflecting)").content_hash() ==
        build_path(40, 0.25, Endpoint::absorbing, Endpoint::reflecting).content_hash());
  CHECK(parse_space_arg("grid(12,12,0.25)").content_hash() ==
        build_grid_2d(12, 12, 0.25).space.content_hash());

  DirichletSpace rnd = random_connected_space(3, 9);
  fs::path dir = fresh_dir("arg");
  save_space(rnd, dir / "rnd.json");
  CHECK(parse_space_arg((dir / "rnd.json").string()).content_hash() ==
        rnd.content_hash());

  expect_error(Errc::invalid_input, [] { parse_space_arg("torus(4)"); });
  expect_error(Errc::invalid_input, [] { parse_space_arg("cycle()"); });
  expect_error(Errc::invalid_input, [] { parse_space_arg("/no/such/file.json"); });
}

TEST_CASE("solution round-trip with sidecar") {
  DirichletSpace c = build_cycle(6);
  HeatEngine engine(c);
  SpaceTimeFunction u = sample_semigroup_measure(
      engine, {0.1, 0.2, 0.35, 0.6, 1.0}, AtomicMeasure::dirac(6, 2));
  u.domain = {1, 2, 3};

  fs::path dir = fresh_dir("solution");
  save_solution(c, u, dir / "u.csv");
  CHECK(fs::exists(dir / "u.csv.json"));

  SpaceTimeFunction back = load_solution(c, dir / "u.csv");
  CHECK(back.times == u.times);
  CHECK(back.values.rows() == u.values.rows());
  CHECK((back.values - u.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.domain == u.domain);
  CHECK(back.nonnegative == u.nonnegative);

  const std::string csv = read_text_file(dir / "u.csv");
  CHECK(csv.rfind("t,vertex,value\n", 0) == 0);

  // The sidecar pins the space by hash.
  expect_error(Errc::invalid_input,
               [&] { load_solution(build_cycle(7), dir / "u.csv"); });

  // Without a sidecar the claim defaults to the full space and the
  // nonnegativity flag is inferred from the values themselves.
  fs::remove(dir / "u.csv.json");
  SpaceTimeFunction bare = load_solution(c, dir / "u.csv");
  CHECK(bare.domain.empty());
  CHECK(bare.claims_full());
  CHECK(bare.nonnegative);

  SpaceTimeFunction signed_u = u;
  signed_u.domain.clear();
  signed_u.nonnegative = false;
  signed_u.values(0, 0) = -0.25;
  save_solution(c, signed_u, dir / "v.csv");
  fs::remove(dir / "v.csv.json");
  CHECK(load_solution(c, dir / "v.csv").nonnegative == false);

  expect_error(Errc::invalid_input,
               [&] { load_solution(c, dir / "missing.csv"); });
}

TEST_CASE("measure csv skips zero atoms") {
  Vector m(4);
  m << 0.5, 0.0, 0.0, 1.25;
  fs::path dir = fresh_dir("measure");
  save_measure(AtomicMeasure(m), dir / "nu.csv");
  CHECK(read_text_file(dir / "nu.csv") == "vertex,mass\n0,0.5\n3,1.25\n");
}

TEST_CASE("kernel dump covers all pairs") {
  DirichletSpace c = build_cycle(3);
  HeatEngine engine(c);
  fs::path dir = fresh_dir("kernel");
  dump_kernel(engine, {0.5, 1.0}, dir / "k.csv");

  const std::string text = read_text_file(dir / "k.csv");
  CHECK(text.rfind("t,x,y,p\n", 0) == 0);
  int lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == 1 + 2 * 9);

  const Matrix K = engine.kernel_matrix(1.0);
  CHECK(text.find("1,0,0," + format_double(K(0, 0))) != std::string::npos);
  CHECK(text.find("0.5,2,1,") != std::string::npos);
  const double on = (1.0 + 2.0 * std::exp(-3.0)) / 3.0;
  CHECK(K(0, 0) == doctest::Approx(on).epsilon(1e-13));
}

TEST_CASE("text file helpers") {
  fs::path dir = fresh_dir("text");
  write_text_file(dir / "a.txt", "alpha\nbeta");
  CHECK(read_text_file(dir / "a.txt") == "alpha\nbeta");
  expect_error(Errc::invalid_input, [&] { read_text_file(dir / "b.txt"); });
}
