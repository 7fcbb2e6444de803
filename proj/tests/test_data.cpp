#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fubif/data.hpp"

using namespace fubif;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("xaxis generator shape and construction") {
  const Dataset ds = generate_xaxis(4);
  REQUIRE(ds.size() == 1100);
  REQUIRE(ds.dimension() == 6);
  REQUIRE(ds.has_labels());
  int positives = 0;
  for (int l : *ds.labels) positives += l;
  CHECK(positives == 100);
  // Contamination 100/1100.
  CHECK(std::abs(positives / 1100.0 - 0.0909) < 1e-3);

  const double sigma = 0.05;
  std::array<double, 6> anomaly_mean{};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.points.row(i);
    if ((*ds.labels)[i] == 0) {
      CHECK(norm(row) <= 1.0 + 3 * sigma);
    } else {
      CHECK(std::abs(row[0]) > 1.5);  // displaced along the first feature
      for (int j = 0; j < 6; ++j) anomaly_mean[j] += row[j];
    }
  }
  for (int j = 1; j < 6; ++j) CHECK(std::abs(anomaly_mean[j] / 100.0) < 0.05);
}

TEST_CASE("bisect3d generator displaces the first three features") {
  const Dataset ds = generate_bisect3d(4);
  REQUIRE(ds.size() == 1100);
  REQUIRE(ds.dimension() == 6);
  int positives = 0;
  std::array<double, 6> anomaly_mean{};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if ((*ds.labels)[i] != 1) continue;
    ++positives;
    const auto row = ds.points.row(i);
    for (int j = 0; j < 6; ++j) anomaly_mean[j] += row[j];
    // Common displacement: the first three coordinates differ by noise only.
    CHECK(std::abs(row[0] - row[1]) <= 6 * 0.05);
    CHECK(std::abs(row[0] - row[2]) <= 6 * 0.05);
  }
  CHECK(positives == 100);
  for (int j = 3; j < 6; ++j) CHECK(std::abs(anomaly_mean[j] / 100.0) < 0.05);
}

TEST_CASE("generators are seed-deterministic") {
  const Dataset a = generate_xaxis(123);
  const Dataset b = generate_xaxis(123);
  CHECK(a.points == b.points);
  CHECK(*a.labels == *b.labels);
  const Dataset c = generate_xaxis(124);
  CHECK_FALSE(a.points == c.points);
}

TEST_CASE("load_csv parses features and labels") {
  const std::string path = temp_path("fubif_test_small.csv");
  write_file(path, "a,b\n1,2\n3,4\n5,6\n");
  const Dataset plain = load_csv(path, std::nullopt);
  CHECK(plain.size() == 3);
  CHECK(plain.dimension() == 2);
  CHECK_FALSE(plain.has_labels());
  CHECK(plain.points(1, 1) == 4.0);

  const std::string labeled = temp_path("fubif_test_labeled.csv");
  write_file(labeled, "f0,f1,label\n0.5,1.5,0\n2.5,3.5,1\n");
  const Dataset ds = load_csv(labeled, std::string("label"));
  CHECK(ds.dimension() == 2);
  REQUIRE(ds.has_labels());
  CHECK(*ds.labels == std::vector<int>{0, 1});
}

TEST_CASE("load_csv rejects bad input with coordinates") {
  const std::string nan_path = temp_path("fubif_test_nan.csv");
  write_file(nan_path, "a,b\n1,2\n3,NaN\n");
  CHECK_THROWS_WITH(load_csv(nan_path, std::nullopt),
                    Catch::Matchers::ContainsSubstring("line 3") &&
                        Catch::Matchers::ContainsSubstring("column 2"));

  const std::string ragged = temp_path("fubif_test_ragged.csv");
  write_file(ragged, "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(load_csv(ragged, std::nullopt), DataError);

  const std::string text = temp_path("fubif_test_text.csv");
  write_file(text, "a,b\n1,hello\n");
  CHECK_THROWS_AS(load_csv(text, std::nullopt), DataError);

  write_file(text, "a,b\n1,2\n");
  CHECK_THROWS_AS(load_csv(text, std::string("label")), DataError);
  CHECK_THROWS_AS(load_csv(temp_path("fubif_no_such_file.csv"), std::nullopt),
                  DataError);

  const std::string badlabel = temp_path("fubif_test_badlabel.csv");
  write_file(badlabel, "a,label\n1,2\n");
  CHECK_THROWS_AS(load_csv(badlabel, std::string("label")), DataError);
}

TEST_CASE("save then load is the identity") {
  const Dataset ds = generate_bisect3d(9);
  const std::string path = temp_path("fubif_test_roundtrip.csv");
  save_csv(ds, path);
  const Dataset back = load_csv(path, std::string("label"));
  CHECK(back.points == ds.points);
  CHECK(*back.labels == *ds.labels);

  Dataset unlabeled = ds;
  unlabeled.labels.reset();
  save_csv(unlabeled, path);
  const Dataset back2 = load_csv(path, std::nullopt);
  CHECK(back2.points == ds.points);
  CHECK_FALSE(back2.has_labels());
}

TEST_CASE("scenario_split") {
  const Dataset ds = generate_xaxis(2);
  const auto [train1, test1] = scenario_split(ds, Scenario::kOne, 0);
  CHECK(train1.size() == 1100);
  CHECK(test1.size() == 1100);

  const auto [train2, test2] = scenario_split(ds, Scenario::kTwo, 0);
  CHECK(train2.size() == 1000);  // inliers only
  CHECK(test2.size() == 1100);
  for (int l : *train2.labels) CHECK(l == 0);

  Dataset clean = ds;
  clean.labels = std::vector<int>(ds.size(), 0);
  const auto [train3, test3] = scenario_split(clean, Scenario::kTwo, 0);
  CHECK(train3.size() == 1100);  // nothing to remove

  Dataset unlabeled = ds;
  unlabeled.labels.reset();
  CHECK_THROWS_AS(scenario_split(unlabeled, Scenario::kTwo, 0), DataError);
}

TEST_CASE("translate shifts points and preserves labels") {
  const Dataset ds = generate_xaxis(5);
  const std::vector<double> zero(6, 0.0);
  const Dataset same = translate(ds, zero);
  CHECK(same.points == ds.points);

  std::vector<double> offset{-10, 0, 0, 0, 0, 0};
  const Dataset once = translate(translate(ds, offset), offset);
  std::vector<double> both{-20, 0, 0, 0, 0, 0};
  const Dataset twice = translate(ds, both);
  for (std::size_t i = 0; i < once.points.values().size(); ++i)
    CHECK(once.points.values()[i] ==
          Catch::Approx(twice.points.values()[i]).margin(1e-12));
  CHECK(*once.labels == *ds.labels);

  const auto before = compute_range(ds.points);
  const auto after = compute_range(twice.points);
  CHECK(after.lower[0] == Catch::Approx(before.lower[0] - 20.0).margin(1e-12));
  CHECK(after.upper[0] == Catch::Approx(before.upper[0] - 20.0).margin(1e-12));

  const std::vector<double> bad{1.0, 2.0};
  CHECK_THROWS_AS(translate(ds, bad), DimensionError);
}

TEST_CASE("scenario names parse") {
  CHECK(parse_scenario("I") == Scenario::kOne);
  CHECK(parse_scenario("II") == Scenario::kTwo);
  CHECK(parse_scenario("2") == Scenario::kTwo);
  CHECK_THROWS_AS(parse_scenario("III"), ConfigError);
}
