#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ambres/matrix_io.hpp"
#include "ambres/scenario_io.hpp"

using namespace ambres;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ambres_test_" + name);
}

}  // namespace

TEST(MatrixIo, RoundTripWithMetadata) {
  Matrix m(2, 2);
  m << 1.25, -0.5, -0.5, 3.0;
  std::stringstream ss;
  write_matrix(ss, m, {{"source", "unit"}});
  const MatrixFile f = read_matrix(ss);
  EXPECT_EQ(f.entries, m);
  EXPECT_EQ(f.metadata.at("source"), "unit");
}

TEST(MatrixIo, RejectsTruncatedInput) {
  std::stringstream ss("3\n1 0 0\n0 1 0\n");
  EXPECT_THROW(read_matrix(ss), Error);
}

TEST(MatrixIo, ModelFileRoundTrip) {
  Matrix m(3, 3);
  m << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const AmbiguityModel model(SpdForm(m), 6, 2, Separability::Intermediate, 1);
  const auto path = temp_path("model.txt");
  write_model_file(path.string(), model);
  const AmbiguityModel back = read_model_file(path.string());
  EXPECT_EQ(back.form().entries(), m);
  EXPECT_EQ(back.p(), 6);
  EXPECT_EQ(back.p0(), 2);
  EXPECT_EQ(back.n0_dim(), 1);
  EXPECT_EQ(back.separability(), Separability::Intermediate);
  std::filesystem::remove(path);
}

TEST(ScenarioIo, JsonRoundTrip) {
  const std::string text = R"({
    "n_epochs": 3,
    "measurement_set": "L1+L2",
    "sigma_delta_iono": 0.004,
    "coordinates_prior": "static",
    "windup_informed": true,
    "interfrequency_bias_prior": {"precision": [[1,0,0,0],[0,2,0,0],[0,0,3,0],[0,0,0,4]]},
    "satellites": {"synthetic": {"n_sat": 5, "seed": 2}}
  })";
  const gnss::Scenario s = gnss::parse_scenario(text);
  EXPECT_EQ(s.n_epochs, 3);
  EXPECT_EQ(s.measurement_set, gnss::MeasurementSet::L1L2);
  EXPECT_EQ(s.coordinates_prior, gnss::CoordinatesPrior::Static);
  ASSERT_TRUE(s.bias_precision.has_value());
  EXPECT_EQ((*s.bias_precision)(3, 3), 4.0);
  EXPECT_EQ(s.satellites.size(), 3u);
  const gnss::Scenario back = gnss::parse_scenario(gnss::scenario_to_json(s));
  EXPECT_EQ(back.sigma_delta_iono, s.sigma_delta_iono);
  EXPECT_EQ(back.satellites.size(), s.satellites.size());
  for (std::size_t i = 0; i < s.satellites.size(); ++i)
    for (std::size_t k = 0; k < s.satellites[i].size(); ++k) EXPECT_EQ(back.satellites[i][k], s.satellites[i][k]);
  EXPECT_EQ(*back.bias_precision, *s.bias_precision);
}

TEST(ScenarioIo, LosCsv) {
  const auto path = temp_path("los.csv");
  {
    std::ofstream out(path);
    out << "epoch,satellite,ex,ey,ez\n";
    out << "0,1,1,0,0\n0,2,0,1,0\n1,1,1,0,0\n1,2,0,0,1\n";
  }
  const auto g = gnss::read_los_csv(path.string());
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[1][1], Eigen::Vector3d(0, 0, 1));
  const std::string text = R"({"n_epochs": 2, "measurement_set": "L1", "satellites": {"los_csv": ")" +
                           path.filename().string() + R"("}})";
  const gnss::Scenario s = gnss::parse_scenario(text, path.parent_path().string());
  EXPECT_EQ(s.n_satellites(), 2);
  std::filesystem::remove(path);
}

TEST(ScenarioIo, ValidationAndParseErrors) {
  try {
    gnss::parse_scenario("{not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
  EXPECT_THROW(gnss::parse_scenario(R"({"n_epochs": 2})"), Error);
  EXPECT_THROW(gnss::parse_scenario(R"({"coordinates_prior": "orbiting", "satellites": {"synthetic": {}}})"), Error);
  EXPECT_THROW(gnss::parse_scenario(R"({"ar1_phase": 1.5, "satellites": {"synthetic": {"n_sat": 5}}})"), Error);
}
