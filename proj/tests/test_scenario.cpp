#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ggsp/pvalue_model.hpp"
#include "ggsp/rng.hpp"
#include "ggsp/scenario.hpp"
#include "support.hpp"

using namespace ggsp;

TEST_CASE("grid_times: endpoints, count, spacing") {
  const auto two = grid_times(1);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == -pi);
  CHECK(two[1] == pi);

  const auto ten = grid_times(9);
  REQUIRE(ten.size() == 10);
  CHECK(ten.front() == -pi);
  CHECK(ten.back() == pi);
  const double spacing = 2.0 * pi / 9.0;
  for (std::size_t j = 1; j < ten.size(); ++j)
    CHECK(ten[j] - ten[j - 1] == doctest::Approx(spacing).epsilon(1e-12));

  CHECK_THROWS_AS(grid_times(0), DegenerateInput);
}

TEST_CASE("noise_floor_pvalue: survival at zero and the 1.96-sigma point") {
  CHECK(noise_floor_pvalue(0.0, 1.3) == 1.0);
  CHECK(noise_floor_pvalue(1.96 * 0.7, 0.7) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(noise_floor_pvalue(-1.96 * 0.7, 0.7) == doctest::Approx(0.05).epsilon(2e-3));
}

TEST_CASE("gp_sample: single-point variance") {
  Rng rng(301);
  const double variance = 2.5;
  double sum = 0.0, sum_sq = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd v = gp_sample({{3.0, 4.0}}, variance, 5.0, rng);
    sum += v(0);
    sum_sq += v(0) * v(0);
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  CHECK(std::abs(var - variance) <= 0.05 * variance);
}

TEST_CASE("gp_sample: near-coincident points move together") {
  Rng rng(302);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd v = gp_sample({{0.0, 0.0}, {1e-9, 0.0}}, 4.0, 10.0, rng);
    CHECK(std::abs(v(0) - v(1)) <= 1e-3);
  }
}

TEST_CASE("gp_sample: tiny length scale decorrelates distinct points") {
  Rng rng(303);
  double cross = 0.0, var0 = 0.0, var1 = 0.0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd v = gp_sample({{0.0, 0.0}, {5.0, 0.0}}, 1.0, 1e-3, rng);
    cross += v(0) * v(1);
    var0 += v(0) * v(0);
    var1 += v(1) * v(1);
  }
  const double corr = cross / std::sqrt(var0 * var1);
  CHECK(std::abs(corr) <= 0.05);
}

TEST_CASE("model-matched generator: marginal and conditional laws at gamma = 0") {
  ModelMatchedConfig cfg;
  cfg.n_sensors = 50;
  cfg.knn_k = 5;
  cfg.K1 = 1;
  cfg.K2 = 1;
  cfg.Xi_true = Eigen::MatrixXd::Zero(1, 1);
  cfg.sampling.kind = SamplingDesign::Kind::iid_uniform;
  cfg.sampling.iid_count = 10000;

  int marginal_passes = 0;
  int null_cond_passes = 0;
  const int n_seeds = 5;
  for (int seed = 0; seed < n_seeds; ++seed) {
    cfg.seed = 400 + static_cast<std::uint64_t>(seed);
    const GeneratedData data = gen_model_matched(cfg);

    // p ~ Beta(1/2, 1): CDF p^(1/2)
    const double d_marginal = oracle::ks_statistic(
        data.samples.pvalue, [](double p) { return std::sqrt(p); });
    if (d_marginal < oracle::ks_critical(0.01, data.samples.size())) ++marginal_passes;

    // p | theta=0 ~ Unif[0,1]
    std::vector<double> null_p;
    for (std::size_t m = 0; m < data.samples.size(); ++m)
      if (data.samples.truth[m] == 0) null_p.push_back(data.samples.pvalue[m]);
    const double d_null = oracle::ks_statistic(null_p, [](double p) { return p; });
    if (d_null < oracle::ks_critical(0.01, null_p.size())) ++null_cond_passes;
  }
  CHECK(marginal_passes >= n_seeds - 1);
  CHECK(null_cond_passes >= n_seeds - 1);
}

TEST_CASE("model-matched generator: null fraction tracks mean sigmoid(gamma)") {
  ModelMatchedConfig cfg;
  cfg.n_sensors = 40;
  cfg.knn_k = 5;
  cfg.K1 = 2;
  cfg.K2 = 3;
  cfg.Xi_true.resize(2, 3);
  cfg.Xi_true << 6.0, 2.0, -1.5, 3.0, -2.0, 1.0;
  cfg.sampling.kind = SamplingDesign::Kind::iid_uniform;
  cfg.sampling.iid_count = 20000;
  cfg.seed = 99;
  const GeneratedData data = gen_model_matched(cfg);

  double expected_null = 0.0;
  for (Eigen::Index m = 0; m < data.gamma_true.size(); ++m)
    expected_null += sigmoid(data.gamma_true(m));
  expected_null /= static_cast<double>(data.gamma_true.size());

  const double se = std::sqrt(expected_null * (1.0 - expected_null) /
                              static_cast<double>(data.samples.size()));
  CHECK(std::abs(data.measured_null_proportion - expected_null) <= 3.0 * se);
}

TEST_CASE("model-matched generator: grid design enumerates V x times") {
  ModelMatchedConfig cfg;
  cfg.n_sensors = 12;
  cfg.knn_k = 3;
  cfg.K1 = 1;
  cfg.K2 = 1;
  cfg.sampling.kind = SamplingDesign::Kind::grid;
  cfg.sampling.grid_T = 4;
  cfg.seed = 5;
  const GeneratedData data = gen_model_matched(cfg);
  CHECK(data.samples.size() == 12 * 5);
  // instance-major ordering: sample m sits at instance m / N
  const auto times = grid_times(4);
  for (std::size_t m = 0; m < data.samples.size(); ++m) {
    CHECK(data.samples.vertex[m] == static_cast<int>(m % 12));
    CHECK(data.samples.time[m] == times[m / 12]);
  }
}

TEST_CASE("transmitter generator: shapes, determinism, reported null fraction") {
  TransmitterConfig cfg;
  cfg.grid_side = 20;
  cfg.n_sensors = 60;
  cfg.knn_k = 5;
  cfg.T = 4;
  cfg.x0 = 3e4;
  cfg.seed = 7;

  const GeneratedData a = gen_transmitter_scenario(cfg);
  const GeneratedData b = gen_transmitter_scenario(cfg);
  CHECK(a.samples.size() == 60 * 5);
  CHECK(a.samples.pvalue == b.samples.pvalue);
  CHECK(a.samples.truth == b.samples.truth);
  CHECK(a.transmitter_paths.size() == 2);
  for (const auto& path : a.transmitter_paths) {
    CHECK(path.size() == 5);
    for (const auto& pos : path) {
      CHECK(pos[0] >= 0.0);
      CHECK(pos[0] <= 19.0);
      CHECK(pos[1] >= 0.0);
      CHECK(pos[1] <= 19.0);
    }
  }

  int nulls = 0;
  for (std::uint8_t th : a.samples.truth)
    if (th == 0) ++nulls;
  CHECK(a.measured_null_proportion ==
        doctest::Approx(static_cast<double>(nulls) / 300.0).epsilon(1e-12));

  TransmitterConfig other = cfg;
  other.seed = 8;
  const GeneratedData c = gen_transmitter_scenario(other);
  CHECK(a.samples.pvalue != c.samples.pvalue);
}

TEST_CASE("transmitter generator: x0 = 0 gives uniform p-values and all nulls") {
  TransmitterConfig cfg;
  cfg.grid_side = 25;
  cfg.n_sensors = 100;
  cfg.knn_k = 5;
  cfg.T = 29;  // 3000 samples
  cfg.x0 = 0.0;
  int passes = 0;
  const int n_seeds = 5;
  for (int seed = 0; seed < n_seeds; ++seed) {
    cfg.seed = 500 + static_cast<std::uint64_t>(seed);
    const GeneratedData data = gen_transmitter_scenario(cfg);
    CHECK(data.measured_null_proportion == 1.0);
    const double dist =
        oracle::ks_statistic(data.samples.pvalue, [](double p) { return p; });
    if (dist < oracle::ks_critical(0.01, data.samples.size())) ++passes;
  }
  CHECK(passes >= n_seeds - 1);
}

TEST_CASE("transmitter generator: alternative p-values stochastically dominate nulls") {
  TransmitterConfig cfg;
  cfg.grid_side = 25;
  cfg.n_sensors = 100;
  cfg.knn_k = 5;
  cfg.T = 29;
  cfg.x0 = 1e4;
  cfg.seed = 11;
  const GeneratedData data = gen_transmitter_scenario(cfg);

  std::vector<double> null_p, alt_p;
  for (std::size_t m = 0; m < data.samples.size(); ++m)
    (data.samples.truth[m] == 0 ? null_p : alt_p).push_back(data.samples.pvalue[m]);
  REQUIRE(null_p.size() > 100);
  REQUIRE(alt_p.size() > 100);
  std::sort(null_p.begin(), null_p.end());
  std::sort(alt_p.begin(), alt_p.end());
  const auto ecdf = [](const std::vector<double>& sorted, double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                               sorted.begin()) /
           static_cast<double>(sorted.size());
  };
  for (int i = 1; i < 100; ++i) {
    const double x = static_cast<double>(i) / 100.0;
    CHECK(ecdf(alt_p, x) >= ecdf(null_p, x) - 0.05);
  }
}

TEST_CASE("sample export: csv columns and metadata json") {
  TransmitterConfig cfg;
  cfg.grid_side = 10;
  cfg.n_sensors = 15;
  cfg.knn_k = 3;
  cfg.T = 2;
  cfg.seed = 3;
  const GeneratedData data = gen_transmitter_scenario(cfg);

  std::ostringstream csv;
  write_samples_csv(data, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("vertex,time,p,theta\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 15 * 3);

  const auto meta = generated_metadata_json(data, nlohmann::json{{"note", "cfg"}});
  CHECK(meta.at("measured_null_proportion").get<double>() == data.measured_null_proportion);
  REQUIRE(meta.at("transmitter_paths").size() == 2);
  CHECK(meta.at("transmitter_paths").at(0).size() == 3);
  CHECK(meta.at("config").at("note") == "cfg");
}

TEST_CASE("generators validate their configs") {
  ModelMatchedConfig mm;
  mm.n_sensors = 10;
  mm.K1 = 11;
  CHECK_THROWS_AS(gen_model_matched(mm), ConfigError);

  TransmitterConfig tx;
  tx.grid_side = 5;
  tx.n_sensors = 26;
  CHECK_THROWS_AS(gen_transmitter_scenario(tx), ConfigError);
}
