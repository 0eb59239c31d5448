#include <doctest.h>

#include <filesystem>

#include "ofter/datagen.hpp"
#include "ofter/error.hpp"
#include "ofter/snapshot.hpp"
#include "oracles.hpp"

using namespace ofter;

TEST_CASE("config JSON round trip") {
  pipeline::OfterConfig c;
  c.use_dr = false;
  c.delta = 0.8;
  c.lookback = 321;
  c.k_set = {2, 7};
  c.loss_kind = select::LossKind::NegPnl;
  c.combine = select::CombineMode::LossWeighted;
  c.embedding_update = pipeline::EmbeddingUpdate::Refit;
  c.seed = 99;
  const auto back = snapshot::config_from_json(snapshot::config_to_json(c));
  CHECK(back.use_dr == c.use_dr);
  CHECK(back.delta == c.delta);
  CHECK(back.lookback == c.lookback);
  CHECK(back.k_set == c.k_set);
  CHECK(back.s_set == c.s_set);
  CHECK(back.loss_kind == c.loss_kind);
  CHECK(back.combine == c.combine);
  CHECK(back.embedding_update == c.embedding_update);
  CHECK(back.seed == c.seed);

  const auto partial = snapshot::config_from_json(R"({"delta": 0.75})");
  CHECK(partial.delta == 0.75);
  CHECK(partial.lookback == pipeline::OfterConfig{}.lookback);
  CHECK_THROWS_AS(snapshot::config_from_json(R"({"lookbak": 10})"), Error);
  CHECK_THROWS_AS(snapshot::config_from_json("not json"), Error);
}

TEST_CASE("embedding JSON round trip") {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd rows = oracle::random_matrix(60, 6, gen);
  const auto e = embed::fit_pca(rows, Eigen::VectorXd::Ones(6), 0.9);
  const auto back = snapshot::embedding_from_json(snapshot::embedding_to_json(e));
  CHECK(back.p == e.p);
  CHECK(back.t == e.t);
  CHECK(back.spectrum.values == e.spectrum.values);
  CHECK(back.spectrum.vectors == e.spectrum.vectors);
  CHECK(back.mean == e.mean);
}

TEST_CASE("state files carry a schema version") {
  datagen::SyntheticSpec spec;
  spec.model = datagen::Model::M1;
  spec.t_len = 600;
  spec.seed = 2;
  const auto a = pipeline::align_one_step(datagen::generate(spec), "y4", 3);
  pipeline::OfterConfig c;
  c.lookback = 200;
  auto state = pipeline::initialize(a.X, a.y, c, a.columns);
  const auto path = (std::filesystem::temp_directory_path() / "ofter_snapshot_test.json").string();
  snapshot::save(state, path);
  const auto loaded = snapshot::load(path);
  CHECK(loaded.t == state.t);
  CHECK(loaded.history == state.history);
  std::filesystem::remove(path);

  auto text = snapshot::state_to_json(state);
  const auto pos = text.find("\"schema_version\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 18, "\"schema_version\":7");
  CHECK_THROWS_AS(snapshot::state_from_json(text), Error);
  CHECK_THROWS_AS(snapshot::load("/nonexistent/ofter.json"), Error);
}
