#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "lucid/bench.hpp"
#include "lucid/dataset.hpp"
#include "lucid/error.hpp"
#include "lucid/gridsearch.hpp"
#include "lucid/pipeline.hpp"
#include "lucid/synth.hpp"
#include "lucid/train.hpp"

using namespace lucid;

namespace {

// Writes n10-t10-{train,val}.lucds under `root`.
void write_grid_data(const std::filesystem::path& root) {
  SynthConfig cfg;
  cfg.ddos_flows = 40;
  cfg.benign_flows = 40;
  cfg.duration = 20;
  const auto trace = synthesize(cfg);
  std::vector<std::uint8_t> bytes = PcapWriter::global_header({});
  for (const auto& p : trace.packets) {
    const auto rec = PcapWriter::record({}, p.ts_ns, p.frame, static_cast<std::uint32_t>(p.frame.size()));
    bytes.insert(bytes.end(), rec.begin(), rec.end());
  }
  auto ds = preprocess_packets(parse_pcap(bytes).packets, &trace.labels, 10.0, 10).dataset;
  auto parts = split_dataset(ds.samples, {0.7, 0.3, 0.0}, 2);
  ds.samples = parts.train;
  write_dataset(grid_dataset_path(root, 10, 10.0, "train"), ds);
  ds.samples = parts.val;
  write_dataset(grid_dataset_path(root, 10, 10.0, "val"), ds);
}

TrainConfig quick() {
  TrainConfig c;
  c.batch_size = 32;
  c.patience = 3;
  c.max_epochs = 8;
  c.seed = 1;
  return c;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("grid file forms") {
  auto g = parse_grid(R"({"n":[10,100],"t":[10],"k":[8,64],"h":[3]})");
  CHECK(g.size() == 4);
  CHECK(g[0].m == 0);
  g = parse_grid(R"({"points":[{"n":100,"t":100,"k":64,"h":3,"m":98},{"n":10,"t":1,"k":4,"h":2,"m":"global"}]})");
  REQUIRE(g.size() == 2);
  CHECK(g[0].hyper() == Hyper{100, 11, 3, 64, 98});
  CHECK(g[1].hyper().m == 9);
  CHECK_THROWS_AS(parse_grid("{nope"), FormatError);
  CHECK_THROWS_AS(parse_grid(R"({"n":[10]})"), ConfigError);
}

TEST_CASE("default point n=100 t=100 k=64 h=3 m=98 is valid") {
  const GridPoint p{100, 100.0, 64, 3, 98};
  CHECK(p.hyper().param_count() == 2241);
  CHECK(grid_dataset_path("root", 100, 100.0, "train") == std::filesystem::path("root/n100-t100-train.lucds"));
}

TEST_CASE("single point equals a direct training run") {
  const auto root = test::temp_dir("grid-one");
  write_grid_data(root);
  const auto results = grid_search({GridPoint{10, 10.0, 8, 3, 0}}, root, quick());
  REQUIRE(results.size() == 1);
  CHECK(results[0].status == GridStatus::ok);

  const auto tr = read_dataset(grid_dataset_path(root, 10, 10.0, "train"));
  const auto va = read_dataset(grid_dataset_path(root, 10, 10.0, "val"));
  const auto direct = train<float>(Hyper::global_pool(10, 11, 3, 8), tr.samples, va.samples, quick());
  CHECK(results[0].best_epoch == direct.history.best_epoch);
  CHECK(results[0].val_f1 == direct.history.epochs[direct.history.best_epoch - 1].val_f1);
}

TEST_CASE("degenerate and missing points are reported, not fatal") {
  const auto root = test::temp_dir("grid-two");
  write_grid_data(root);
  std::vector<std::string> log;
  const auto results = grid_search(
      {GridPoint{10, 10.0, 0, 3, 0}, GridPoint{10, 10.0, 4, 3, 0}, GridPoint{10, 99.0, 4, 3, 0}},
      root, quick(), [&](const std::string& s) { log.push_back(s); });
  REQUIRE(results.size() == 3);
  CHECK(results[0].status == GridStatus::ok);
  CHECK(results[1].status == GridStatus::error);
  CHECK(results[1].point.k == 0);
  CHECK(results[2].status == GridStatus::skipped);

  std::ostringstream csv;
  write_grid_csv(csv, results);
  CHECK(csv.str().rfind(kGridCsvHeader, 0) == 0);
}

}  // TEST_SUITE

TEST_SUITE("bench") {

TEST_CASE("memory per sample") {
  static_assert(memory_per_sample(100, 11, 8) == 8800);
  static_assert(memory_per_sample(100, 11, 4) == 4400);
}

TEST_CASE("batched prediction equals per-sample forward") {
  const auto m = init_model<float>(Hyper{10, 11, 3, 8, 8}, 5);
  Rng rng(6);
  std::vector<float> batch(7 * 110);
  for (auto& v : batch) v = static_cast<float>(rng.uniform());
  std::vector<float> out(7);
  predict_batch(m, batch, 7, out);
  for (std::size_t i = 0; i < 7; ++i)
    CHECK(out[i] == doctest::Approx(forward(m, std::span<const float>(batch).subspan(i * 110, 110))).epsilon(1e-6));
}

TEST_CASE("benchmark rows satisfy the pps identity") {
  const auto m = init_model<float>(Hyper::global_pool(100, 11, 3, 64), 1);
  std::vector<FlowSample> samples(50);
  for (auto& s : samples) s.matrix.assign(1100, 0.25f);
  const std::vector<std::size_t> sizes = {64, 128, 8192};
  const auto rows = run_benchmark(m, samples, sizes);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.samples_per_sec > 0);
    CHECK(r.packets_per_sec == r.samples_per_sec * 100);
    CHECK(r.bytes_per_sample_f64 == 8800);
    CHECK(r.bytes_per_sample_f32 == 4400);
  }
}

}  // TEST_SUITE
