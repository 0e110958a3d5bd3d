// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// gating criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <string>

#include <fmt/format.h>

#include "helpers.hpp"
#include "lucid/activation.hpp"
#include "lucid/bench.hpp"
#include "lucid/byte_io.hpp"
#include "lucid/checkpoint.hpp"
#include "lucid/dataset.hpp"
#include "lucid/metrics.hpp"
#include "lucid/pipeline.hpp"
#include "lucid/synth.hpp"
#include "lucid/train.hpp"
#include "oracles.hpp"

using namespace lucid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(const char* id, const char* title, const std::function<Outcome()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out = {false, fmt::format("exception: {}", e.what())};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  fmt::print("[{}] {} {}: {} ({:.2f}s)\n", out.pass ? "PASS" : "FAIL", id, title, out.detail, secs);
  std::fflush(stdout);
}

Outcome param_count() {
  const auto m = init_model<float>(Hyper{100, 11, 3, 64, 98}, 1);
  const Hyper& hp = m.hyper();
  const bool ok = m.size() == 2241 && hp.conv_param_count() == 2176 && hp.dense_param_count() == 65;
  return {ok, fmt::format("{} = {} + {}", m.size(), hp.conv_param_count(), hp.dense_param_count())};
}

Outcome forward_oracle() {
  Rng rng(20);
  const Hyper hp{20, 11, 3, 8, 6};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto m = oracle::random_model(hp, rng);
    const auto x = oracle::random_input(hp, rng);
    worst = std::max(worst, std::abs(forward(m, std::span<const double>(x)) - oracle::naive_forward(m, x)));
  }
  return {worst < 1e-9, fmt::format("100 pairs, max |diff| = {:.3g}", worst)};
}

Outcome gradient_check() {
  Rng rng(30);
  const Hyper hp{10, 11, 3, 4, 8};
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_model(hp, rng);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int b = 0; b < 4; ++b) {
      xs.push_back(oracle::random_input(hp, rng));
      ys.push_back(rng.chance(0.5) ? 1.0 : 0.0);
    }
    std::vector<Example<double>> batch;
    for (std::size_t b = 0; b < xs.size(); ++b) batch.push_back({xs[b], ys[b]});
    ModelParams<double> grad(hp);
    std::vector<ForwardCache<double>> caches;
    loss_and_gradient(m, std::span<const Example<double>>(batch), grad, caches);
    const auto num = oracle::numeric_gradient(m, xs, ys, 1e-5);
    for (std::size_t i = 0; i < num.size(); ++i)
      worst = std::max(worst, oracle::relative_error(grad.values()[i], num[i]));
  }
  return {worst < 1e-4, fmt::format("20 models, max relative error = {:.3g}", worst)};
}

Outcome preprocessing_properties() {
  Rng rng(40);
  std::size_t violations = 0, cases = 0;
  auto violate = [&](bool bad) { violations += bad ? 1 : 0; };
  static constexpr double kWindows[] = {0.1, 0.5, 1.0, 2.0, 5.0};

  for (; cases < 1000; ++cases) {
    const auto count = static_cast<std::size_t>(rng.between(20, 200));
    auto pkts = test::random_stream(rng, count, rng.uniform(0.5, 20.0));
    const double t = kWindows[rng.index(5)];
    const auto n = static_cast<std::size_t>(rng.between(1, 12));
    const auto spec = NormalizationSpec::standard(t);
    const auto t_ns = static_cast<std::int64_t>(std::llround(t * 1e9));

    const auto raw = build_samples(pkts, t, n);
    const auto samples = normalize_and_pad(raw, spec, n);

    // window advance and packet cap against the reference assignment
    const auto ref = oracle::reference_windows(pkts, t, n);
    violate(ref.size() != raw.size());
    for (const auto& [id, r] : raw) {
      const auto it = ref.find(id);
      violate(it == ref.end() || it->second != r.packets.size());
      violate(r.packets.size() > n);
      violate(r.first_ts_ns < r.window_start_ns || r.first_ts_ns > r.window_start_ns + t_ns);
    }
    for (const auto& s : samples) {
      violate(s.pkt_count > n || s.rows() != n);
      for (std::size_t row = 0; row < n; ++row) {
        const auto values = s.row(row);
        const bool all_zero = std::all_of(values.begin(), values.end(), [](float v) { return v == 0.0f; });
        violate(row >= s.pkt_count ? !all_zero : s.at(row, Feature::pkt_len) == 0.0f);
      }
      for (float v : s.matrix) violate(!(v >= 0.0f && v <= 1.0f));
    }

    // reversing every packet's direction gives the same sample map
    auto flipped = pkts;
    for (auto& p : flipped) {
      std::swap(p.src_ip, p.dst_ip);
      std::swap(p.src_port, p.dst_port);
    }
    const auto mirrored = normalize_and_pad(build_samples(flipped, t, n), spec, n);
    violate(mirrored.size() != samples.size());
    for (std::size_t i = 0; i < std::min(mirrored.size(), samples.size()); ++i) {
      violate(mirrored[i].key != samples[i].key || mirrored[i].matrix != samples[i].matrix);
    }

    // labels are constant per flow
    LabelSet labels;
    for (const auto& s : samples) {
      if (!labels.contains(s.key)) labels.emplace(s.key, rng.chance(0.5) ? Label::ddos : Label::benign);
    }
    auto labelled = samples;
    violate(apply_labels(labelled, labels) != 0);
    for (const auto& s : labelled) violate(s.label != labels.at(s.key));

    // every flow lands in exactly one split
    if (labels.size() >= 3) {
      const double a = rng.uniform(0.2, 0.8);
      const double b = rng.uniform(0.0, 1.0 - a);
      const auto parts = split_dataset(labelled, {a, b, 1.0 - a - b}, rng.next());
      std::map<FlowKey, std::set<int>> where;
      int idx = 0;
      for (const auto* part : {&parts.train, &parts.val, &parts.test}) {
        for (const auto& s : *part) where[s.key].insert(idx);
        ++idx;
      }
      violate(parts.train.size() + parts.val.size() + parts.test.size() != labelled.size());
      violate(where.size() != labels.size());
      for (const auto& [k, set] : where) violate(set.size() != 1);
    }
  }
  return {violations == 0, fmt::format("{} randomized cases, {} violations", cases, violations)};
}

// synth -> preprocess -> balance/split -> train -> evaluate, all files in dir
struct PipelineRun {
  fs::path dir;
  std::vector<FlowSample> train, val, test;
  MetricsReport report;
  TrainHistory history;
};

PipelineRun run_pipeline(const fs::path& dir) {
  PipelineRun out;
  out.dir = dir;
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.ddos_flows = 1000;
  cfg.benign_flows = 1000;
  const auto files = generate(cfg, dir / "synth");

  PreprocessOptions opt;
  opt.pcaps = {files.pcap};
  opt.labels = files.labels;
  opt.t = 10.0;
  opt.n = 10;
  auto report = preprocess(opt);
  Dataset ds = std::move(report.dataset);
  const auto balanced = balance(ds.samples, cfg.seed);
  auto parts = split_dataset(balanced, {0.81, 0.09, 0.10}, cfg.seed);
  out.train = parts.train;
  out.val = parts.val;
  out.test = parts.test;
  for (const auto& [name, part] : {std::pair{"train", &parts.train}, {"val", &parts.val}, {"test", &parts.test}}) {
    ds.samples = *part;
    write_dataset(dir / fmt::format("ds-{}.lucds", name), ds);
  }

  TrainConfig tc;
  tc.batch_size = 256;
  tc.patience = 10;
  tc.seed = cfg.seed;
  auto trained = train<float>(Hyper::global_pool(10, 11, 3, 64), out.train, out.val, tc);
  save_model(trained.model, ds.spec, dir / "model.lucm");
  out.history = trained.history;
  out.report = evaluate(trained.model, out.test);
  std::ofstream(dir / "metrics.csv") << kMetricsCsvHeader << '\n'
                                     << metrics_csv_row({"test", 10, 10.0, 64, 3, 8}, out.report) << '\n';
  return out;
}

std::optional<PipelineRun> first_run;

Outcome end_to_end() {
  first_run = run_pipeline(test::temp_dir("acceptance-a"));
  const auto& r = *first_run;
  const double f1 = r.report.f1.value_or(0.0);

  const double theta = oracle::fit_threshold(r.train);
  const auto rule = metrics(confusion(oracle::threshold_predict(r.test, theta), labels_of(r.test)));
  const double rule_f1 = rule.f1.value_or(0.0);
  return {f1 >= 0.99 && rule_f1 >= 0.95,
          fmt::format("test samples {}, CNN F1 {:.4f} (>= 0.99) after {} epochs, threshold-rule F1 {:.4f} "
                      "(>= 0.95, theta {:.5f})",
                      r.test.size(), f1, r.history.epochs.size(), rule_f1, theta)};
}

Outcome metric_formula() {
  const auto r = metrics({9952ull * 9827, 0, 9952ull * 173, 48ull * 9827});
  const double f1 = r.f1.value_or(0.0);
  const bool ok = std::abs(*r.ppv - 0.9827) < 1e-12 && std::abs(*r.tpr - 0.9952) < 1e-12 &&
                  std::abs(f1 - 0.9889) < 5e-4;
  return {ok, fmt::format("PPV {:.4f}, TPR {:.4f} -> F1 {:.6f}", *r.ppv, *r.tpr, f1)};
}

Outcome memory_accounting() {
  const auto m = init_model<float>(Hyper{100, 11, 3, 64, 98}, 1);
  std::vector<FlowSample> samples(8);
  for (auto& s : samples) s.matrix.assign(1100, 0.5f);
  const std::vector<std::size_t> sizes = {64};
  const auto rows = run_benchmark(m, samples, sizes);
  const auto& r = rows.at(0);
  const bool ok = r.bytes_per_sample_f64 == 8800 && r.bytes_per_sample_f32 == 4400 &&
                  r.packets_per_sec == r.samples_per_sec * 100 && r.samples_per_sec > 0;
  return {ok, fmt::format("w=8: {} bytes, w=4: {} bytes per sample", r.bytes_per_sample_f64,
                          r.bytes_per_sample_f32)};
}

Outcome determinism() {
  if (!first_run) return {false, "end-to-end run unavailable"};
  const auto second = run_pipeline(test::temp_dir("acceptance-b"));
  std::vector<std::string> differing;
  for (const char* name : {"synth.pcap", "synth-labels.csv", "ds-train.lucds", "ds-val.lucds",
                           "ds-test.lucds", "model.lucm", "metrics.csv"}) {
    if (read_file((first_run->dir / name).string()) != read_file((second.dir / name).string())) {
      differing.emplace_back(name);
    }
  }
  return {differing.empty(), differing.empty()
                                 ? "dataset, checkpoint and metrics byte-identical across two runs"
                                 : fmt::format("differs: {}", fmt::join(differing, ", "))};
}

Outcome activation_sanity() {
  Rng rng(90);
  const Hyper hp{10, 11, 3, 8, 8};
  std::vector<std::vector<float>> flows(30, std::vector<float>(110));
  for (auto& x : flows)
    for (auto& v : x) v = static_cast<float>(rng.uniform());
  std::vector<std::span<const float>> views(flows.begin(), flows.end());

  const ModelParams<float> zero(hp);
  bool zero_ok = true;
  for (const auto& s : attribute(zero, views)) zero_ok &= s.activation == 0.0;

  bool single_ok = true;
  for (std::size_t col = 0; col < kFeatureCount; ++col) {
    ModelParams<float> m(hp);
    for (std::size_t r = 0; r < hp.h; ++r) m.conv_w()[r * hp.f + col] = 1.0f;
    const auto totals = column_activations(m, views);
    for (std::size_t c = 0; c < kFeatureCount; ++c) single_ok &= (c == col) == (totals[c] > 0.0);
  }

  const auto model = oracle::random_model(hp, rng).cast<float>();
  const auto base = attribute(model, views);
  bool perm_ok = true;
  for (int i = 0; i < 20; ++i) {
    rng.shuffle(std::span(views));
    const auto other = attribute(model, views);
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      perm_ok &= other[c].feature == base[c].feature &&
                 std::abs(other[c].activation - base[c].activation) <= 1e-12 * std::max(1.0, base[c].activation);
    }
  }
  return {zero_ok && single_ok && perm_ok,
          fmt::format("zero model {}, single column {}, permutation {}", zero_ok ? "ok" : "bad",
                      single_ok ? "ok" : "bad", perm_ok ? "ok" : "bad")};
}

}  // namespace

int main() {
  run("C1", "parameter-count identity", param_count);
  run("C2", "forward-pass oracle", forward_oracle);
  run("C3", "gradient correctness", gradient_check);
  run("C4", "preprocessing property suite", preprocessing_properties);
  run("C5", "end-to-end learning", end_to_end);
  run("C6", "metric formula", metric_formula);
  run("C7", "memory accounting", memory_accounting);
  run("C8", "determinism", determinism);
  run("C9", "activation analysis sanity", activation_sanity);
  fmt::print("[SKIP] C10 full-scale reproduction: optional, needs external captures (see README)\n");
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
