// Command-line driver: synth, preprocess, train, evaluate, predict,
// analyze, benchmark and gridsearch.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "lucid/activation.hpp"
#include "lucid/bench.hpp"
#include "lucid/checkpoint.hpp"
#include "lucid/dataset.hpp"
#include "lucid/error.hpp"
#include "lucid/gridsearch.hpp"
#include "lucid/metrics.hpp"
#include "lucid/pipeline.hpp"
#include "lucid/synth.hpp"
#include "lucid/train.hpp"

namespace fs = std::filesystem;
using namespace lucid;

namespace {

struct TrainFlags {
  double alpha = 0.01;
  std::size_t batch = 2048;
  std::size_t patience = 25;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch", batch, "Mini-batch size")->capture_default_str();
    cmd->add_option("--patience", patience, "Epochs without validation improvement before stopping")
        ->capture_default_str();
    cmd->add_option("--max-epochs", max_epochs, "Upper bound on epochs")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->envname("LUCID_SEED")->capture_default_str();
  }

  TrainConfig config() const {
    TrainConfig c;
    c.adam.alpha = alpha;
    c.batch_size = batch;
    c.patience = patience;
    c.max_epochs = max_epochs;
    c.seed = seed;
    return c;
  }
};

void print_counts(std::string_view name, std::span<const FlowSample> samples) {
  const auto s = count_samples(samples);
  const auto f = count_flows(samples);
  std::cout << fmt::format("{},{},{},{},{},{},{}\n", name, samples.size(), s.benign, s.ddos,
                           s.unlabeled, f.benign, f.ddos);
}

int cmd_synth(const SynthConfig& cfg, const std::string& prefix) {
  const auto files = generate(cfg, prefix);
  std::cout << fmt::format("pcap,{}\nlabels,{}\npackets,{}\nflows,{}\n", files.pcap.string(),
                           files.labels.string(), files.packets, files.flows);
  return 0;
}

struct PreprocessFlags {
  std::vector<std::string> pcaps;
  std::string labels;
  double t = 100.0;
  std::size_t n = 100;
  std::string out;
  std::vector<double> split;
  bool balance = false;
  std::uint64_t seed = 0;
};

int cmd_preprocess(const PreprocessFlags& f) {
  if (f.pcaps.empty()) throw ConfigError("preprocess: at least one --pcap is required");
  PreprocessOptions opt;
  for (const auto& p : f.pcaps) opt.pcaps.emplace_back(p);
  if (!f.labels.empty()) opt.labels = f.labels;
  opt.t = f.t;
  opt.n = f.n;
  auto report = preprocess(opt);

  const auto& ps = report.parse;
  std::cerr << fmt::format(
      "parsed {} records: {} accepted, {} skipped ({} ipv6){}\n", ps.records, ps.accepted,
      ps.skipped, ps.ipv6, ps.truncated ? ", final record truncated" : "");
  std::cerr << fmt::format("{} windows, {} packets kept, {} truncated by n={}\n",
                           report.window.windows, report.window.packets_kept,
                           report.window.packets_truncated, f.n);
  if (report.normalize.clamped > 0) {
    std::cerr << fmt::format("warning: {} values clamped during normalisation\n",
                             report.normalize.clamped);
  }
  if (report.unlabeled_dropped > 0) {
    std::cerr << fmt::format("dropped {} samples with no label\n", report.unlabeled_dropped);
  }

  Dataset& ds = report.dataset;
  std::vector<FlowSample> samples = std::move(ds.samples);
  if (f.balance) samples = balance(samples, f.seed);

  std::cout << "set,samples,benign_samples,ddos_samples,unlabeled_samples,benign_flows,ddos_flows\n";
  if (f.split.empty()) {
    ds.samples = std::move(samples);
    write_dataset(f.out, ds);
    print_counts("all", ds.samples);
    return 0;
  }
  if (f.split.size() != 3) throw ConfigError("--split takes three ratios: train,val,test");
  auto parts = split_dataset(samples, {f.split[0], f.split[1], f.split[2]}, f.seed);
  const std::pair<const char*, std::vector<FlowSample>*> outputs[] = {
      {"train", &parts.train}, {"val", &parts.val}, {"test", &parts.test}};
  for (const auto& [name, part] : outputs) {
    ds.samples = std::move(*part);
    write_dataset(fmt::format("{}-{}.lucds", f.out, name), ds);
    print_counts(name, ds.samples);
  }
  return 0;
}

struct ModelFlags {
  std::uint32_t k = 64;
  std::uint32_t h = 3;
  std::uint32_t m = 0;
  int precision = 32;
};

int cmd_train(const std::string& train_path, const std::string& val_path, const ModelFlags& mf,
              const TrainFlags& tf, const std::string& out, std::string history, bool quiet) {
  const Dataset train_ds = read_dataset(train_path);
  const Dataset val_ds = read_dataset(val_path);
  if (train_ds.n != val_ds.n) throw ConfigError("training and validation sets differ in n");
  if (!(train_ds.spec == val_ds.spec)) {
    throw ConfigError("training and validation sets use different normalisation");
  }
  Hyper hp = mf.m == 0 ? Hyper::global_pool(train_ds.n, kFeatureCount, mf.h, mf.k)
                       : Hyper{train_ds.n, static_cast<std::uint32_t>(kFeatureCount), mf.h, mf.k, mf.m};
  hp.validate();
  const TrainConfig cfg = tf.config();
  cfg.validate();

  EpochCallback log;
  if (!quiet) {
    log = [](const EpochRecord& e) {
      std::cerr << fmt::format("epoch {:4d}  train_loss {:.6f}  val_loss {:.6f}  val_f1 {}\n",
                               e.epoch, e.train_loss, e.val_loss, format_metric(e.val_f1));
    };
  }
  ModelParams<float> model;
  TrainHistory hist;
  if (mf.precision == 64) {
    auto r = train<double>(hp, train_ds.samples, val_ds.samples, cfg, log);
    model = r.model.cast<float>();
    hist = std::move(r.history);
  } else if (mf.precision == 32) {
    auto r = train<float>(hp, train_ds.samples, val_ds.samples, cfg, log);
    model = std::move(r.model);
    hist = std::move(r.history);
  } else {
    throw ConfigError("--precision must be 32 or 64");
  }
  save_model(model, train_ds.spec, out);
  if (history.empty()) history = out + ".history.csv";
  write_history_csv(history, hist);
  std::cerr << fmt::format("{} parameters, best epoch {} of {}{}\n", hp.param_count(),
                           hist.best_epoch, hist.epochs.size(),
                           hist.early_stopped ? " (early stop)" : "");
  return 0;
}

void check_compatible(const Checkpoint& cp, const Dataset& ds) {
  if (cp.model.hyper().n != ds.n) {
    throw ConfigError(fmt::format("model expects n={}, dataset has n={}", cp.model.hyper().n, ds.n));
  }
  if (!(cp.spec == ds.spec)) {
    std::cerr << "warning: dataset normalisation differs from the model's\n";
  }
}

int cmd_evaluate(const std::string& model_path, const std::string& test_path, std::string name,
                 const std::string& out_path) {
  const Checkpoint cp = load_model(model_path);
  const Dataset ds = read_dataset(test_path);
  check_compatible(cp, ds);
  const MetricsReport rep = evaluate(cp.model, ds.samples);
  if (name.empty()) name = fs::path(test_path).stem().string();
  const Hyper& hp = cp.model.hyper();
  const std::string row = metrics_csv_row({name, hp.n, ds.t, hp.k, hp.h, hp.m}, rep);
  std::cout << kMetricsCsvHeader << '\n' << row << '\n';
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", out_path));
    out << kMetricsCsvHeader << '\n' << row << '\n';
  }
  return 0;
}

int cmd_predict(const std::string& model_path, const std::vector<std::string>& pcaps,
                std::optional<double> t, const std::string& labels_path,
                const std::string& metrics_out) {
  if (pcaps.empty()) throw ConfigError("predict: at least one --pcap is required");
  const Checkpoint cp = load_model(model_path);
  const double window = t.value_or(cp.spec.window());
  if (t && *t != cp.spec.window()) {
    std::cerr << fmt::format("warning: window {}s differs from the model's {}s\n", *t,
                             cp.spec.window());
  }
  std::vector<PacketRecord> packets;
  for (const auto& p : pcaps) {
    auto cap = parse_pcap(p);
    packets.insert(packets.end(), std::make_move_iterator(cap.packets.begin()),
                   std::make_move_iterator(cap.packets.end()));
  }
  auto report = preprocess_packets(packets, nullptr, window, cp.model.hyper().n, &cp.spec);
  const auto& samples = report.dataset.samples;
  const auto probs = predict(cp.model, samples);

  std::optional<LabelSet> labels;
  if (!labels_path.empty()) labels = read_labels_csv(labels_path);
  std::vector<Label> predicted, actual;

  std::cout << "window_start,proto,ip_lo,port_lo,ip_hi,port_hi,pkt_count,p,verdict\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const Label verdict = classify(probs[i]);
    std::cout << fmt::format("{:.6f},{},{},{:.6f},{}\n", s.window_start, s.key.to_string(),
                             s.pkt_count, probs[i], verdict == Label::ddos ? "ddos" : "benign");
    if (labels) {
      if (auto it = labels->find(s.key); it != labels->end()) {
        predicted.push_back(verdict);
        actual.push_back(it->second);
      }
    }
  }
  if (labels) {
    if (actual.empty()) throw ConfigError("predict: no sample matched the label file");
    const auto rep = metrics(confusion(predicted, actual));
    const Hyper& hp = cp.model.hyper();
    const auto row = metrics_csv_row({"predict", hp.n, window, hp.k, hp.h, hp.m}, rep);
    std::cerr << kMetricsCsvHeader << '\n' << row << '\n';
    if (!metrics_out.empty()) {
      std::ofstream out(metrics_out, std::ios::trunc);
      if (!out) throw IoError(fmt::format("cannot write '{}'", metrics_out));
      out << kMetricsCsvHeader << '\n' << row << '\n';
    }
  }
  return 0;
}

int cmd_analyze(const std::string& model_path, const std::string& test_path,
                const std::string& csv_path) {
  const Checkpoint cp = load_model(model_path);
  const Dataset ds = read_dataset(test_path);
  check_compatible(cp, ds);
  std::vector<std::span<const float>> flows;
  for (const auto& s : ds.samples) {
    if (s.label == Label::ddos) flows.emplace_back(s.matrix);
  }
  const auto ranking = attribute(cp.model, flows);
  std::cout << fmt::format("{} DDoS samples\n", flows.size());
  write_ranking_table(std::cout, ranking);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", csv_path));
    write_ranking_csv(out, ranking);
  }
  return 0;
}

int cmd_benchmark(const std::string& model_path, const std::string& test_path,
                  const std::vector<std::size_t>& batch_sizes, std::size_t repeats) {
  const Checkpoint cp = load_model(model_path);
  const Dataset ds = read_dataset(test_path);
  check_compatible(cp, ds);
  const auto reports = run_benchmark(cp.model, ds.samples, batch_sizes, repeats);
  std::cout << kBenchCsvHeader << '\n';
  for (const auto& r : reports) write_bench_csv_row(std::cout, r);
  return 0;
}

int cmd_gridsearch(const std::string& grid_path, const std::string& root, const std::string& out,
                   const TrainFlags& tf) {
  const auto grid = read_grid(grid_path);
  const auto results =
      grid_search(grid, root, tf.config(), [](const std::string& msg) { std::cerr << msg << '\n'; });
  std::ofstream file(out, std::ios::trunc);
  if (!file) throw IoError(fmt::format("cannot write '{}'", out));
  write_grid_csv(file, results);
  write_grid_csv(std::cout, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LUCID: lightweight CNN DDoS detection on windowed traffic flows"};
  app.set_config("--config", "", "TOML/INI file supplying option values");
  app.require_subcommand(1);

  SynthConfig synth_cfg;
  std::string synth_prefix;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic capture");
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->envname("LUCID_SEED")->capture_default_str();
  synth->add_option("--ddos-flows", synth_cfg.ddos_flows)->capture_default_str();
  synth->add_option("--benign-flows", synth_cfg.benign_flows)->capture_default_str();
  synth->add_option("--duration", synth_cfg.duration, "Seconds over which flows start")->capture_default_str();
  synth->add_option("--out-prefix", synth_prefix, "Writes <prefix>.pcap and <prefix>-labels.csv")->required();

  PreprocessFlags pre;
  auto* prep = app.add_subcommand("preprocess", "Turn pcap files into a LUCID dataset");
  prep->add_option("--pcap", pre.pcaps, "Input capture(s)");
  prep->add_option("--labels", pre.labels, "Flow label CSV");
  prep->add_option("--t", pre.t, "Time window in seconds")->capture_default_str();
  prep->add_option("--n", pre.n, "Packets per sample")->capture_default_str();
  prep->add_option("--out", pre.out, "Output dataset (a prefix when --split is given)")->required();
  prep->add_option("--split", pre.split, "train,val,test ratios, e.g. 0.81,0.09,0.10")->delimiter(',');
  prep->add_flag("--balance", pre.balance, "Down-sample the majority class by flow");
  prep->add_option("--seed", pre.seed, "Seed for splitting/balancing")->envname("LUCID_SEED");

  std::string train_path, val_path, model_out, history_out;
  ModelFlags model_flags;
  TrainFlags train_flags;
  bool quiet = false;
  auto* trn = app.add_subcommand("train", "Train a model");
  trn->set_help_flag("--help", "Print this help message and exit");
  trn->add_option("--train", train_path)->required();
  trn->add_option("--val", val_path)->required();
  trn->add_option("--k", model_flags.k, "Number of filters")->capture_default_str();
  trn->add_option("--h", model_flags.h, "Filter height")->capture_default_str();
  trn->add_option("--m", model_flags.m, "Pool size (0 = n-h+1)")->capture_default_str();
  trn->add_option("--precision", model_flags.precision, "32 or 64 bit arithmetic")->capture_default_str();
  train_flags.add_to(trn);
  trn->add_option("--out", model_out, "Checkpoint path")->required();
  trn->add_option("--history", history_out, "History CSV (default <out>.history.csv)");
  trn->add_flag("--quiet", quiet, "No per-epoch progress");

  std::string eval_model, eval_test, eval_name, eval_out;
  auto* evl = app.add_subcommand("evaluate", "Score a model on a labelled dataset");
  evl->add_option("--model", eval_model)->required();
  evl->add_option("--test", eval_test)->required();
  evl->add_option("--name", eval_name, "Dataset column value (default: file stem)");
  evl->add_option("--out", eval_out, "Also write the CSV here");

  std::string pred_model, pred_labels, pred_metrics;
  std::vector<std::string> pred_pcaps;
  std::optional<double> pred_t;
  auto* prd = app.add_subcommand("predict", "Classify the flows of a capture");
  prd->add_option("--model", pred_model)->required();
  prd->add_option("--pcap", pred_pcaps);
  prd->add_option("--t", pred_t, "Time window (default: the model's)");
  prd->add_option("--labels", pred_labels, "Label CSV for live metrics");
  prd->add_option("--metrics-out", pred_metrics, "Write the metrics CSV here");

  std::string an_model, an_test, an_csv;
  auto* anl = app.add_subcommand("analyze", "Rank features by kernel activation on DDoS samples");
  anl->add_option("--model", an_model)->required();
  anl->add_option("--test", an_test)->required();
  anl->add_option("--csv", an_csv, "Write the ranking as CSV");

  std::string bm_model, bm_test;
  std::vector<std::size_t> bm_batches{64, 128, 256, 512, 1024, 2048, 4096, 8192};
  std::size_t bm_repeats = 3;
  auto* bmk = app.add_subcommand("benchmark", "Measure inference throughput");
  bmk->add_option("--model", bm_model)->required();
  bmk->add_option("--test", bm_test)->required();
  bmk->add_option("--batch-sizes", bm_batches)->delimiter(',')->capture_default_str();
  bmk->add_option("--repeats", bm_repeats)->capture_default_str();

  std::string gs_grid, gs_root, gs_out;
  TrainFlags gs_flags;
  auto* gsr = app.add_subcommand("gridsearch", "Train and rank a hyper-parameter grid");
  gsr->add_option("--grid", gs_grid, "Grid JSON")->required();
  gsr->add_option("--data-root", gs_root, "Directory of n<n>-t<t>-{train,val}.lucds")->required();
  gsr->add_option("--out", gs_out, "Result CSV")->required();
  gs_flags.add_to(gsr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (*synth) return cmd_synth(synth_cfg, synth_prefix);
    if (*prep) return cmd_preprocess(pre);
    if (*trn) return cmd_train(train_path, val_path, model_flags, train_flags, model_out, history_out, quiet);
    if (*evl) return cmd_evaluate(eval_model, eval_test, eval_name, eval_out);
    if (*prd) return cmd_predict(pred_model, pred_pcaps, pred_t, pred_labels, pred_metrics);
    if (*anl) return cmd_analyze(an_model, an_test, an_csv);
    if (*bmk) return cmd_benchmark(bm_model, bm_test, bm_batches, bm_repeats);
    if (*gsr) return cmd_gridsearch(gs_grid, gs_root, gs_out, gs_flags);
  } catch (const Error& e) {
    std::cerr << "lucid: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "lucid: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
