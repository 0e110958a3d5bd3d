#include "lucid/gridsearch.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lucid/dataset.hpp"

namespace lucid {

Hyper GridPoint::hyper() const {
  if (m == 0) return Hyper::global_pool(n, kFeatureCount, h, k);
  Hyper hp{n, static_cast<std::uint32_t>(kFeatureCount), h, k, m};
  hp.validate();
  return hp;
}

namespace {

using nlohmann::json;

std::uint32_t as_u32(const json& v, const char* what) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(fmt::format("grid: '{}' must be a non-negative integer", what));
  }
  return v.get<std::uint32_t>();
}

std::uint32_t as_pool(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "global") return 0;
    throw ConfigError("grid: 'm' must be an integer or \"global\"");
  }
  return as_u32(v, "m");
}

double as_window(const json& v) {
  if (!v.is_number()) throw ConfigError("grid: 't' must be a number");
  return v.get<double>();
}

std::vector<json> as_list(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(fmt::format("grid: missing '{}'", key));
  const json& v = doc.at(key);
  if (v.is_array()) return {v.begin(), v.end()};
  return {v};
}

}  // namespace

std::vector<GridPoint> parse_grid(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("grid: {}", e.what()));
  }
  if (!doc.is_object()) throw FormatError("grid: expected a JSON object");

  std::vector<GridPoint> points;
  if (doc.contains("points")) {
    for (const auto& p : doc.at("points")) {
      GridPoint g;
      g.n = as_u32(p.at("n"), "n");
      g.t = as_window(p.at("t"));
      g.k = as_u32(p.at("k"), "k");
      g.h = as_u32(p.at("h"), "h");
      g.m = p.contains("m") ? as_pool(p.at("m")) : 0;
      points.push_back(g);
    }
    return points;
  }
  const auto ns = as_list(doc, "n");
  const auto ts = as_list(doc, "t");
  const auto ks = as_list(doc, "k");
  const auto hs = as_list(doc, "h");
  const auto ms = doc.contains("m") ? as_list(doc, "m") : std::vector<json>{json("global")};
  for (const auto& n : ns)
    for (const auto& t : ts)
      for (const auto& k : ks)
        for (const auto& h : hs)
          for (const auto& m : ms) {
            points.push_back({as_u32(n, "n"), as_window(t), as_u32(k, "k"), as_u32(h, "h"),
                              as_pool(m)});
          }
  return points;
}

std::vector<GridPoint> read_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open grid file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str());
}

std::filesystem::path grid_dataset_path(const std::filesystem::path& root, std::uint32_t n,
                                        double t, std::string_view split) {
  return root / fmt::format("n{}-t{}-{}.lucds", n, t, split);
}

std::vector<GridResult> grid_search(const std::vector<GridPoint>& grid,
                                    const std::filesystem::path& data_root,
                                    const TrainConfig& config, const GridLogger& log) {
  std::map<std::pair<std::uint32_t, double>, std::pair<Dataset, Dataset>> cache;
  std::vector<GridResult> results;

  for (const auto& point : grid) {
    GridResult res;
    res.point = point;
    Hyper hp;
    try {
      hp = point.hyper();
    } catch (const ConfigError& e) {
      res.status = GridStatus::error;
      res.message = e.what();
      if (log) log(fmt::format("grid point rejected: {}", e.what()));
      results.push_back(std::move(res));
      continue;
    }

    const auto key = std::make_pair(point.n, point.t);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const auto train_path = grid_dataset_path(data_root, point.n, point.t, "train");
      const auto val_path = grid_dataset_path(data_root, point.n, point.t, "val");
      if (!std::filesystem::exists(train_path) || !std::filesystem::exists(val_path)) {
        res.status = GridStatus::skipped;
        res.message = fmt::format("missing dataset {}", train_path.string());
        if (log) log(fmt::format("warning: {}", res.message));
        results.push_back(std::move(res));
        continue;
      }
      it = cache.emplace(key, std::make_pair(read_dataset(train_path), read_dataset(val_path))).first;
    }
    const auto& [train_ds, val_ds] = it->second;
    if (train_ds.n != point.n || val_ds.n != point.n) {
      res.status = GridStatus::error;
      res.message = "dataset n does not match grid point";
      results.push_back(std::move(res));
      continue;
    }

    try {
      const auto trained = train<float>(hp, train_ds.samples, val_ds.samples, config);
      const auto& best = trained.history.epochs.at(trained.history.best_epoch - 1);
      res.val_f1 = best.val_f1;
      res.val_loss = best.val_loss;
      res.best_epoch = trained.history.best_epoch;
      res.epochs = trained.history.epochs.size();
      if (log) {
        log(fmt::format("n={} t={} k={} h={} m={}: val_f1={} after {} epochs", point.n, point.t,
                        point.k, point.h, hp.m, format_metric(res.val_f1), res.epochs));
      }
    } catch (const Error& e) {
      res.status = GridStatus::error;
      res.message = e.what();
    }
    results.push_back(std::move(res));
  }

  auto rank = [](GridStatus s) { return s == GridStatus::ok ? 0 : (s == GridStatus::error ? 1 : 2); };
  std::stable_sort(results.begin(), results.end(), [&](const GridResult& a, const GridResult& b) {
    if (rank(a.status) != rank(b.status)) return rank(a.status) < rank(b.status);
    if (a.status != GridStatus::ok) return false;
    const double fa = a.val_f1.value_or(-1.0);
    const double fb = b.val_f1.value_or(-1.0);
    if (fa != fb) return fa > fb;
    return a.val_loss < b.val_loss;
  });
  return results;
}

void write_grid_csv(std::ostream& out, const std::vector<GridResult>& results) {
  out << kGridCsvHeader << '\n';
  std::size_t rank = 0;
  for (const auto& r : results) {
    const char* status = r.status == GridStatus::ok ? "ok" : (r.status == GridStatus::error ? "error" : "skipped");
    std::string message = r.message;
    std::replace(message.begin(), message.end(), ',', ';');
    const std::uint32_t m = r.point.m == 0 && r.point.h >= 1 && r.point.h <= r.point.n
                                ? r.point.n - r.point.h + 1
                                : r.point.m;
    if (r.status == GridStatus::ok) {
      out << fmt::format("{},{},{},{},{},{},ok,{},{:.6f},{},{},\n", ++rank, r.point.n, r.point.t,
                         r.point.k, r.point.h, m, format_metric(r.val_f1), r.val_loss,
                         r.best_epoch, r.epochs);
    } else {
      out << fmt::format(",{},{},{},{},{},{},,,,,{}\n", r.point.n, r.point.t, r.point.k,
                         r.point.h, m, status, message);
    }
  }
}

}  // namespace lucid
