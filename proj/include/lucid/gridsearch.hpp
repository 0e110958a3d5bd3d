#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lucid/train.hpp"

namespace lucid {

// One hyper-parameter combination. m == 0 means global pooling (n-h+1).
struct GridPoint {
  std::uint32_t n = 100;
  double t = 100.0;
  std::uint32_t k = 64;
  std::uint32_t h = 3;
  std::uint32_t m = 0;

  Hyper hyper() const;  // throws ConfigError for invalid shapes
};

// JSON, either the cartesian form
//   {"n": [..], "t": [..], "k": [..], "h": [..], "m": [.. or "global"]}
// or an explicit list {"points": [{"n":..,"t":..,"k":..,"h":..,"m":..}, ...]}.
std::vector<GridPoint> read_grid(const std::filesystem::path& path);
std::vector<GridPoint> parse_grid(std::string_view json);

enum class GridStatus { ok, error, skipped };

struct GridResult {
  GridPoint point;
  GridStatus status = GridStatus::ok;
  std::string message;
  std::optional<double> val_f1;
  double val_loss = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs = 0;
};

// <root>/n<n>-t<t>-<split>.lucds, the layout written by `lucid preprocess --split`.
std::filesystem::path grid_dataset_path(const std::filesystem::path& root, std::uint32_t n,
                                        double t, std::string_view split);

using GridLogger = std::function<void(const std::string&)>;

// Trains one model per point on <root>/…-train and scores it on …-val.
// Results are ordered by validation F1 (best first), then error rows, then
// skipped rows. Test splits are never read.
std::vector<GridResult> grid_search(const std::vector<GridPoint>& grid,
                                    const std::filesystem::path& data_root,
                                    const TrainConfig& config, const GridLogger& log = {});

inline constexpr const char* kGridCsvHeader =
    "rank,n,t,k,h,m,status,val_f1,val_loss,best_epoch,epochs,message";
void write_grid_csv(std::ostream& out, const std::vector<GridResult>& results);

}  // namespace lucid
