#pragma once

#include "dntk/distill.hpp"
#include "dntk/io.hpp"
#include "dntk/krr.hpp"
#include "dntk/metrics.hpp"
#include "dntk/sketch.hpp"
#include "dntk/tangent.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dntk::experiment {

/// Everything the methods share for one seed: data, trained network, sketch
/// and projected features. Training features carry the network's logits as
/// targets; test features carry one-hot labels.
struct Base {
  tangent::LabeledDataset train;
  tangent::LabeledDataset test;
  tangent::MlpParams params;
  sketch::SketchOperator op;
  GradientFeatures train_features;
  GradientFeatures test_features;
  std::uint64_t seed = 0;
};

/// Splits one Gaussian mixture into train/test so both share class means.
void make_data(const io::RunConfig& config, std::uint64_t seed, tangent::LabeledDataset& train,
               tangent::LabeledDataset& test);

tangent::MlpParams train_model(const io::RunConfig& config, const tangent::LabeledDataset& train, std::uint64_t seed);

Index sketch_dimension(const io::RunConfig& config, Index param_count);

Base prepare_base(const io::RunConfig& config, std::uint64_t seed);

struct CellSettings {
  int clusters = 10;
  double tau_v = 0.95;
  double tau_g = 0.5;
  std::optional<Index> budget;
};

/// Rows of the training set chosen by a baseline. `s` must be positive.
std::vector<Index> select_baseline(const GradientFeatures& train, const std::string& method, Index s,
                                   std::uint64_t seed);

/// Scores a fitted model: fidelity and MSE against the test features' model
/// logits, accuracy against `test_labels`, and coverage of the centered
/// training gradients by the model's representers.
metrics::EvalReport evaluate_model(const krr::KrrModel& model, const GradientFeatures& train,
                                   const GradientFeatures& test, const std::vector<int>& test_labels);

/// Fits KRR on `reduced` and scores it against the base's test set.
metrics::EvalReport evaluate_set(const Base& base, const GradientFeatures& reduced, double lambda_reg,
                                 std::optional<ScaleKind> scale);

/// Runs one method. Baselines take `s` (defaulting to the budget); distill
/// ignores it and reports its own size.
io::ReportRow run_method(const Base& base, const io::RunConfig& config, const std::string& method,
                         const CellSettings& settings, std::optional<Index> s, std::uint64_t cell);

struct SweepCell {
  std::uint64_t seed = 0;
  CellSettings settings;
};

/// Cross product seeds x H x tau_v x tau_g x budgets in a fixed order.
std::vector<SweepCell> sweep_cells(const io::RunConfig& config);

struct SweepResult {
  std::vector<io::ReportRow> rows;
  std::vector<std::size_t> row_cell;  // cell index of every row
  std::vector<SweepCell> cells;
};

/// Runs every method on every cell using up to `jobs` threads; rows are
/// merged in cell order so the output does not depend on scheduling.
SweepResult run_sweep(const io::RunConfig& config, int jobs);

std::string format_cells(const SweepResult& result);

}  // namespace dntk::experiment
