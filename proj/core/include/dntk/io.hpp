#pragma once

#include "dntk/krr.hpp"
#include "dntk/metrics.hpp"
#include "dntk/sketch.hpp"
#include "dntk/tangent.hpp"
#include "dntk/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dntk::io {

/// Binary gradient file: "DNTK1\0", u32 version, u32 m, u32 D, u32 C, u8 dtype,
/// u8 labels_kind, then C row-major f64 blocks (m x D), labels (m x C) and
/// model logits (m x C). Little-endian throughout.
inline constexpr std::uint32_t kGradientVersion = 1;
inline constexpr std::size_t kGradientHeaderBytes = 24;

void write_gradients(const GradientFeatures& features, const std::string& path);
GradientFeatures read_gradients(const std::string& path, DimKind kind = DimKind::Sketched);

struct ReportRow {
  std::string method;
  std::uint64_t seed = 0;
  Index s = 0;
  metrics::EvalReport report;
};

inline constexpr const char* kReportHeader =
    "method,seed,s,compression,fidelity,accuracy,mse,coverage,recon_error,condition,min_eig";

std::string format_report(const std::vector<ReportRow>& rows);
void write_report(const std::vector<ReportRow>& rows, const std::string& path);
std::vector<ReportRow> read_report(const std::string& path);
std::vector<ReportRow> parse_report(const std::string& text);

struct RunConfig {
  std::uint64_t seed = 0;
  std::vector<Index> layer_sizes{64, 64, 64, 10};
  std::string activation = "tanh";
  Index n_train = 500;
  Index n_test = 500;
  std::optional<Index> k_sketch;
  double eps_jl = sketch::kDefaultEpsJl;
  double spread = 3.0;
  Index epochs = 20;
  double lr = 0.05;
  Index batch = 32;
  int H = 10;
  double tau_v = 0.95;
  double tau_g = 0.5;
  double eps_qr = 1e-6;
  double lambda_reg = krr::kDefaultLambda;
  std::optional<std::string> scale_kind;  // "none" or "inv_k"
  std::vector<std::string> methods{"distill", "random", "leverage", "fps", "kmeans", "full"};
  std::vector<std::uint64_t> seeds{0};
  std::vector<Index> budgets;  // empty: distillation picks its own size
  std::vector<int> sweep_H{5, 10, 15, 20};
  std::vector<double> sweep_tau_v{0.90, 0.95, 0.99};
  std::vector<double> sweep_tau_g{0.3, 0.5, 0.7, 0.9};
  std::string out_dir = "out";

  /// Throws BadArgument / BadEps / BadLambda on invalid values.
  void validate() const;
};

/// Strict JSON: unknown keys raise UnknownField, type errors ParseError.
RunConfig parse_config(const std::string& json_text);
RunConfig read_config(const std::string& path);
std::string config_to_json(const RunConfig& config);

ScaleKind parse_scale(const std::string& name);
std::string scale_name(ScaleKind kind);
tangent::Activation parse_activation(const std::string& name);

// Archives for the remaining pipeline artifacts: "DNTKA1", u32 length of a
// JSON metadata block, the block, then the f64 matrices it lists.

void save_dataset(const tangent::LabeledDataset& data, const std::string& path);
tangent::LabeledDataset load_dataset(const std::string& path);

void save_params(const tangent::MlpParams& params, const std::string& path);
tangent::MlpParams load_params(const std::string& path);

/// Only the seed and shape are stored; Q is regenerated on load.
void save_sketch(const sketch::SketchOperator& op, const std::string& path);
sketch::SketchOperator load_sketch(const std::string& path);

void save_model(const krr::KrrModel& model, const std::string& path);
krr::KrrModel load_model(const std::string& path);

void save_indices(const std::vector<Index>& indices, const std::string& method, std::uint64_t seed,
                  const std::string& path);
std::vector<Index> load_indices(const std::string& path);

void save_matrix(const Matrix& m, const std::string& path);
Matrix load_matrix(const std::string& path);

void write_text(const std::string& text, const std::string& path);
std::string read_text(const std::string& path);

}  // namespace dntk::io
