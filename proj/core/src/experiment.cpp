#include "dntk/experiment.hpp"

#include "dntk/baselines.hpp"
#include "dntk/error.hpp"
#include "dntk/kernel.hpp"
#include "dntk/numerics.hpp"
#include "dntk/seed.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace dntk::experiment {
namespace {

tangent::LabeledDataset take_rows(const tangent::LabeledDataset& data, Index begin, Index count) {
  tangent::LabeledDataset out;
  out.class_count = data.class_count;
  out.inputs = data.inputs.middleRows(begin, count);
  out.labels.assign(data.labels.begin() + begin, data.labels.begin() + begin + count);
  return out;
}

}  // namespace

void make_data(const io::RunConfig& config, std::uint64_t seed, tangent::LabeledDataset& train,
               tangent::LabeledDataset& test) {
  const auto classes = static_cast<int>(config.layer_sizes.back());
  const Index total = config.n_train + config.n_test;
  const Index per_class = (total + classes - 1) / classes;
  const tangent::LabeledDataset all =
      tangent::gen_gaussian_mixture(classes, per_class, config.layer_sizes.front(), config.spread, derive_seed(seed, "data"));
  train = take_rows(all, 0, config.n_train);
  test = take_rows(all, config.n_train, config.n_test);
}

tangent::MlpParams train_model(const io::RunConfig& config, const tangent::LabeledDataset& train, std::uint64_t seed) {
  const tangent::MlpParams init =
      tangent::init_params(config.layer_sizes, io::parse_activation(config.activation), derive_seed(seed, "init"));
  tangent::TrainOptions opts;
  opts.lr = config.lr;
  opts.epochs = config.epochs;
  opts.batch = config.batch;
  opts.seed = derive_seed(seed, "train");
  return tangent::train_sgd(init, train, opts).params;
}

Index sketch_dimension(const io::RunConfig& config, Index param_count) {
  const Index k = config.k_sketch ? *config.k_sketch : sketch::jl_dimension(config.n_train, config.eps_jl);
  return std::min(k, param_count);
}

Base prepare_base(const io::RunConfig& config, std::uint64_t seed) {
  config.validate();
  Base base;
  base.seed = seed;
  make_data(config, seed, base.train, base.test);
  base.params = train_model(config, base.train, seed);
  const Index p = base.params.param_count();
  base.op = sketch::sample_orthonormal(p, sketch_dimension(config, p), derive_seed(seed, "sketch"), config.eps_jl);
  const Matrix train_logits = tangent::forward_batch(base.params, base.train.inputs);
  base.train_features = sketch::extract_projected_features(base.params, base.train.inputs, train_logits, base.op);
  base.test_features = sketch::extract_projected_features(base.params, base.test.inputs, base.test.one_hot(), base.op);
  return base;
}

std::vector<Index> select_baseline(const GradientFeatures& train, const std::string& method, Index s,
                                   std::uint64_t seed) {
  const Index m = train.samples();
  if (s < 1 || s > m) throw Error(ErrorCode::STooLarge, "selection size must lie in [1, m]");
  if (method == "random") return baselines::select_random(m, s, seed).indices;
  if (method == "leverage") {
    const Matrix kbar = kernel::average_kernel(kernel::build_stack(train, default_scale(train.dim_kind)));
    return baselines::select_leverage(kbar, s, s, seed).indices;
  }
  if (method == "fps") return baselines::select_fps(train.flattened(), s, seed).indices;
  if (method == "kmeans") return baselines::select_kmeans(train.flattened(), s, seed).indices;
  throw Error(ErrorCode::BadArgument, "unknown baseline " + method);
}

metrics::EvalReport evaluate_model(const krr::KrrModel& model, const GradientFeatures& train,
                                   const GradientFeatures& test, const std::vector<int>& test_labels) {
  const Matrix pred = krr::predict(model, test);
  metrics::EvalReport r;
  r.fidelity = metrics::fidelity(pred, test.model_logits);
  r.accuracy = metrics::accuracy(pred, test_labels);
  r.mse = metrics::mse(pred, test.model_logits);

  for (Index c = 0; c < model.classes(); ++c) {
    const Matrix k = kernel::cross_kernel(model.basis[c], model.basis[c], model.scale_kind);
    const kernel::Conditioning cond = kernel::conditioning(0.5 * (k + k.transpose()), model.lambda_reg);
    r.condition += cond.condition;
    r.min_eig += cond.min_eig;
  }
  r.condition /= static_cast<double>(model.classes());
  r.min_eig /= static_cast<double>(model.classes());

  GradientFeatures representers;
  representers.per_class = model.basis;
  const Matrix centered = metrics::center_rows(train.flattened());
  const Matrix basis = numerics::orthonormal_basis(representers.flattened().transpose());
  r.coverage = metrics::subspace_coverage(centered, basis);
  r.reconstruction_error = metrics::reconstruction_error(centered, basis);
  r.compression_ratio = distill::compression_ratio(train.samples(), model.size());
  return r;
}

metrics::EvalReport evaluate_set(const Base& base, const GradientFeatures& reduced, double lambda_reg,
                                 std::optional<ScaleKind> scale) {
  krr::FitOptions fit_opts;
  fit_opts.lambda_reg = lambda_reg;
  fit_opts.scale = scale;
  return evaluate_model(krr::fit(reduced, fit_opts), base.train_features, base.test_features, base.test.labels);
}

io::ReportRow run_method(const Base& base, const io::RunConfig& config, const std::string& method,
                         const CellSettings& settings, std::optional<Index> s, std::uint64_t cell) {
  const std::optional<ScaleKind> scale =
      config.scale_kind ? std::optional<ScaleKind>(io::parse_scale(*config.scale_kind)) : std::nullopt;
  io::ReportRow row;
  row.method = method;
  row.seed = base.seed;
  if (method == "full") {
    row.s = base.train_features.samples();
    row.report = evaluate_set(base, base.train_features, config.lambda_reg, scale);
    return row;
  }
  if (method == "distill") {
    distill::DistillOptions opts;
    opts.clusters = settings.clusters;
    opts.tau_v = settings.tau_v;
    opts.tau_g = settings.tau_g;
    opts.eps_qr = config.eps_qr;
    opts.seed = derive_seed(base.seed, "distill", cell);
    opts.budget = settings.budget;
    opts.scale = scale;
    const distill::DistillResult result = distill::distill(base.train_features, opts);
    row.s = result.distilled.size();
    row.report = evaluate_set(base, result.distilled.synthetic, config.lambda_reg, scale);
    return row;
  }
  const Index size = s ? *s : settings.budget.value_or(0);
  const std::vector<Index> idx = select_baseline(base.train_features, method, size, derive_seed(base.seed, method, cell));
  row.s = size;
  row.report = evaluate_set(base, base.train_features.subset(idx), config.lambda_reg, scale);
  return row;
}

std::vector<SweepCell> sweep_cells(const io::RunConfig& config) {
  std::vector<std::optional<Index>> budgets;
  for (Index b : config.budgets) budgets.emplace_back(b);
  if (budgets.empty()) budgets.emplace_back(std::nullopt);
  std::vector<SweepCell> cells;
  for (std::uint64_t seed : config.seeds)
    for (int h : config.sweep_H)
      for (double tv : config.sweep_tau_v)
        for (double tg : config.sweep_tau_g)
          for (const auto& b : budgets) cells.push_back(SweepCell{seed, CellSettings{h, tv, tg, b}});
  return cells;
}

SweepResult run_sweep(const io::RunConfig& config, int jobs) {
  config.validate();
  SweepResult out;
  out.cells = sweep_cells(config);
  jobs = std::max(1, jobs);

  // shared per-seed state, built once
  std::map<std::uint64_t, std::shared_ptr<const Base>> bases;
  for (std::uint64_t seed : config.seeds)
    if (!bases.count(seed)) bases[seed] = std::make_shared<const Base>(prepare_base(config, seed));

  const bool wants_full = std::count(config.methods.begin(), config.methods.end(), "full") > 0;
  std::map<std::uint64_t, io::ReportRow> full_rows;
  if (wants_full)
    for (const auto& [seed, base] : bases) full_rows[seed] = run_method(*base, config, "full", CellSettings{}, std::nullopt, 0);

  std::vector<std::vector<io::ReportRow>> per_cell(out.cells.size());
  std::vector<std::exception_ptr> errors(out.cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.cells.size(); i = next++) {
      try {
        const SweepCell& cell = out.cells[i];
        const Base& base = *bases.at(cell.seed);
        std::optional<Index> s = cell.settings.budget;
        std::vector<io::ReportRow> rows;
        const bool has_distill = std::count(config.methods.begin(), config.methods.end(), "distill") > 0;
        if (has_distill) {
          rows.push_back(run_method(base, config, "distill", cell.settings, std::nullopt, i));
          s = rows.back().s;
        }
        if (!s) s = std::min<Index>(base.train_features.samples(), config.H);
        for (const std::string& method : config.methods) {
          if (method == "distill") continue;
          if (method == "full") {
            rows.push_back(full_rows.at(cell.seed));
            continue;
          }
          rows.push_back(run_method(base, config, method, cell.settings, s, i));
        }
        per_cell[i] = std::move(rows);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    for (auto& row : per_cell[i]) {
      out.rows.push_back(std::move(row));
      out.row_cell.push_back(i);
    }
  }
  return out;
}

std::string format_cells(const SweepResult& result) {
  std::string text = "row,cell,seed,H,tau_v,tau_g,budget,method\n";
  char buf[256];
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    const SweepCell& cell = result.cells[result.row_cell[r]];
    const std::string budget = cell.settings.budget ? std::to_string(*cell.settings.budget) : "";
    std::snprintf(buf, sizeof buf, "%zu,%zu,%llu,%d,%.17g,%.17g,", r, result.row_cell[r],
                  static_cast<unsigned long long>(cell.seed), cell.settings.clusters, cell.settings.tau_v,
                  cell.settings.tau_g);
    text += buf + budget + "," + result.rows[r].method + "\n";
  }
  return text;
}

}  // namespace dntk::experiment
