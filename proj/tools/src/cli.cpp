#include "dntk/cli.hpp"

#include "dntk/baselines.hpp"
#include "dntk/distill.hpp"
#include "dntk/error.hpp"
#include "dntk/experiment.hpp"
#include "dntk/io.hpp"
#include "dntk/kernel.hpp"
#include "dntk/krr.hpp"
#include "dntk/metrics.hpp"
#include "dntk/seed.hpp"
#include "dntk/sketch.hpp"
#include "dntk/tangent.hpp"
#include "dntk/theory.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>

namespace dntk::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::set<std::string> kCommands{"gen-data",       "train-model",     "extract-grads", "project",
                                      "kernel-stats",   "distill-grads",   "select-baseline", "fit-krr",
                                      "evaluate",       "sweep",           "verify-theory"};

struct Context {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_flag;
  io::RunConfig config;
  std::string out_dir;
  std::ostream* out = nullptr;

  void resolve() {
    if (!config_path.empty()) config = io::read_config(config_path);
    if (seed) config.seed = *seed;
    out_dir = config.out_dir;
    if (const char* env = std::getenv("DNTK_OUT"); env && *env) out_dir = env;
    if (!out_flag.empty()) out_dir = out_flag;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir);
  }

  std::string path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }
};

std::string grads_name(const std::string& split, bool raw) {
  return "grads_" + split + (raw ? "_raw" : "") + ".bin";
}

void require_split(const std::string& split) {
  if (split != "train" && split != "test") throw Error(ErrorCode::BadArgument, "split must be train or test");
}

Matrix split_targets(const tangent::MlpParams& params, const tangent::LabeledDataset& data, const std::string& split) {
  return split == "train" ? tangent::forward_batch(params, data.inputs) : data.one_hot();
}

std::optional<ScaleKind> config_scale(const io::RunConfig& c) {
  return c.scale_kind ? std::optional<ScaleKind>(io::parse_scale(*c.scale_kind)) : std::nullopt;
}

void cmd_gen_data(Context& ctx) {
  tangent::LabeledDataset train;
  tangent::LabeledDataset test;
  experiment::make_data(ctx.config, ctx.config.seed, train, test);
  io::save_dataset(train, ctx.path("train.dset"));
  io::save_dataset(test, ctx.path("test.dset"));
  *ctx.out << "train=" << train.size() << " test=" << test.size() << '\n';
}

void cmd_train_model(Context& ctx) {
  const tangent::LabeledDataset train = io::load_dataset(ctx.path("train.dset"));
  const tangent::MlpParams params = experiment::train_model(ctx.config, train, ctx.config.seed);
  io::save_params(params, ctx.path("model.mlp"));
  *ctx.out << "params=" << params.param_count() << " train_loss=" << tangent::cross_entropy(params, train) << '\n';
}

sketch::SketchOperator sketch_for(const Context& ctx, Index p) {
  const std::string file = ctx.path("sketch.op");
  if (fs::exists(file)) {
    sketch::SketchOperator op = io::load_sketch(file);
    if (op.source_dim() != p) throw Error(ErrorCode::DimMismatch, "stored sketch does not match the parameter count");
    return op;
  }
  sketch::SketchOperator op = sketch::sample_orthonormal(p, experiment::sketch_dimension(ctx.config, p),
                                                         derive_seed(ctx.config.seed, "sketch"), ctx.config.eps_jl);
  io::save_sketch(op, file);
  return op;
}

void cmd_extract(Context& ctx, const std::string& split, bool streaming) {
  require_split(split);
  const tangent::MlpParams params = io::load_params(ctx.path("model.mlp"));
  const tangent::LabeledDataset data = io::load_dataset(ctx.path(split + ".dset"));
  const Matrix targets = split_targets(params, data, split);
  if (streaming) {
    const sketch::SketchOperator op = sketch_for(ctx, params.param_count());
    io::write_gradients(sketch::extract_projected_features(params, data.inputs, targets, op), ctx.path(grads_name(split, false)));
  } else {
    io::write_gradients(tangent::extract_features(params, data.inputs, targets), ctx.path(grads_name(split, true)));
  }
  *ctx.out << "wrote " << (streaming ? grads_name(split, false) : grads_name(split, true)) << '\n';
}

void cmd_project(Context& ctx, const std::string& split) {
  require_split(split);
  const GradientFeatures raw = io::read_gradients(ctx.path(grads_name(split, true)), DimKind::RawParams);
  const sketch::SketchOperator op = sketch_for(ctx, raw.width());
  io::write_gradients(sketch::project_features(raw, op), ctx.path(grads_name(split, false)));
  *ctx.out << "k=" << op.target_dim() << " P=" << op.source_dim() << '\n';
}

void cmd_kernel_stats(Context& ctx, const std::string& input) {
  const GradientFeatures f = io::read_gradients(input.empty() ? ctx.path(grads_name("train", false)) : input);
  const ScaleKind scale = config_scale(ctx.config).value_or(default_scale(f.dim_kind));
  const kernel::KernelStack stack = kernel::build_stack(f, scale);
  const double eps = 1.0 - ctx.config.tau_v;
  json classes = json::array();
  for (const Matrix& k : stack.per_class) {
    const kernel::SpectralSummary s = kernel::summarize(k, eps);
    classes.push_back({{"trunc_rank", s.trunc_rank},
                       {"trace", s.trace},
                       {"condition", s.condition},
                       {"min_eig", s.min_eig},
                       {"effective_dimension", kernel::effective_dimension(s.eig.values, ctx.config.lambda_reg)}});
  }
  const kernel::SpectralSummary avg = kernel::summarize(kernel::average_kernel(stack), eps);
  json doc{{"m", f.samples()},
           {"D", f.width()},
           {"C", f.classes()},
           {"scale_kind", io::scale_name(scale)},
           {"eps", eps},
           {"classes", classes},
           {"average", {{"trunc_rank", avg.trunc_rank}, {"trace", avg.trace}, {"condition", avg.condition}}}};
  io::write_text(doc.dump(2) + "\n", ctx.path("kernel_stats.json"));
  *ctx.out << doc.dump(2) << '\n';
}

void cmd_distill(Context& ctx, std::optional<Index> budget) {
  const GradientFeatures f = io::read_gradients(ctx.path(grads_name("train", false)));
  distill::DistillOptions opts;
  opts.clusters = ctx.config.H;
  opts.tau_v = ctx.config.tau_v;
  opts.tau_g = ctx.config.tau_g;
  opts.eps_qr = ctx.config.eps_qr;
  opts.seed = derive_seed(ctx.config.seed, "distill", 0);
  opts.budget = budget;
  opts.scale = config_scale(ctx.config);
  const distill::DistillResult r = distill::distill(f, opts);
  io::write_gradients(r.distilled.synthetic, ctx.path("distilled.bin"));
  const distill::CoverageReport& rep = r.report;
  std::vector<double> coverage(rep.coverage.data(), rep.coverage.data() + rep.coverage.size());
  std::vector<double> containment(rep.containment.data(), rep.containment.data() + rep.containment.size());
  json prov = json::array();
  for (const auto& p : r.distilled.provenance)
    prov.push_back({{"origin", p.origin == distill::Origin::Local ? "local" : "gap"},
                    {"cluster", p.cluster},
                    {"component", p.component}});
  json doc{{"s", r.distilled.size()},
           {"compression", distill::compression_ratio(f.samples(), r.distilled.size())},
           {"r_g", rep.r_g},
           {"local_ranks", rep.local_ranks},
           {"coverage", coverage},
           {"gap_set", rep.gap_set},
           {"containment", containment},
           {"candidates", rep.candidates},
           {"kept_after_qr", rep.kept_after_qr},
           {"tau_v", rep.tau_v},
           {"tau_g", rep.tau_g},
           {"provenance", prov}};
  io::write_text(doc.dump(2) + "\n", ctx.path("coverage.json"));
  *ctx.out << "s=" << r.distilled.size() << " r_g=" << rep.r_g << " gaps=" << rep.gap_set.size() << '\n';
}

void cmd_select(Context& ctx, const std::string& method, Index s) {
  const GradientFeatures f = io::read_gradients(ctx.path(grads_name("train", false)));
  const std::uint64_t seed = derive_seed(ctx.config.seed, method, 0);
  const std::vector<Index> idx = experiment::select_baseline(f, method, s, seed);
  io::save_indices(idx, method, seed, ctx.path("select_" + method + ".sel"));
  *ctx.out << "method=" << method << " s=" << idx.size() << '\n';
}

GradientFeatures training_set(const Context& ctx, const std::string& method) {
  const GradientFeatures train = io::read_gradients(ctx.path(grads_name("train", false)));
  if (method == "full") return train;
  if (method == "distill") return io::read_gradients(ctx.path("distilled.bin"));
  const std::vector<Index> idx = io::load_indices(ctx.path("select_" + method + ".sel"));
  for (Index i : idx)
    if (i < 0 || i >= train.samples()) throw Error(ErrorCode::IndexOutOfRange, "selection index out of range");
  return train.subset(idx);
}

void cmd_fit(Context& ctx, const std::string& method, std::optional<Index> rank) {
  krr::FitOptions opts;
  opts.lambda_reg = ctx.config.lambda_reg;
  opts.rank = rank;
  opts.scale = config_scale(ctx.config);
  const krr::KrrModel model = krr::fit(training_set(ctx, method), opts);
  io::save_model(model, ctx.path("krr_" + method + ".krr"));
  *ctx.out << "method=" << method << " s=" << model.size() << '\n';
}

void cmd_evaluate(Context& ctx, const std::string& method) {
  const krr::KrrModel model = io::load_model(ctx.path("krr_" + method + ".krr"));
  const GradientFeatures train = io::read_gradients(ctx.path(grads_name("train", false)));
  const GradientFeatures test = io::read_gradients(ctx.path(grads_name("test", false)));
  io::ReportRow row;
  row.method = method;
  row.seed = ctx.config.seed;
  row.s = model.size();
  row.report = experiment::evaluate_model(model, train, test, metrics::argmax_rows(test.labels));
  const std::string file = ctx.path("report.csv");
  std::vector<io::ReportRow> rows;
  if (fs::exists(file)) rows = io::read_report(file);
  rows.push_back(row);
  io::write_report(rows, file);
  *ctx.out << io::format_report({row});
}

void cmd_sweep(Context& ctx, int jobs) {
  const experiment::SweepResult result = experiment::run_sweep(ctx.config, jobs);
  io::write_report(result.rows, ctx.path("sweep_report.csv"));
  io::write_text(experiment::format_cells(result), ctx.path("sweep_cells.csv"));
  *ctx.out << "cells=" << result.cells.size() << " rows=" << result.rows.size() << '\n';
}

bool cmd_verify_theory(Context& ctx) {
  const std::vector<theory::CheckRow> rows = theory::run_theory_suite(ctx.config.seed);
  std::string text = "name,value,threshold,passed\n";
  bool all = true;
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", r.value, r.threshold);
    text += r.name + buf + (r.passed ? "true" : "false") + "\n";
    all = all && r.passed;
  }
  io::write_text(text, ctx.path("theory.csv"));
  *ctx.out << text;
  return all;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto fail = [&](ErrorCode code, const std::string& message) {
    err << message << '\n' << "error_code=" << to_string(code) << '\n';
    return is_numerical(code) ? 2 : 1;
  };
  if (args.empty() || (args[0].rfind('-', 0) != 0 && !kCommands.count(args[0])))
    return fail(ErrorCode::UnknownCommand, args.empty() ? "missing subcommand" : "unknown subcommand: " + args[0]);

  Context ctx;
  ctx.out = &out;
  CLI::App app{"Gradient distillation for neural tangent kernels"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", ctx.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", ctx.seed, "Global seed");
  app.add_option("--out", ctx.out_flag, "Output directory (overrides DNTK_OUT and the config)");

  std::function<bool()> action;
  std::string split = "train";
  std::string method;
  std::string input;
  std::optional<Index> s;
  std::optional<Index> rank;
  std::optional<Index> budget;
  bool streaming = false;
  int jobs = 1;

  auto* sub = app.add_subcommand("gen-data", "Generate the Gaussian-mixture train/test split");
  sub->callback([&] { action = [&] { cmd_gen_data(ctx); return true; }; });

  sub = app.add_subcommand("train-model", "Train the MLP with SGD");
  sub->callback([&] { action = [&] { cmd_train_model(ctx); return true; }; });

  sub = app.add_subcommand("extract-grads", "Per-logit parameter gradients for a split");
  sub->add_option("--split", split)->check(CLI::IsMember({"train", "test"}));
  sub->add_flag("--project", streaming, "Project each chunk immediately (never stores raw gradients)");
  sub->callback([&] { action = [&] { cmd_extract(ctx, split, streaming); return true; }; });

  sub = app.add_subcommand("project", "JL-project raw gradients");
  sub->add_option("--split", split)->check(CLI::IsMember({"train", "test"}));
  sub->callback([&] { action = [&] { cmd_project(ctx, split); return true; }; });

  sub = app.add_subcommand("kernel-stats", "Spectral summary of the class kernels");
  sub->add_option("--input", input, "Gradient file (default: sketched training gradients)");
  sub->callback([&] { action = [&] { cmd_kernel_stats(ctx, input); return true; }; });

  sub = app.add_subcommand("distill-grads", "Local-global gradient distillation");
  sub->add_option("--budget", budget, "Keep at most this many synthetic gradients");
  sub->callback([&] { action = [&] { cmd_distill(ctx, budget); return true; }; });

  sub = app.add_subcommand("select-baseline", "Pick a subset of real training gradients");
  sub->add_option("--method", method)->required()->check(CLI::IsMember({"random", "leverage", "fps", "kmeans"}));
  sub->add_option("--s", s, "Subset size")->required();
  sub->callback([&] { action = [&] { cmd_select(ctx, method, *s); return true; }; });

  sub = app.add_subcommand("fit-krr", "Fit per-class kernel ridge regression");
  sub->add_option("--method", method)->required()->check(
      CLI::IsMember({"distill", "random", "leverage", "fps", "kmeans", "full"}));
  sub->add_option("--rank", rank, "Eigen-truncation rank");
  sub->add_option("--lambda", ctx.config.lambda_reg, "Ridge parameter");
  sub->callback([&] { action = [&] { cmd_fit(ctx, method, rank); return true; }; });

  sub = app.add_subcommand("evaluate", "Score a fitted model and append to report.csv");
  sub->add_option("--method", method)->required();
  sub->callback([&] { action = [&] { cmd_evaluate(ctx, method); return true; }; });

  sub = app.add_subcommand("sweep", "Grid over H, tau_v, tau_g, methods and seeds");
  sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sub->callback([&] { action = [&] { cmd_sweep(ctx, jobs); return true; }; });

  sub = app.add_subcommand("verify-theory", "Run the randomized theory checks");
  sub->callback([&] { action = [&] { return cmd_verify_theory(ctx); }; });

  std::vector<std::string> argv_store{"dntk"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::BadArgument, e.what());
  }

  try {
    // flags such as --lambda write into the config before it is loaded
    const double lambda_flag = ctx.config.lambda_reg;
    const bool lambda_given = app.get_subcommand_ptr("fit-krr")->parsed() &&
                              app.get_subcommand_ptr("fit-krr")->get_option("--lambda")->count() > 0;
    ctx.resolve();
    if (lambda_given) ctx.config.lambda_reg = lambda_flag;
    ctx.config.validate();
    if (!action) return fail(ErrorCode::UnknownCommand, "no subcommand");
    if (!action()) return fail(ErrorCode::CheckFailed, "theory checks failed");
    return 0;
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::IoError, e.what());
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace dntk::cli
