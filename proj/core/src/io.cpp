#include "dntk/io.hpp"

#include "dntk/error.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace dntk::io {
namespace {

using json = nlohmann::json;

constexpr char kGradientMagic[6] = {'D', 'N', 'T', 'K', '1', '\0'};
constexpr char kArchiveMagic[6] = {'D', 'N', 'T', 'K', 'A', '1'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    buffer_.insert(buffer_.end(), p, p + n);
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u8(std::uint8_t v) { bytes(&v, sizeof v); }
  void matrix(const Matrix& m) {
    // row-major on disk
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        bytes(&v, sizeof v);
      }
  }
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
  }

 private:
  std::vector<char> buffer_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    buffer_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::size_t size() const { return buffer_.size(); }
  std::size_t remaining() const { return buffer_.size() - pos_; }
  void bytes(void* out, std::size_t n) {
    if (remaining() < n) throw Error(ErrorCode::TruncatedFile, "unexpected end of file");
    std::memcpy(out, buffer_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, sizeof v);
    return v;
  }
  Matrix matrix(Index rows, Index cols) {
    const auto count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (remaining() / sizeof(double) < count) throw Error(ErrorCode::TruncatedFile, "matrix payload is truncated");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        double v;
        bytes(&v, sizeof v);
        m(i, j) = v;
      }
    return m;
  }

 private:
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
};

std::uint32_t to_u32(Index v, const char* what) {
  if (v < 0 || v > static_cast<Index>(UINT32_MAX)) throw Error(ErrorCode::BadArgument, std::string(what) + " out of range");
  return static_cast<std::uint32_t>(v);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorCode::ParseError, "not a number: " + s);
  return v;
}

// Archive: meta JSON lists {"name", "rows", "cols"} under "matrices".
struct Archive {
  json meta = json::object();
  std::vector<std::pair<std::string, Matrix>> matrices;

  void add(const std::string& name, const Matrix& m) { matrices.emplace_back(name, m); }

  const Matrix& get(const std::string& name) const {
    for (const auto& [key, m] : matrices)
      if (key == name) return m;
    throw Error(ErrorCode::ParseError, "archive is missing matrix " + name);
  }
};

void save_archive(const std::string& kind, Archive archive, const std::string& path) {
  archive.meta["kind"] = kind;
  json list = json::array();
  for (const auto& [name, m] : archive.matrices) list.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  archive.meta["matrices"] = list;
  const std::string text = archive.meta.dump();
  Writer w;
  w.bytes(kArchiveMagic, sizeof kArchiveMagic);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  for (const auto& entry : archive.matrices) w.matrix(entry.second);
  w.save(path);
}

Archive load_archive(const std::string& kind, const std::string& path) {
  Reader r(path);
  char magic[6];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kArchiveMagic, sizeof magic) != 0) throw Error(ErrorCode::ParseError, "bad archive magic in " + path);
  const std::uint32_t length = r.u32();
  std::string text(length, '\0');
  r.bytes(text.data(), length);
  Archive archive;
  try {
    archive.meta = json::parse(text);
    if (archive.meta.at("kind").get<std::string>() != kind)
      throw Error(ErrorCode::ParseError, path + " holds a " + archive.meta.at("kind").get<std::string>() + ", expected " + kind);
    for (const auto& entry : archive.meta.at("matrices")) {
      const Index rows = entry.at("rows").get<Index>();
      const Index cols = entry.at("cols").get<Index>();
      archive.add(entry.at("name").get<std::string>(), r.matrix(rows, cols));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("archive metadata: ") + e.what());
  }
  return archive;
}

Matrix to_column(const std::vector<Index>& v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), 0) = static_cast<double>(v[i]);
  return m;
}

std::vector<Index> from_column(const Matrix& m) {
  std::vector<Index> v(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = static_cast<Index>(std::llround(m(i, 0)));
  return v;
}

template <typename T>
void take(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

}  // namespace

void write_gradients(const GradientFeatures& features, const std::string& path) {
  features.validate();
  const Index m = features.samples();
  const Index d = features.width();
  const Index c = features.classes();
  if (m == 0 || d == 0 || c == 0) throw Error(ErrorCode::EmptyInput, "gradient dimensions must be positive");
  Writer w;
  w.bytes(kGradientMagic, sizeof kGradientMagic);
  w.u32(kGradientVersion);
  w.u32(to_u32(m, "m"));
  w.u32(to_u32(d, "D"));
  w.u32(to_u32(c, "C"));
  w.u8(0);
  w.u8(0);
  for (const Matrix& block : features.per_class) w.matrix(block);
  w.matrix(features.labels);
  w.matrix(features.model_logits);
  w.save(path);
}

GradientFeatures read_gradients(const std::string& path, DimKind kind) {
  Reader r(path);
  if (r.size() < kGradientHeaderBytes) throw Error(ErrorCode::TruncatedFile, "header is truncated");
  char magic[6];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kGradientMagic, sizeof magic) != 0) throw Error(ErrorCode::ParseError, "bad magic in " + path);
  const std::uint32_t version = r.u32();
  if (version != kGradientVersion) throw Error(ErrorCode::VersionMismatch, "unsupported version " + std::to_string(version));
  const Index m = r.u32();
  const Index d = r.u32();
  const Index c = r.u32();
  const std::uint8_t dtype = r.u8();
  const std::uint8_t labels_kind = r.u8();
  if (m == 0 || d == 0 || c == 0) throw Error(ErrorCode::ParseError, "header dimensions must be positive");
  if (dtype != 0 || labels_kind != 0) throw Error(ErrorCode::ParseError, "unsupported dtype or labels kind");
  GradientFeatures f;
  f.dim_kind = kind;
  f.per_class.reserve(static_cast<std::size_t>(c));
  for (Index k = 0; k < c; ++k) f.per_class.push_back(r.matrix(m, d));
  f.labels = r.matrix(m, c);
  f.model_logits = r.matrix(m, c);
  if (r.remaining() != 0) throw Error(ErrorCode::ParseError, "trailing bytes after payload");
  return f;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::string out = kReportHeader;
  out += '\n';
  for (const ReportRow& row : rows) {
    if (row.method.find_first_of(",\n\"") != std::string::npos) throw Error(ErrorCode::BadArgument, "method name must be CSV-safe");
    const metrics::EvalReport& e = row.report;
    out += row.method + ',' + std::to_string(row.seed) + ',' + std::to_string(row.s);
    for (double v : {e.compression_ratio, e.fidelity, e.accuracy, e.mse, e.coverage, e.reconstruction_error, e.condition,
                     e.min_eig})
      out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

void write_report(const std::vector<ReportRow>& rows, const std::string& path) { write_text(format_report(rows), path); }

std::vector<ReportRow> parse_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) throw Error(ErrorCode::ParseError, "unexpected report header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw Error(ErrorCode::ParseError, "expected 11 columns: " + line);
    ReportRow row;
    row.method = cells[0];
    try {
      row.seed = std::stoull(cells[1]);
      row.s = std::stoll(cells[2]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad integer column: " + line);
    }
    metrics::EvalReport& e = row.report;
    double* fields[] = {&e.compression_ratio, &e.fidelity, &e.accuracy, &e.mse, &e.coverage,
                        &e.reconstruction_error, &e.condition, &e.min_eig};
    for (std::size_t k = 0; k < 8; ++k) *fields[k] = parse_double(cells[3 + k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> read_report(const std::string& path) { return parse_report(read_text(path)); }

void RunConfig::validate() const {
  if (layer_sizes.size() < 2) throw Error(ErrorCode::BadArgument, "layer_sizes needs input and output widths");
  for (Index w : layer_sizes)
    if (w < 1) throw Error(ErrorCode::BadArgument, "layer widths must be positive");
  if (layer_sizes.back() < 2) throw Error(ErrorCode::BadArgument, "need at least two classes");
  parse_activation(activation);
  if (n_train < 2 || n_test < 1) throw Error(ErrorCode::BadArgument, "n_train >= 2 and n_test >= 1 required");
  if (k_sketch && *k_sketch < 1) throw Error(ErrorCode::BadArgument, "k_sketch must be positive");
  if (!(eps_jl > 0.0 && eps_jl < 1.0)) throw Error(ErrorCode::BadEps, "eps_jl must lie in (0,1)");
  if (!(spread > 0.0)) throw Error(ErrorCode::BadArgument, "spread must be positive");
  if (epochs < 0 || batch < 1 || !(lr > 0.0)) throw Error(ErrorCode::BadArgument, "bad training options");
  if (H < 1) throw Error(ErrorCode::BadArgument, "H must be positive");
  auto check_tau = [](double t) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::BadEps, "thresholds must lie in (0,1]");
  };
  check_tau(tau_v);
  check_tau(tau_g);
  if (!(eps_qr > 0.0 && eps_qr < 1.0)) throw Error(ErrorCode::BadEps, "eps_qr must lie in (0,1)");
  if (!(lambda_reg >= 0.0)) throw Error(ErrorCode::BadLambda, "lambda_reg must be non-negative");
  if (scale_kind) parse_scale(*scale_kind);
  const std::set<std::string> known{"distill", "random", "leverage", "fps", "kmeans", "full"};
  if (methods.empty()) throw Error(ErrorCode::BadArgument, "methods must not be empty");
  for (const std::string& m : methods)
    if (!known.count(m)) throw Error(ErrorCode::BadArgument, "unknown method " + m);
  if (seeds.empty()) throw Error(ErrorCode::BadArgument, "seeds must not be empty");
  for (Index b : budgets)
    if (b < 1) throw Error(ErrorCode::BadArgument, "budgets must be positive");
  for (int h : sweep_H)
    if (h < 1) throw Error(ErrorCode::BadArgument, "sweep_H entries must be positive");
  for (double t : sweep_tau_v) check_tau(t);
  for (double t : sweep_tau_g) check_tau(t);
}

RunConfig parse_config(const std::string& json_text) {
  static const std::set<std::string> known{
      "seed",    "layer_sizes", "activation", "n_train", "n_test",  "k_sketch",   "eps_jl",     "spread",
      "epochs",  "lr",          "batch",      "H",       "tau_v",   "tau_g",      "eps_qr",     "lambda_reg",
      "scale_kind", "methods",  "seeds",      "budgets", "sweep_H", "sweep_tau_v", "sweep_tau_g", "out_dir"};
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  for (const auto& item : obj.items())
    if (!known.count(item.key())) throw Error(ErrorCode::UnknownField, "unknown config key " + item.key());
  RunConfig c;
  try {
    take(obj, "seed", c.seed);
    take(obj, "layer_sizes", c.layer_sizes);
    take(obj, "activation", c.activation);
    take(obj, "n_train", c.n_train);
    take(obj, "n_test", c.n_test);
    if (obj.contains("k_sketch") && !obj.at("k_sketch").is_null()) c.k_sketch = obj.at("k_sketch").get<Index>();
    take(obj, "eps_jl", c.eps_jl);
    take(obj, "spread", c.spread);
    take(obj, "epochs", c.epochs);
    take(obj, "lr", c.lr);
    take(obj, "batch", c.batch);
    take(obj, "H", c.H);
    take(obj, "tau_v", c.tau_v);
    take(obj, "tau_g", c.tau_g);
    take(obj, "eps_qr", c.eps_qr);
    take(obj, "lambda_reg", c.lambda_reg);
    if (obj.contains("scale_kind") && !obj.at("scale_kind").is_null()) c.scale_kind = obj.at("scale_kind").get<std::string>();
    take(obj, "methods", c.methods);
    take(obj, "seeds", c.seeds);
    take(obj, "budgets", c.budgets);
    take(obj, "sweep_H", c.sweep_H);
    take(obj, "sweep_tau_v", c.sweep_tau_v);
    take(obj, "sweep_tau_g", c.sweep_tau_g);
    take(obj, "out_dir", c.out_dir);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  c.validate();
  return c;
}

RunConfig read_config(const std::string& path) { return parse_config(read_text(path)); }

std::string config_to_json(const RunConfig& c) {
  json obj{{"seed", c.seed},       {"layer_sizes", c.layer_sizes}, {"activation", c.activation},
           {"n_train", c.n_train}, {"n_test", c.n_test},           {"eps_jl", c.eps_jl},
           {"spread", c.spread},   {"epochs", c.epochs},           {"lr", c.lr},
           {"batch", c.batch},     {"H", c.H},                     {"tau_v", c.tau_v},
           {"tau_g", c.tau_g},     {"eps_qr", c.eps_qr},           {"lambda_reg", c.lambda_reg},
           {"methods", c.methods}, {"seeds", c.seeds},             {"budgets", c.budgets},
           {"sweep_H", c.sweep_H}, {"sweep_tau_v", c.sweep_tau_v}, {"sweep_tau_g", c.sweep_tau_g},
           {"out_dir", c.out_dir}};
  obj["k_sketch"] = c.k_sketch ? json(*c.k_sketch) : json(nullptr);
  obj["scale_kind"] = c.scale_kind ? json(*c.scale_kind) : json(nullptr);
  return obj.dump(2);
}

ScaleKind parse_scale(const std::string& name) {
  if (name == "none") return ScaleKind::None;
  if (name == "inv_k") return ScaleKind::InvK;
  throw Error(ErrorCode::BadArgument, "scale_kind must be none or inv_k");
}

std::string scale_name(ScaleKind kind) { return kind == ScaleKind::None ? "none" : "inv_k"; }

tangent::Activation parse_activation(const std::string& name) {
  if (name == "tanh") return tangent::Activation::Tanh;
  if (name == "relu") return tangent::Activation::Relu;
  throw Error(ErrorCode::BadArgument, "activation must be tanh or relu");
}

namespace {

std::string activation_name(tangent::Activation a) { return a == tangent::Activation::Tanh ? "tanh" : "relu"; }
std::string dim_name(DimKind k) { return k == DimKind::RawParams ? "raw" : "sketched"; }
DimKind parse_dim(const std::string& s) {
  if (s == "raw") return DimKind::RawParams;
  if (s == "sketched") return DimKind::Sketched;
  throw Error(ErrorCode::ParseError, "unknown dim kind " + s);
}

}  // namespace

void save_dataset(const tangent::LabeledDataset& data, const std::string& path) {
  Archive a;
  a.meta["class_count"] = data.class_count;
  a.meta["labels"] = data.labels;
  a.add("inputs", data.inputs);
  save_archive("dataset", std::move(a), path);
}

tangent::LabeledDataset load_dataset(const std::string& path) {
  const Archive a = load_archive("dataset", path);
  tangent::LabeledDataset d;
  try {
    d.class_count = a.meta.at("class_count").get<int>();
    d.labels = a.meta.at("labels").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  d.inputs = a.get("inputs");
  if (static_cast<Index>(d.labels.size()) != d.inputs.rows()) throw Error(ErrorCode::ParseError, "label count mismatch");
  return d;
}

void save_params(const tangent::MlpParams& params, const std::string& path) {
  Archive a;
  a.meta["layer_sizes"] = params.layer_sizes;
  a.meta["activation"] = activation_name(params.activation);
  a.add("theta", params.theta);
  save_archive("mlp", std::move(a), path);
}

tangent::MlpParams load_params(const std::string& path) {
  const Archive a = load_archive("mlp", path);
  tangent::MlpParams p;
  try {
    p.layer_sizes = a.meta.at("layer_sizes").get<std::vector<Index>>();
    p.activation = parse_activation(a.meta.at("activation").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  p.theta = a.get("theta").col(0);
  if (p.theta.size() != tangent::param_count(p.layer_sizes)) throw Error(ErrorCode::ParseError, "parameter count mismatch");
  return p;
}

void save_sketch(const sketch::SketchOperator& op, const std::string& path) {
  Archive a;
  a.meta["P"] = op.source_dim();
  a.meta["k"] = op.target_dim();
  a.meta["seed"] = op.seed;
  a.meta["eps_target"] = op.eps_target;
  save_archive("sketch", std::move(a), path);
}

sketch::SketchOperator load_sketch(const std::string& path) {
  const Archive a = load_archive("sketch", path);
  try {
    return sketch::sample_orthonormal(a.meta.at("P").get<Index>(), a.meta.at("k").get<Index>(),
                                      a.meta.at("seed").get<std::uint64_t>(), a.meta.at("eps_target").get<double>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

void save_model(const krr::KrrModel& model, const std::string& path) {
  Archive a;
  a.meta["lambda_reg"] = model.lambda_reg;
  a.meta["rank"] = model.rank ? json(*model.rank) : json(nullptr);
  a.meta["scale_kind"] = scale_name(model.scale_kind);
  a.meta["dim_kind"] = dim_name(model.dim_kind);
  a.meta["classes"] = model.classes();
  a.add("targets", model.targets);
  a.add("alpha", model.alpha);
  for (Index c = 0; c < model.classes(); ++c) {
    const std::string tag = std::to_string(c);
    a.add("basis" + tag, model.basis[c]);
    if (static_cast<Index>(model.eig.size()) == model.classes()) {
      a.add("eigvals" + tag, model.eig[c].values);
      a.add("eigvecs" + tag, model.eig[c].vectors);
    }
  }
  save_archive("krr", std::move(a), path);
}

krr::KrrModel load_model(const std::string& path) {
  const Archive a = load_archive("krr", path);
  krr::KrrModel m;
  Index classes = 0;
  try {
    m.lambda_reg = a.meta.at("lambda_reg").get<double>();
    if (!a.meta.at("rank").is_null()) m.rank = a.meta.at("rank").get<Index>();
    m.scale_kind = parse_scale(a.meta.at("scale_kind").get<std::string>());
    m.dim_kind = parse_dim(a.meta.at("dim_kind").get<std::string>());
    classes = a.meta.at("classes").get<Index>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  m.targets = a.get("targets");
  m.alpha = a.get("alpha");
  for (Index c = 0; c < classes; ++c) {
    const std::string tag = std::to_string(c);
    m.basis.push_back(a.get("basis" + tag));
    numerics::EigenSystem eig;
    eig.values = a.get("eigvals" + tag).col(0);
    eig.vectors = a.get("eigvecs" + tag);
    m.eig.push_back(std::move(eig));
  }
  return m;
}

void save_indices(const std::vector<Index>& indices, const std::string& method, std::uint64_t seed,
                  const std::string& path) {
  Archive a;
  a.meta["method"] = method;
  a.meta["seed"] = seed;
  a.add("indices", to_column(indices));
  save_archive("selection", std::move(a), path);
}

std::vector<Index> load_indices(const std::string& path) {
  return from_column(load_archive("selection", path).get("indices"));
}

void save_matrix(const Matrix& m, const std::string& path) {
  Archive a;
  a.add("data", m);
  save_archive("matrix", std::move(a), path);
}

Matrix load_matrix(const std::string& path) { return load_archive("matrix", path).get("data"); }

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dntk::io
