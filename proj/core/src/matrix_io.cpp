#include "graphon/matrix_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace graphon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_json(const fs::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

// JSON has no NaN or infinity.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
T field(const json& doc, const char* key, const fs::path& path) {
  if (!doc.contains(key)) throw IoError(path.string() + ": missing field '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": bad field '" + key + "': " + e.what());
  }
}

json noise_json(const NoiseModel& noise) {
  json j = {{"kind", noise.name()}};
  if (const auto* b = std::get_if<Binomial>(&noise.kind())) j["trials"] = b->trials;
  if (const auto* p = std::get_if<ScaledPoisson>(&noise.kind())) j["exposure"] = number(p->exposure);
  if (const auto* g = std::get_if<Gaussian>(&noise.kind())) j["variance"] = number(g->variance);
  return j;
}

NoiseModel noise_from_json(const json& j, const fs::path& path) {
  if (j.is_string()) return parse_noise_spec(j.get<std::string>());
  const auto kind = field<std::string>(j, "kind", path);
  if (kind == "bernoulli") return NoiseModel::bernoulli();
  if (kind == "binomial") return NoiseModel::binomial(field<int>(j, "trials", path));
  if (kind == "poisson") return NoiseModel::scaled_poisson(field<double>(j, "exposure", path));
  if (kind == "gaussian") return NoiseModel::gaussian(field<double>(j, "variance", path));
  throw IoError(path.string() + ": unknown noise kind '" + kind + "'");
}

double parse_double(std::string_view text, const fs::path& path, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const fs::path& path, const Matrix& M) {
  auto out = open_out(path);
  std::string line;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) line += ',';
      line += format_double(M(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_double(rest.substr(0, comma), path, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) cols = count;
    if (count != cols) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                    " columns, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw IoError(path.string() + ": empty matrix");
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), M.data());
  return M;
}

NoiseModel parse_noise_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto number_arg = [&](double fallback) {
    if (arg.empty()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad noise parameter in '" + text + "'");
    }
  };
  if (kind == "bernoulli") return NoiseModel::bernoulli();
  if (kind == "binomial") return NoiseModel::binomial(static_cast<int>(number_arg(1.0)));
  if (kind == "poisson") return NoiseModel::scaled_poisson(number_arg(1.0));
  if (kind == "gaussian") return NoiseModel::gaussian(number_arg(1.0));
  throw ConfigError("unknown noise model '" + text + "'");
}

std::string to_spec(const NoiseModel& noise) {
  if (const auto* b = std::get_if<Binomial>(&noise.kind())) return "binomial:" + std::to_string(b->trials);
  if (const auto* p = std::get_if<ScaledPoisson>(&noise.kind())) return "poisson:" + format_double(p->exposure);
  if (const auto* g = std::get_if<Gaussian>(&noise.kind())) return "gaussian:" + format_double(g->variance);
  return "bernoulli";
}

void write_meta(const fs::path& path, const DatasetMeta& meta) {
  json doc = {{"n", meta.n},
              {"m", meta.m},
              {"noise_model", noise_json(meta.noise)},
              {"rho", number(meta.rho)},
              {"seed", meta.seed},
              {"graphon", meta.graphon},
              {"K", meta.K},
              {"L", meta.L},
              {"graphon_seed", meta.graphon_seed},
              {"second_copy", meta.has_second_copy}};
  doc["missing_p"] = meta.missing_p ? number(*meta.missing_p) : json(nullptr);
  save_json(path, doc);
}

DatasetMeta read_meta(const fs::path& path) {
  const json doc = load_json(path);
  DatasetMeta meta;
  meta.n = field<int>(doc, "n", path);
  meta.m = field<int>(doc, "m", path);
  meta.noise = noise_from_json(doc.at("noise_model"), path);
  meta.rho = field<double>(doc, "rho", path);
  meta.seed = field<std::uint64_t>(doc, "seed", path);
  meta.graphon = doc.value("graphon", "");
  meta.K = doc.value("K", 0);
  meta.L = doc.value("L", 0);
  meta.graphon_seed = doc.value("graphon_seed", std::uint64_t{0});
  meta.has_second_copy = doc.value("second_copy", false);
  if (doc.contains("missing_p") && !doc["missing_p"].is_null()) meta.missing_p = doc["missing_p"].get<double>();
  return meta;
}

Graphon graphon_from_meta(const DatasetMeta& meta) {
  if (meta.graphon.empty()) throw ConfigError("metadata does not name a graphon");
  return make_standard_graphon(parse_standard_graphon(meta.graphon),
                               {.K = meta.K, .L = meta.L, .rho = meta.rho, .seed = meta.graphon_seed});
}

void write_latents(const fs::path& path, const Latents& latents) {
  json u = json::array();
  json v = json::array();
  for (double x : latents.u) u.push_back(number(x));
  for (double x : latents.v) v.push_back(number(x));
  save_json(path, {{"u", u}, {"v", v}});
}

Latents read_latents(const fs::path& path) {
  const json doc = load_json(path);
  return {field<std::vector<double>>(doc, "u", path), field<std::vector<double>>(doc, "v", path)};
}

void write_model(const fs::path& path, const FitReport& report) {
  const auto& model = report.model;
  json q = json::array();
  for (Eigen::Index k = 0; k < model.Q.rows(); ++k) {
    for (Eigen::Index l = 0; l < model.Q.cols(); ++l) q.push_back(number(model.Q(k, l)));
  }
  json costs = json::array();
  for (double c : report.cost_trajectory) costs.push_back(number(c));
  save_json(path, {{"K", model.Q.rows()},
                   {"L", model.Q.cols()},
                   {"n", model.n()},
                   {"m", model.m()},
                   {"Q", q},
                   {"row_labels", model.rows.labels()},
                   {"col_labels", model.cols.labels()},
                   {"cost_trajectory", costs},
                   {"iterations", report.iterations},
                   {"init", report.init_used},
                   {"restart_index", report.restart_index},
                   {"seed", report.seed}});
}

FitReport read_model(const fs::path& path) {
  const json doc = load_json(path);
  const int K = field<int>(doc, "K", path);
  const int L = field<int>(doc, "L", path);
  const auto q = field<std::vector<double>>(doc, "Q", path);
  if (K < 1 || L < 1 || q.size() != static_cast<std::size_t>(K) * static_cast<std::size_t>(L)) {
    throw IoError(path.string() + ": Q does not have K * L entries");
  }
  Matrix Q(K, L);
  std::copy(q.begin(), q.end(), Q.data());
  FitReport report;
  try {
    report.model = BlockModel(std::move(Q), Assignment(field<std::vector<int>>(doc, "row_labels", path), K),
                              Assignment(field<std::vector<int>>(doc, "col_labels", path), L));
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  report.cost_trajectory = doc.value("cost_trajectory", std::vector<double>{});
  report.iterations = doc.value("iterations", 0);
  report.init_used = doc.value("init", "");
  report.restart_index = doc.value("restart_index", 0);
  report.seed = doc.value("seed", std::uint64_t{0});
  return report;
}

HyperGrid read_grid(const fs::path& path) {
  const json doc = load_json(path);
  const json& list = doc.is_object() ? doc.at("entries") : doc;
  if (!list.is_array()) throw IoError(path.string() + ": grid must be a list of entries");
  HyperGrid grid;
  for (const auto& e : list) {
    grid.entries.push_back({field<int>(e, "K", path), field<int>(e, "L", path), e.value("n0", 0), e.value("m0", 0)});
  }
  return grid;
}

void write_ewa(const fs::path& path, const EwaResult& result, const HyperGrid& grid,
               const std::string& aggregate_path) {
  json entries = json::array();
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const auto& e = grid.entries[l];
    json entry = {{"K", e.K}, {"L", e.L}, {"n0", e.n0}, {"m0", e.m0}};
    if (l < result.weights.size()) entry["weight"] = number(result.weights[l]);
    if (l < result.sq_residuals.size()) entry["sq_residual"] = number(result.sq_residuals[l]);
    entries.push_back(std::move(entry));
  }
  json weights = json::array();
  for (double w : result.weights) weights.push_back(number(w));
  save_json(path, {{"beta", number(result.beta)},
                   {"weights", weights},
                   {"grid", entries},
                   {"aggregate", aggregate_path}});
}

void write_metrics(const fs::path& path, const MetricReport& report) {
  json doc = {{"mse_theta", number(report.mse_theta)}};
  auto optional = [&](const char* key, const std::optional<double>& v) {
    doc[key] = v ? number(*v) : json(nullptr);
  };
  optional("delta_tilde_sq", report.delta_tilde_sq);
  optional("oracle_mse", report.oracle_mse);
  optional("rate_bound", report.rate_bound);
  save_json(path, doc);
}

}  // namespace graphon
