#include "graphon/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "graphon/matrix_io.hpp"

namespace graphon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader = "sweep_value,init,rep,mse,delta_tilde,oracle_mse,rate_bound,runtime_ms,seed";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& text, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("records line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

std::optional<double> parse_optional(const std::string& text, std::size_t line) {
  if (text.empty()) return std::nullopt;
  return parse_number<double>(text, line);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Series {
  std::string label;
  std::string colour;
  std::vector<std::pair<double, double>> points;
  std::vector<std::pair<double, double>> low;   // band, may be empty
  std::vector<std::pair<double, double>> high;
  bool dashed = false;
};

}  // namespace

std::string records_to_csv(const std::vector<CellRecord>& records) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : records) {
    out += format_double(r.sweep_value) + ',' + r.init + ',' + std::to_string(r.rep) + ',' + format_double(r.mse) +
           ',' + (r.delta_tilde ? format_double(*r.delta_tilde) : "") + ',' +
           (r.oracle_mse ? format_double(*r.oracle_mse) : "") + ',' + format_double(r.rate_bound) + ',' +
           format_double(r.runtime_ms) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<CellRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw IoError("records CSV has an unexpected header");
  std::vector<CellRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) throw IoError("records line " + std::to_string(line_no) + ": expected 9 fields");
    CellRecord r;
    r.sweep_value = parse_number<double>(f[0], line_no);
    r.init = f[1];
    r.rep = parse_number<int>(f[2], line_no);
    r.mse = parse_number<double>(f[3], line_no);
    r.delta_tilde = parse_optional(f[4], line_no);
    r.oracle_mse = parse_optional(f[5], line_no);
    r.rate_bound = parse_number<double>(f[6], line_no);
    r.runtime_ms = parse_number<double>(f[7], line_no);
    r.seed = parse_number<std::uint64_t>(f[8], line_no);
    records.push_back(std::move(r));
  }
  return records;
}

std::string summary_to_json(const ExperimentResult& result) {
  json rows = json::array();
  for (const auto& s : result.summary) {
    rows.push_back({{"sweep_value", s.sweep_value},
                    {"init", s.init},
                    {"count", s.count},
                    {"median", s.median},
                    {"q10", s.q10},
                    {"q90", s.q90},
                    {"oracle_median", optional_number(s.oracle_median)},
                    {"rate_bound", s.rate_bound}});
  }
  json doc = {{"name", result.spec.name},
              {"spec", json::parse(to_json(result.spec))},
              {"records", result.records.size()},
              {"summary", rows}};
  return doc.dump(2) + "\n";
}

std::string render_svg(const ExperimentResult& result) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#9467bd", "#8c564b"};

  std::vector<Series> series;
  std::map<std::string, std::size_t> by_init;
  std::map<double, double> oracle;
  std::map<double, double> bound;
  for (const auto& s : result.summary) {
    auto [it, fresh] = by_init.try_emplace(s.init, series.size());
    if (fresh) {
      series.push_back({s.init + " (median)", palette[series.size() % 4], {}, {}, {}, false});
    }
    auto& line = series[it->second];
    line.points.emplace_back(s.sweep_value, s.median);
    line.low.emplace_back(s.sweep_value, s.q10);
    line.high.emplace_back(s.sweep_value, s.q90);
    if (s.oracle_median) oracle.try_emplace(s.sweep_value, *s.oracle_median);
    bound.try_emplace(s.sweep_value, s.rate_bound);
  }
  if (!oracle.empty()) {
    series.push_back({"oracle", "#ff7f0e", {oracle.begin(), oracle.end()}, {}, {}, true});
  }
  if (!bound.empty()) {
    series.push_back({"rate bound", "#2ca02c", {bound.begin(), bound.end()}, {}, {}, true});
  }

  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  auto extend = [&](const std::vector<std::pair<double, double>>& pts) {
    for (const auto& [x, y] : pts) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      if (y > 0.0 && std::isfinite(y)) {
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
    }
  };
  for (const auto& s : series) {
    extend(s.points);
    extend(s.low);
    extend(s.high);
  }

  const double width = 720.0;
  const double height = 480.0;
  const double left = 80.0;
  const double right = 180.0;
  const double top = 40.0;
  const double bottom = 60.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << result.spec.name << "</text>\n";

  if (series.empty() || !std::isfinite(y_lo)) {
    svg << "</svg>\n";
    return svg.str();
  }
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  const double ly_lo = std::floor(std::log10(y_lo));
  const double ly_hi = std::max(std::ceil(std::log10(y_hi)), ly_lo + 1.0);
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) {
    const double ly = std::log10(std::max(y, std::pow(10.0, ly_lo)));
    return top + (ly_hi - ly) / (ly_hi - ly_lo) * plot_h;
  };

  svg << "<g stroke=\"black\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\"/>\n</g>\n";
  for (double e = ly_lo; e <= ly_hi; e += 1.0) {
    const double y = py(std::pow(10.0, e));
    svg << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(e)
        << "</text>\n";
  }
  for (double v : result.spec.sweep_values) {
    const double x = px(v);
    svg << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x << "\" y2=\"" << top + plot_h + 4
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << x << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">" << v << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
      << (result.spec.sweep == SweepKind::N ? "n" : "rho") << "</text>\n";
  svg << "<text x=\"20\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 20 " << top + plot_h / 2
      << ")\" text-anchor=\"middle\">squared error</text>\n";

  double legend_y = top + 10;
  for (const auto& s : series) {
    if (!s.low.empty()) {
      svg << "<polygon fill=\"" << s.colour << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (const auto& [x, y] : s.high) svg << px(x) << ',' << py(y) << ' ';
      for (auto it = s.low.rbegin(); it != s.low.rend(); ++it) svg << px(it->first) << ',' << py(it->second) << ' ';
      svg << "\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (const auto& [x, y] : s.points) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    svg << "<line x1=\"" << width - right + 16 << "\" y1=\"" << legend_y << "\" x2=\"" << width - right + 40
        << "\" y2=\"" << legend_y << "\" stroke=\"" << s.colour << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << width - right + 46 << "\" y=\"" << legend_y + 4 << "\">" << s.label << "</text>\n";
    legend_y += 20;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<fs::path> emit_outputs(const ExperimentResult& result, const fs::path& dir,
                                   const std::vector<OutputFormat>& formats) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  for (auto format : formats) {
    fs::path path;
    switch (format) {
      case OutputFormat::Csv:
        path = dir / "records.csv";
        write_text(path, records_to_csv(result.records));
        break;
      case OutputFormat::Json:
        path = dir / "summary.json";
        write_text(path, summary_to_json(result));
        break;
      case OutputFormat::Svg:
        path = dir / "plot.svg";
        write_text(path, render_svg(result));
        break;
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace graphon
