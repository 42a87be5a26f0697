#include "scriptdet/crossscript.hpp"

#include "scriptdet/detail/strings.hpp"
#include "scriptdet/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace scriptdet {

using detail::format_fixed;

namespace {

void sort_by_value_desc(std::vector<LabeledValue>& v) {
  std::sort(v.begin(), v.end(), [](const LabeledValue& a, const LabeledValue& b) {
    return a.value > b.value || (a.value == b.value && a.label < b.label);
  });
}

// Linear interpolation between closest ranks over sorted data.
double quantile(const std::vector<double>& sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::string abbreviation(const ScriptClass& c) {
  std::string s = c.name().substr(0, 2);
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) { return format_fixed(v, 2); }

}  // namespace

double FMeasureMatrix::at(std::size_t train, std::size_t test) const {
  const auto& v = values.at(train).at(test);
  if (!v) {
    throw Error(ErrorCode::MalformedMatrix,
                "missing entry " + scripts[train].name() + " -> " + scripts[test].name());
  }
  return *v;
}

FMeasureMatrix FMeasureMatrix::transposed() const {
  FMeasureMatrix t{scripts, values};
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) t.values[i][j] = values[j][i];
  }
  return t;
}

void FMeasureMatrix::validate() const {
  if (scripts.empty()) throw Error(ErrorCode::MalformedMatrix, "empty matrix");
  const ScriptSet unique(scripts.begin(), scripts.end());
  if (unique.size() != scripts.size()) throw Error(ErrorCode::MalformedMatrix, "repeated script name");
  if (values.size() != size()) throw Error(ErrorCode::MalformedMatrix, "matrix is not square");
  for (std::size_t i = 0; i < size(); ++i) {
    if (values[i].size() != size()) throw Error(ErrorCode::MalformedMatrix, "matrix is not square");
    for (std::size_t j = 0; j < size(); ++j) {
      const auto& v = values[i][j];
      if (!v) {
        if (i != j) throw Error(ErrorCode::MalformedMatrix, "missing off-diagonal entry");
        continue;
      }
      if (!std::isfinite(*v) || *v < 0.0 || *v > 1.0) {
        throw Error(ErrorCode::MalformedMatrix, "entry outside [0,1]");
      }
    }
  }
}

FMeasureMatrix parse_matrix_csv(std::istream& in) {
  FMeasureMatrix m;
  std::vector<ScriptClass> row_names;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line_no == 1 ? detail::strip_bom(line) : std::string_view(line));
    if (text.empty()) continue;
    const auto f = detail::split(text, ',');
    const auto where = "matrix line " + std::to_string(line_no);
    try {
      if (header) {
        header = false;
        for (std::size_t i = 1; i < f.size(); ++i) m.scripts.emplace_back(f[i]);
        continue;
      }
      if (f.size() != m.scripts.size() + 1) throw Error(ErrorCode::MalformedMatrix, where + ": wrong column count");
      row_names.emplace_back(f[0]);
      std::vector<std::optional<double>> row;
      for (std::size_t i = 1; i < f.size(); ++i) {
        if (detail::trim(f[i]).empty()) {
          row.emplace_back();
          continue;
        }
        const auto v = detail::parse_double(f[i]);
        if (!v) throw Error(ErrorCode::MalformedMatrix, where + ": non-numeric entry");
        row.emplace_back(*v);
      }
      m.values.push_back(std::move(row));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedMatrix) throw;
      throw Error(ErrorCode::MalformedMatrix, where + ": " + e.what());
    }
  }
  if (row_names != m.scripts) throw Error(ErrorCode::MalformedMatrix, "row labels must match column labels");
  m.validate();
  return m;
}

void write_matrix_csv(std::ostream& out, const FMeasureMatrix& m) {
  out << "train\\test";
  for (const auto& s : m.scripts) out << ',' << s.name();
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.scripts[i].name();
    for (const auto& v : m.values[i]) {
      out << ',';
      if (v) out << detail::format_number(*v);
    }
    out << '\n';
  }
}

std::vector<ProximityList> proximity_edges(const FMeasureMatrix& m, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold, "proximity threshold must lie in [0,1]");
  }
  std::vector<ProximityList> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    ProximityList list{m.scripts[i], {}};
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j != i && m.at(i, j) >= threshold) list.close.push_back({m.scripts[j], m.at(i, j)});
    }
    sort_by_value_desc(list.close);
    out.push_back(std::move(list));
  }
  return out;
}

std::vector<LabeledSeries> one_train_test_rest(const FMeasureMatrix& m) {
  std::vector<LabeledSeries> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    LabeledSeries s{m.scripts[i], {}};
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j != i) s.values.push_back({m.scripts[j], m.at(i, j)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledSeries> one_test_train_rest(const FMeasureMatrix& m) {
  std::vector<LabeledSeries> out;
  for (std::size_t j = 0; j < m.size(); ++j) {
    LabeledSeries s{m.scripts[j], {}};
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i != j) s.values.push_back({m.scripts[i], m.at(i, j)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

BoxStats box_stats(std::span<const LabeledValue> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "box statistics of no values");
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (const auto& v : values) sorted.push_back(v.value);
  std::sort(sorted.begin(), sorted.end());

  BoxStats s;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  s.median = quantile(sorted, 0.5);
  s.q1 = quantile(sorted, 0.25);
  s.q3 = quantile(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = *std::find_if(sorted.begin(), sorted.end(), [&](double v) { return v >= lo_fence; });
  s.whisker_high = *std::find_if(sorted.rbegin(), sorted.rend(), [&](double v) { return v <= hi_fence; });
  for (const auto& v : values) {
    if (v.value < lo_fence || v.value > hi_fence) s.outliers.push_back(v);
  }
  std::sort(s.outliers.begin(), s.outliers.end(), [](const LabeledValue& a, const LabeledValue& b) {
    return a.value < b.value || (a.value == b.value && a.label < b.label);
  });
  return s;
}

BoxStats box_stats(std::span<const double> values) {
  std::vector<LabeledValue> labeled;
  labeled.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) labeled.push_back({ScriptClass("#" + std::to_string(i)), values[i]});
  return box_stats(labeled);
}

nlohmann::json to_json(const std::vector<ProximityList>& edges) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& list : edges) {
    auto arr = nlohmann::json::array();
    for (const auto& e : list.close) arr.push_back({{"script", e.label.name()}, {"f_measure", e.value}});
    out[list.script.name()] = std::move(arr);
  }
  return out;
}

nlohmann::json to_json(const BoxStats& s) {
  auto outliers = nlohmann::json::array();
  for (const auto& o : s.outliers) outliers.push_back({{"script", o.label.name()}, {"value", o.value}});
  return {{"mean", s.mean},
          {"median", s.median},
          {"q1", s.q1},
          {"q3", s.q3},
          {"whisker_low", s.whisker_low},
          {"whisker_high", s.whisker_high},
          {"outliers", outliers}};
}

std::string render_proximity_svg(const FMeasureMatrix& m, double close, double loose) {
  constexpr double panel = 220.0;
  constexpr double radius = 80.0;
  constexpr std::size_t columns = 4;
  const std::size_t n = m.size();
  const std::size_t rows = (n + columns - 1) / columns;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(panel * static_cast<double>(std::min(n, columns)))
      << "\" height=\"" << px(panel * static_cast<double>(rows)) << "\">\n";
  svg << "<!-- scriptdet proximity graph; close >= " << format_fixed(close, 2) << ", loose >= "
      << format_fixed(loose, 2) << " -->\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = panel * (static_cast<double>(i % columns) + 0.5);
    const double cy = panel * (static_cast<double>(i / columns) + 0.5);
    svg << "<g>\n";
    std::size_t axis = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double theta = 2 * std::numbers::pi * static_cast<double>(axis++) / static_cast<double>(n - 1);
      const double ex = cx + radius * std::cos(theta);
      const double ey = cy + radius * std::sin(theta);
      const double f = m.at(i, j);
      const double dist = radius * (1.0 - f);
      const double mx = cx + dist * std::cos(theta);
      const double my = cy + dist * std::sin(theta);
      const char* colour = f >= close ? "red" : (f >= loose ? "green" : "none");
      svg << "<line x1=\"" << px(cx) << "\" y1=\"" << px(cy) << "\" x2=\"" << px(ex) << "\" y2=\"" << px(ey)
          << "\" stroke=\"cyan\"/>\n";
      svg << "<line x1=\"" << px(cx) << "\" y1=\"" << px(cy) << "\" x2=\"" << px(mx) << "\" y2=\"" << px(my)
          << "\" stroke=\"black\"/>\n";
      svg << "<circle cx=\"" << px(mx) << "\" cy=\"" << px(my) << "\" r=\"5\" fill=\"" << colour
          << "\" stroke=\"black\"/>\n";
      svg << "<text x=\"" << px(cx + (radius + 12) * std::cos(theta)) << "\" y=\""
          << px(cy + (radius + 12) * std::sin(theta)) << "\" font-size=\"11\" text-anchor=\"middle\">"
          << xml_escape(abbreviation(m.scripts[j])) << "</text>\n";
    }
    svg << "<text x=\"" << px(cx) << "\" y=\"" << px(cy + panel / 2 - 8) << "\" font-size=\"13\" text-anchor=\"middle\">"
        << xml_escape(m.scripts[i].name()) << "</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_boxplot_svg(std::span<const LabeledSeries> series, const std::string& title) {
  constexpr double left = 90.0;
  constexpr double plot_w = 400.0;
  constexpr double row_h = 36.0;
  constexpr double top = 40.0;
  const double height = top + row_h * static_cast<double>(series.size()) + 40.0;
  const auto x_of = [&](double f) { return left + plot_w * f; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(left + plot_w + 30) << "\" height=\""
      << px(height) << "\">\n";
  svg << "<text x=\"" << px(left) << "\" y=\"20\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  for (int tick = 0; tick <= 10; ++tick) {
    const double x = x_of(tick / 10.0);
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << px(top) << "\" x2=\"" << px(x) << "\" y2=\"" << px(height - 30)
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << px(x) << "\" y=\"" << px(height - 14) << "\" font-size=\"10\" text-anchor=\"middle\">"
        << format_fixed(tick / 10.0, 1) << "</text>\n";
  }
  for (std::size_t r = 0; r < series.size(); ++r) {
    const auto s = box_stats(series[r].values);
    const double cy = top + row_h * (static_cast<double>(r) + 0.5);
    const double half = row_h * 0.3;
    svg << "<text x=\"" << px(left - 8) << "\" y=\"" << px(cy + 4) << "\" font-size=\"12\" text-anchor=\"end\">"
        << xml_escape(series[r].script.name()) << "</text>\n";
    svg << "<line x1=\"" << px(x_of(s.whisker_low)) << "\" y1=\"" << px(cy) << "\" x2=\"" << px(x_of(s.q1))
        << "\" y2=\"" << px(cy) << "\" stroke=\"black\" stroke-dasharray=\"3,2\"/>\n";
    svg << "<line x1=\"" << px(x_of(s.q3)) << "\" y1=\"" << px(cy) << "\" x2=\"" << px(x_of(s.whisker_high))
        << "\" y2=\"" << px(cy) << "\" stroke=\"black\" stroke-dasharray=\"3,2\"/>\n";
    for (double w : {s.whisker_low, s.whisker_high}) {
      svg << "<line x1=\"" << px(x_of(w)) << "\" y1=\"" << px(cy - half / 2) << "\" x2=\"" << px(x_of(w))
          << "\" y2=\"" << px(cy + half / 2) << "\" stroke=\"black\"/>\n";
    }
    svg << "<rect x=\"" << px(x_of(s.q1)) << "\" y=\"" << px(cy - half) << "\" width=\""
        << px(x_of(s.q3) - x_of(s.q1)) << "\" height=\"" << px(2 * half)
        << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << px(x_of(s.median)) << "\" y1=\"" << px(cy - half) << "\" x2=\"" << px(x_of(s.median))
        << "\" y2=\"" << px(cy + half) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    svg << "<line x1=\"" << px(x_of(s.mean)) << "\" y1=\"" << px(cy - half) << "\" x2=\"" << px(x_of(s.mean))
        << "\" y2=\"" << px(cy + half) << "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    for (const auto& o : s.outliers) {
      svg << "<circle cx=\"" << px(x_of(o.value)) << "\" cy=\"" << px(cy) << "\" r=\"3\" fill=\"none\" "
          << "stroke=\"black\"><title>" << xml_escape(o.label.name()) << "</title></circle>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace scriptdet
