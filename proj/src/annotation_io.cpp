#include "scriptdet/annotation_io.hpp"

#include "scriptdet/detail/parallel.hpp"
#include "scriptdet/detail/strings.hpp"
#include "scriptdet/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace scriptdet {

namespace fs = std::filesystem;
using detail::format_number;
using detail::parse_double;
using detail::split;
using detail::trim;

namespace {

std::string_view strip_line_end(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

std::array<Point2, 4> parse_coords(std::span<const std::string_view> fields) {
  std::array<Point2, 4> pts{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto x = parse_double(fields[2 * i]);
    const auto y = parse_double(fields[2 * i + 1]);
    if (!x || !y) throw Error(ErrorCode::MalformedLine, "non-numeric coordinate");
    if (!std::isfinite(*x) || !std::isfinite(*y)) throw Error(ErrorCode::MalformedLine, "non-finite coordinate");
    pts[i] = {*x, *y};
  }
  return pts;
}

double parse_confidence(std::string_view field) {
  const auto c = parse_double(field);
  if (!c) throw Error(ErrorCode::MalformedLine, "non-numeric confidence '" + std::string(field) + "'");
  if (!std::isfinite(*c) || *c < 0.0 || *c > 1.0) {
    throw Error(ErrorCode::ConfidenceOutOfRange, "confidence " + std::string(trim(field)) + " outside [0,1]");
  }
  return *c;
}

DetectionRecord detection_from_fields(std::span<const std::string_view> f, std::string_view image_id,
                                      ParseMode mode) {
  if (f.size() != 9 && f.size() != 10) {
    throw Error(ErrorCode::MalformedLine, "expected 9 or 10 fields, got " + std::to_string(f.size()));
  }
  DetectionRecord r{std::string(image_id), normalize_quad(parse_coords(f.first(8)), mode), parse_confidence(f[8]),
                    std::nullopt};
  if (f.size() == 10) {
    const auto id = trim(f[9]);
    if (!id.empty()) r.region_id = std::string(id);
  }
  return r;
}

// Feeds every non-blank line to `parse`, applying the strict/lenient policy.
template <typename Record, typename ParseFn>
ParsedFile<Record> parse_lines(std::istream& in, ParseMode mode, ParseFn&& parse) {
  ParsedFile<Record> out;
  out.stats.files = 1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = strip_line_end(line);
    if (line_no == 1) text = detail::strip_bom(text);
    if (trim(text).empty()) continue;
    try {
      out.records.push_back(parse(text));
    } catch (const Error& e) {
      if (mode == ParseMode::Strict) throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
      ++out.stats.skipped;
      if (e.code() == ErrorCode::DegenerateQuad) ++out.stats.degenerate;
    }
  }
  out.stats.records = out.records.size();
  return out;
}

std::vector<fs::path> list_txt_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

template <typename Record, typename ParseFile>
PerImage<Record> load_per_image(const std::vector<fs::path>& files, const std::vector<std::string>& ids,
                                unsigned jobs, ParseFile&& parse_file) {
  std::vector<ParsedFile<Record>> parsed(files.size());
  detail::parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      auto in = open_input(files[i]);
      parsed[i] = parse_file(in, ids[i]);
    } catch (const Error& e) {
      throw Error(e.code(), files[i].filename().string() + ": " + e.what());
    }
  });
  PerImage<Record> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    out.stats += parsed[i].stats;
    auto& slot = out.by_image[ids[i]];
    std::move(parsed[i].records.begin(), parsed[i].records.end(), std::back_inserter(slot));
  }
  return out;
}

struct EmbeddingRow {
  std::string key;
  std::vector<double> values;
};

std::optional<std::size_t> parse_dim_header(std::string_view line) {
  const auto f = detail::split_ws(line);
  if (f.size() != 2 || f[0] != "dim") return std::nullopt;
  const auto d = detail::parse_int(f[1]);
  if (!d || *d <= 0) throw Error(ErrorCode::MalformedLine, "bad dimension header '" + std::string(line) + "'");
  return static_cast<std::size_t>(*d);
}

// Reads "key v1 ... vD" rows; the dimension comes from the header or, when
// the header is optional and absent, from the first row.
std::vector<EmbeddingRow> read_embedding_rows(std::istream& in, bool header_required, std::size_t& dim) {
  std::vector<EmbeddingRow> rows;
  std::optional<std::size_t> declared;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = trim(line_no == 1 ? detail::strip_bom(line) : std::string_view(line));
    if (text.empty()) continue;
    const auto where = "line " + std::to_string(line_no);
    if (first) {
      first = false;
      declared = parse_dim_header(text);
      if (declared) continue;
      if (header_required) throw Error(ErrorCode::MalformedLine, where + ": missing 'dim <D>' header");
    }
    const auto f = detail::split_ws(text);
    EmbeddingRow row{std::string(f[0]), {}};
    if (!declared) declared = f.size() - 1;
    if (f.size() - 1 != *declared) {
      throw Error(ErrorCode::DimensionMismatch, where + ": '" + row.key + "' has " + std::to_string(f.size() - 1) +
                                                    " values, expected " + std::to_string(*declared));
    }
    row.values.reserve(f.size() - 1);
    for (std::size_t i = 1; i < f.size(); ++i) {
      const auto v = parse_double(f[i]);
      if (!v) throw Error(ErrorCode::MalformedLine, where + ": non-numeric value '" + std::string(f[i]) + "'");
      if (!std::isfinite(*v)) throw Error(ErrorCode::NonFiniteValue, where + ": non-finite value in '" + row.key + "'");
      row.values.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (!declared || *declared == 0) throw Error(ErrorCode::MalformedLine, "embedding file declares no dimension");
  dim = *declared;
  return rows;
}

}  // namespace

ParseStats& ParseStats::operator+=(const ParseStats& o) {
  files += o.files;
  records += o.records;
  skipped += o.skipped;
  degenerate += o.degenerate;
  dont_care += o.dont_care;
  return *this;
}

GroundTruthRecord parse_gt_line(std::string_view line, std::string_view image_id, const ParseOptions& options) {
  line = strip_line_end(detail::strip_bom(line));
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (int i = 0; i < 9; ++i) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      throw Error(ErrorCode::MalformedLine, "expected at least 10 comma-separated fields");
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  const std::string_view transcription = line.substr(start);

  const auto pts = parse_coords(std::span(fields).first(8));
  ScriptClass script(fields[8]);
  const bool ignored = options.ignore.contains(script);
  if (options.mode == ParseMode::Strict && !options.vocabulary.empty() && !ignored &&
      !options.vocabulary.contains(script)) {
    throw Error(ErrorCode::UnknownScript, "script '" + script.name() + "' is not declared");
  }
  const bool dont_care = transcription == kDontCareTranscription || ignored;
  return GroundTruthRecord{std::string(image_id), normalize_quad(pts, options.mode), std::move(script),
                           std::string(transcription), dont_care};
}

DetectionRecord parse_detection_line(std::string_view line, std::string_view image_id, ParseMode mode) {
  const auto f = split(strip_line_end(detail::strip_bom(line)), ',');
  return detection_from_fields(f, image_id, mode);
}

DetectionRecord parse_combined_detection_line(std::string_view line, ParseMode mode) {
  const auto f = split(strip_line_end(detail::strip_bom(line)), ',');
  if (f.size() < 2) throw Error(ErrorCode::MalformedLine, "missing image_id column");
  const auto image_id = trim(f[0]);
  if (image_id.empty()) throw Error(ErrorCode::MalformedLine, "empty image_id");
  return detection_from_fields(std::span(f).subspan(1), image_id, mode);
}

namespace {
void append_quad(std::string& out, const Quad& q) {
  for (const auto& p : q.vertices()) {
    out += format_number(p.x);
    out += ',';
    out += format_number(p.y);
    out += ',';
  }
}
}  // namespace

std::string region_key(const DetectionRecord& r, std::size_t index) {
  return r.region_id ? *r.region_id : r.image_id + "_" + std::to_string(index);
}

std::string serialize_gt_line(const GroundTruthRecord& r) {
  std::string out;
  append_quad(out, r.quad);
  out += r.script.name();
  out += ',';
  out += r.transcription;
  return out;
}

std::string serialize_detection_line(const DetectionRecord& r, bool with_image_id) {
  std::string out;
  if (with_image_id) {
    out += r.image_id;
    out += ',';
  }
  append_quad(out, r.quad);
  out += format_number(r.confidence);
  if (r.region_id) {
    out += ',';
    out += *r.region_id;
  }
  return out;
}

ParsedFile<GroundTruthRecord> parse_gt_stream(std::istream& in, std::string_view image_id,
                                              const ParseOptions& options) {
  auto out = parse_lines<GroundTruthRecord>(
      in, options.mode, [&](std::string_view text) { return parse_gt_line(text, image_id, options); });
  out.stats.dont_care =
      static_cast<std::size_t>(std::count_if(out.records.begin(), out.records.end(), [](const auto& r) { return r.dont_care; }));
  return out;
}

ParsedFile<DetectionRecord> parse_detection_stream(std::istream& in, std::string_view image_id, ParseMode mode) {
  return parse_lines<DetectionRecord>(
      in, mode, [&](std::string_view text) { return parse_detection_line(text, image_id, mode); });
}

ParsedFile<DetectionRecord> parse_combined_detection_stream(std::istream& in, ParseMode mode) {
  return parse_lines<DetectionRecord>(
      in, mode, [&](std::string_view text) { return parse_combined_detection_line(text, mode); });
}

void write_detection_stream(std::ostream& out, std::span<const DetectionRecord> records, bool with_image_id) {
  for (const auto& r : records) out << serialize_detection_line(r, with_image_id) << '\n';
}

GroundTruthSet load_gt_dir(const fs::path& dir, const ParseOptions& options, unsigned jobs) {
  std::vector<fs::path> files;
  std::vector<std::string> ids;
  for (auto& p : list_txt_files(dir)) {
    const auto stem = p.stem().string();
    if (stem.rfind("gt_", 0) != 0 || stem.size() == 3) continue;
    ids.push_back(stem.substr(3));
    files.push_back(std::move(p));
  }
  return load_per_image<GroundTruthRecord>(files, ids, jobs, [&](std::istream& in, const std::string& id) {
    return parse_gt_stream(in, id, options);
  });
}

DetectionSet load_detection_dir(const fs::path& dir, ParseMode mode, unsigned jobs) {
  std::vector<fs::path> files;
  std::vector<std::string> ids;
  for (auto& p : list_txt_files(dir)) {
    auto stem = p.stem().string();
    if (stem.rfind("res_", 0) == 0 && stem.size() > 4) stem = stem.substr(4);
    ids.push_back(std::move(stem));
    files.push_back(std::move(p));
  }
  return load_per_image<DetectionRecord>(files, ids, jobs, [&](std::istream& in, const std::string& id) {
    return parse_detection_stream(in, id, mode);
  });
}

DetectionSet load_detection_file(const fs::path& file, ParseMode mode) {
  auto in = open_input(file);
  auto parsed = parse_combined_detection_stream(in, mode);
  DetectionSet out;
  out.stats = parsed.stats;
  for (auto& r : parsed.records) out.by_image[r.image_id].push_back(std::move(r));
  return out;
}

std::map<std::string, EmbeddingVector> load_embeddings(std::istream& in) {
  std::size_t dim = 0;
  std::map<std::string, EmbeddingVector> out;
  for (auto& row : read_embedding_rows(in, true, dim)) {
    if (out.contains(row.key)) throw Error(ErrorCode::DuplicateRegionId, "region id '" + row.key + "' repeated");
    out.emplace(row.key, EmbeddingVector{std::move(row.values)});
  }
  return out;
}

void write_embeddings(std::ostream& out, const std::map<std::string, EmbeddingVector>& embeddings) {
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.begin()->second.dim();
  out << "dim " << dim << '\n';
  for (const auto& [id, v] : embeddings) {
    out << id;
    for (double x : v.values) out << ' ' << format_number(x);
    out << '\n';
  }
}

ClassEmbeddingTable load_class_embeddings(std::istream& in, const ClassSplit& split) {
  ClassEmbeddingTable table;
  for (auto& row : read_embedding_rows(in, false, table.dim)) {
    ScriptClass c(row.key);
    if (table.entries.contains(c)) throw Error(ErrorCode::DuplicateRegionId, "class '" + c.name() + "' repeated");
    table.entries.emplace(std::move(c), EmbeddingVector{std::move(row.values)});
  }
  for (const auto& c : split.all()) {
    if (!table.contains(c)) throw Error(ErrorCode::MissingClass, "class table lacks '" + c.name() + "'");
  }
  return table;
}

std::map<std::string, ImageMeta> load_image_meta(std::istream& in) {
  std::map<std::string, ImageMeta> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line_no == 1 ? detail::strip_bom(line) : std::string_view(line));
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 3) throw Error(ErrorCode::MalformedLine, "image meta line " + std::to_string(line_no));
    const auto w = detail::parse_int(f[1]);
    const auto h = detail::parse_int(f[2]);
    if (!w || !h) {
      if (line_no == 1) continue;  // header
      throw Error(ErrorCode::MalformedLine, "image meta line " + std::to_string(line_no) + ": non-integer size");
    }
    if (*w <= 0 || *h <= 0) {
      throw Error(ErrorCode::MalformedLine, "image meta line " + std::to_string(line_no) + ": non-positive size");
    }
    ImageMeta meta{std::string(trim(f[0])), static_cast<int>(*w), static_cast<int>(*h)};
    out.emplace(meta.image_id, meta);
  }
  return out;
}

std::optional<ImageFilter> parse_image_filter(std::string_view s) {
  if (s == "all") return ImageFilter::All;
  if (s == "seen") return ImageFilter::Seen;
  if (s == "unseen") return ImageFilter::Unseen;
  if (s == "exclusive") return ImageFilter::Exclusive;
  return std::nullopt;
}

std::string_view to_string(ImageFilter f) {
  switch (f) {
    case ImageFilter::All: return "all";
    case ImageFilter::Seen: return "seen";
    case ImageFilter::Unseen: return "unseen";
    case ImageFilter::Exclusive: return "exclusive";
  }
  return "all";
}

std::vector<std::string> filter_images(const GroundTruthSet& gt, const ClassSplit& split, ImageFilter filter) {
  std::vector<std::string> out;
  for (const auto& [id, records] : gt.by_image) {
    bool any = false;
    bool all_seen = true;
    bool all_unseen = true;
    for (const auto& r : records) {
      if (r.dont_care) continue;
      any = true;
      all_seen = all_seen && split.seen.contains(r.script);
      all_unseen = all_unseen && split.unseen.contains(r.script);
    }
    bool keep = false;
    switch (filter) {
      case ImageFilter::All: keep = true; break;
      case ImageFilter::Seen: keep = any && all_seen; break;
      case ImageFilter::Unseen: keep = any && all_unseen; break;
      case ImageFilter::Exclusive: keep = any && (all_seen || all_unseen); break;
    }
    if (keep) out.push_back(id);
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace scriptdet
