#include "scriptdet/zeroshot.hpp"

#include "scriptdet/detail/strings.hpp"
#include "scriptdet/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace scriptdet {

namespace {
constexpr double kTieTolerance = 1e-12;
}

std::optional<ScoreMode> parse_score_mode(std::string_view s) {
  if (s == "detector") return ScoreMode::Detector;
  if (s == "similarity") return ScoreMode::Similarity;
  if (s == "product") return ScoreMode::Product;
  return std::nullopt;
}

std::string_view to_string(ScoreMode m) {
  switch (m) {
    case ScoreMode::Detector: return "detector";
    case ScoreMode::Similarity: return "similarity";
    case ScoreMode::Product: return "product";
  }
  return "detector";
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vectors of dimension " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ab += a.values[i] * b.values[i];
    aa += a.values[i] * a.values[i];
    bb += b.values[i] * b.values[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::ZeroNormVector, "cosine similarity of a zero vector");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

ScriptAssignment classify_region(const EmbeddingVector& v, const ClassEmbeddingTable& table, const ScriptSet& allowed,
                                 std::string region_id) {
  if (allowed.empty()) throw Error(ErrorCode::EmptyAllowedSet, "no candidate classes");
  // ScriptSet iterates in name order, so the first of a tied group wins.
  const ScriptClass* best = nullptr;
  double best_sim = 0.0;
  for (const auto& c : allowed) {
    const double sim = cosine_similarity(v, table.at(c));
    if (best == nullptr || sim > best_sim + kTieTolerance) {
      best = &c;
      best_sim = sim;
    }
  }
  return ScriptAssignment{std::move(region_id), *best, best_sim, rank_score(1.0, best_sim, ScoreMode::Similarity)};
}

double rank_score(double det_confidence, double similarity, ScoreMode mode) {
  const double sim01 = std::clamp((1.0 + similarity) / 2.0, 0.0, 1.0);
  switch (mode) {
    case ScoreMode::Detector: return det_confidence;
    case ScoreMode::Similarity: return sim01;
    case ScoreMode::Product: return det_confidence * sim01;
  }
  return det_confidence;
}

void write_assignments_csv(std::ostream& out, std::span<const AssignmentRow> rows) {
  using detail::format_number;
  out << "image_id,region_id,script,similarity,rank_score\n";
  for (const auto& r : rows) {
    const auto& a = r.assignment;
    out << r.image_id << ',' << a.region_id << ',' << a.script.name() << ',' << format_number(a.similarity) << ','
        << format_number(a.rank_score) << '\n';
  }
}

std::vector<AssignmentRow> read_assignments_csv(std::istream& in) {
  std::vector<AssignmentRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line_no == 1 ? detail::strip_bom(line) : std::string_view(line));
    if (text.empty() || line_no == 1) continue;
    const auto f = detail::split(text, ',');
    const auto where = "assignment line " + std::to_string(line_no);
    if (f.size() != 5) throw Error(ErrorCode::MalformedLine, where + ": expected 5 fields");
    const auto sim = detail::parse_double(f[3]);
    const auto score = detail::parse_double(f[4]);
    if (!sim || !score) throw Error(ErrorCode::MalformedLine, where + ": non-numeric score");
    rows.push_back(AssignmentRow{std::string(detail::trim(f[0])),
                                 ScriptAssignment{std::string(detail::trim(f[1])), ScriptClass(f[2]), *sim, *score}});
  }
  return rows;
}

}  // namespace scriptdet
