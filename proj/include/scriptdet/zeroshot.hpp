#pragma once

#include "scriptdet/embedding.hpp"
#include "scriptdet/script_class.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace scriptdet {

/// Ranking score used for AP once a region has a script.
enum class ScoreMode {
  Detector,    // detector confidence
  Similarity,  // (1 + cosine) / 2
  Product,     // confidence * (1 + cosine) / 2
};

std::optional<ScoreMode> parse_score_mode(std::string_view s);
std::string_view to_string(ScoreMode m);

struct ScriptAssignment {
  std::string region_id;
  ScriptClass script;
  double similarity = 0.0;  // cosine, in [-1, 1]
  double rank_score = 0.0;  // in [0, 1]
};

/// a.b / (|a||b|), clamped to [-1, 1]. Throws DimensionMismatch, ZeroNormVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Nearest class embedding by cosine similarity among `allowed`. Classes whose
/// similarity is within 1e-12 of the best count as tied; ties go to the
/// lexicographically smallest name.
///
/// The returned rank_score uses ScoreMode::Similarity; callers that rank by
/// detector confidence re-score with rank_score().
///
/// Throws EmptyAllowedSet, MissingClass (allowed class absent from table),
/// DimensionMismatch, ZeroNormVector.
ScriptAssignment classify_region(const EmbeddingVector& v, const ClassEmbeddingTable& table, const ScriptSet& allowed,
                                 std::string region_id = {});

double rank_score(double det_confidence, double similarity, ScoreMode mode);

struct AssignmentRow {
  std::string image_id;
  ScriptAssignment assignment;
};

/// CSV columns: image_id,region_id,script,similarity,rank_score
void write_assignments_csv(std::ostream& out, std::span<const AssignmentRow> rows);
std::vector<AssignmentRow> read_assignments_csv(std::istream& in);

}  // namespace scriptdet
