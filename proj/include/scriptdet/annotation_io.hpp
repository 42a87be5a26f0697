#pragma once

#include "scriptdet/embedding.hpp"
#include "scriptdet/geometry.hpp"
#include "scriptdet/script_class.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scriptdet {

inline constexpr std::string_view kDontCareTranscription = "###";

struct GroundTruthRecord {
  std::string image_id;
  Quad quad;
  ScriptClass script;
  std::string transcription;
  bool dont_care = false;
};

struct DetectionRecord {
  std::string image_id;
  Quad quad;
  double confidence = 0.0;
  std::optional<std::string> region_id;
};

struct ParseOptions {
  ParseMode mode = ParseMode::Strict;
  /// Declared scripts. Empty disables the UnknownScript check.
  ScriptSet vocabulary;
  /// Scripts whose instances are always don't-care (MLT 'symbols', 'mixed',
  /// and 'none' used on unlabelled ### boxes).
  ScriptSet ignore = make_script_set({"symbols", "mixed", "none"});
};

/// Non-fatal parse events; in strict mode the first problem throws instead.
struct ParseStats {
  std::size_t files = 0;
  std::size_t records = 0;
  std::size_t skipped = 0;       // malformed lines dropped in lenient mode
  std::size_t degenerate = 0;    // of which: bad quad geometry
  std::size_t dont_care = 0;

  ParseStats& operator+=(const ParseStats& o);
};

/// "x1,y1,...,x4,y4,script,transcription". Everything after the ninth comma is
/// the transcription, commas included.
/// Throws MalformedLine, UnknownScript (strict mode), DegenerateQuad.
GroundTruthRecord parse_gt_line(std::string_view line, std::string_view image_id = {},
                                const ParseOptions& options = {});

/// "x1,y1,...,x4,y4,score[,region_id]".
/// Throws MalformedLine, ConfidenceOutOfRange, DegenerateQuad.
DetectionRecord parse_detection_line(std::string_view line, std::string_view image_id = {},
                                     ParseMode mode = ParseMode::Strict);

/// Combined-file variant with a leading image_id column.
DetectionRecord parse_combined_detection_line(std::string_view line, ParseMode mode = ParseMode::Strict);

/// The region id of a detection, or "<image_id>_<index>" when the record has
/// none. `index` is the record's position within its image.
std::string region_key(const DetectionRecord& r, std::size_t index);

std::string serialize_gt_line(const GroundTruthRecord& r);
std::string serialize_detection_line(const DetectionRecord& r, bool with_image_id = false);

template <typename Record>
struct ParsedFile {
  std::vector<Record> records;
  ParseStats stats;
};

ParsedFile<GroundTruthRecord> parse_gt_stream(std::istream& in, std::string_view image_id,
                                              const ParseOptions& options = {});
ParsedFile<DetectionRecord> parse_detection_stream(std::istream& in, std::string_view image_id,
                                                   ParseMode mode = ParseMode::Strict);
ParsedFile<DetectionRecord> parse_combined_detection_stream(std::istream& in, ParseMode mode = ParseMode::Strict);

void write_detection_stream(std::ostream& out, std::span<const DetectionRecord> records, bool with_image_id);

/// Records grouped per image; iteration order is by image_id.
template <typename Record>
struct PerImage {
  std::map<std::string, std::vector<Record>> by_image;
  ParseStats stats;
};

using GroundTruthSet = PerImage<GroundTruthRecord>;
using DetectionSet = PerImage<DetectionRecord>;

/// Reads every `gt_<image_id>.txt` under `dir`. Files are parsed on up to
/// `jobs` threads; the result does not depend on `jobs`.
GroundTruthSet load_gt_dir(const std::filesystem::path& dir, const ParseOptions& options, unsigned jobs = 1);

/// Reads every `res_<image_id>.txt` (or `<image_id>.txt`) under `dir`.
DetectionSet load_detection_dir(const std::filesystem::path& dir, ParseMode mode, unsigned jobs = 1);
DetectionSet load_detection_file(const std::filesystem::path& file, ParseMode mode);

/// Region embeddings: a "dim <D>" header, then "region_id v1 ... vD" rows.
/// Throws DimensionMismatch, DuplicateRegionId, NonFiniteValue, MalformedLine.
std::map<std::string, EmbeddingVector> load_embeddings(std::istream& in);
void write_embeddings(std::ostream& out, const std::map<std::string, EmbeddingVector>& embeddings);

/// Same row format keyed by script name; the "dim" header is optional here.
/// Throws MissingClass when a class of `split` is absent, DimensionMismatch.
ClassEmbeddingTable load_class_embeddings(std::istream& in, const ClassSplit& split);

/// CSV "image_id,width,height" (header optional).
std::map<std::string, ImageMeta> load_image_meta(std::istream& in);

enum class ImageFilter {
  All,       // every image
  Seen,      // cared-for instances are all seen scripts
  Unseen,    // cared-for instances are all unseen scripts
  Exclusive  // Seen or Unseen, but not a mix
};

std::optional<ImageFilter> parse_image_filter(std::string_view s);
std::string_view to_string(ImageFilter f);

/// Image ids of `gt` passing `filter`. Images with no cared-for instance pass
/// only ImageFilter::All.
std::vector<std::string> filter_images(const GroundTruthSet& gt, const ClassSplit& split, ImageFilter filter);

/// Reads a whole file, throwing Io on failure.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace scriptdet
