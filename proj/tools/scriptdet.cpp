// scriptdet: evaluation toolkit for unseen-script scene text detection.
//
//   scriptdet validate   --config run.json
//   scriptdet nms        --config run.json --nms-iou 0.3 --nms-score 0.5
//   scriptdet crop-specs --config run.json
//   scriptdet classify   --config run.json --score-mode product
//   scriptdet evaluate   --config run.json --out results/
//   scriptdet analyze    --config run.json matrix.csv

#include "scriptdet/cli.hpp"
#include "scriptdet/detail/log.hpp"
#include "scriptdet/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> gt_dir, detections, layout, embeddings, class_embeddings, assignments, image_meta, matrix,
      out;
  std::optional<double> iou_thresh, nms_iou, nms_score, threshold_close, threshold_loose, crop_padding;
  std::optional<std::string> score_mode, image_filter;
  bool strict = false;
  bool lenient = false;
  std::optional<unsigned> jobs;
};

void add_common_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "JSON run configuration");
  cmd.add_option("--gt", o.gt_dir, "directory of gt_<image_id>.txt files");
  cmd.add_option("--detections", o.detections, "detection directory or combined file");
  cmd.add_option("--layout", o.layout, "detection layout")->check(CLI::IsMember({"per-image", "combined"}));
  cmd.add_option("--embeddings", o.embeddings, "region embedding file");
  cmd.add_option("--class-embeddings", o.class_embeddings, "class embedding table");
  cmd.add_option("--assignments", o.assignments, "precomputed assignments CSV");
  cmd.add_option("--image-meta", o.image_meta, "CSV image_id,width,height");
  cmd.add_option("--iou-thresh", o.iou_thresh, "IoU for a true positive");
  cmd.add_option("--nms-iou", o.nms_iou, "NMS suppression IoU");
  cmd.add_option("--nms-score", o.nms_score, "NMS minimum confidence");
  cmd.add_option("--score-mode", o.score_mode, "AP ranking score")
      ->check(CLI::IsMember({"detector", "similarity", "product"}));
  cmd.add_option("--threshold-close", o.threshold_close, "tight proximity threshold");
  cmd.add_option("--threshold-loose", o.threshold_loose, "loose proximity threshold");
  cmd.add_option("--image-filter", o.image_filter, "images to evaluate")
      ->check(CLI::IsMember({"all", "seen", "unseen", "exclusive"}));
  cmd.add_option("--padding", o.crop_padding, "pixels added around each crop");
  auto* strict = cmd.add_flag("--strict", o.strict, "abort on the first malformed line (default)");
  cmd.add_flag("--lenient", o.lenient, "skip malformed lines and count them")->excludes(strict);
  cmd.add_option("--out", o.out, "output directory");
  cmd.add_option("--jobs", o.jobs, "worker threads (default: all cores)")->check(CLI::PositiveNumber);
}

scriptdet::cli::RunConfig build_config(const Overrides& o) {
  using namespace scriptdet;
  cli::RunConfig c = o.config.empty() ? cli::RunConfig{} : cli::load_run_config(o.config);
  if (o.gt_dir) c.gt_dir = *o.gt_dir;
  if (o.detections) c.detections = *o.detections;
  if (o.layout) c.detection_layout = *o.layout == "combined" ? cli::DetectionLayout::Combined : cli::DetectionLayout::PerImage;
  if (o.embeddings) c.embeddings = *o.embeddings;
  if (o.class_embeddings) c.class_embeddings = *o.class_embeddings;
  if (o.assignments) c.assignments = *o.assignments;
  if (o.image_meta) c.image_meta = *o.image_meta;
  if (o.matrix) c.matrix = *o.matrix;
  if (o.out) c.out_dir = *o.out;
  if (o.iou_thresh) c.iou_thresh = *o.iou_thresh;
  if (o.nms_iou) c.nms_iou = *o.nms_iou;
  if (o.nms_score) c.nms_score = *o.nms_score;
  if (o.threshold_close) c.threshold_close = *o.threshold_close;
  if (o.threshold_loose) c.threshold_loose = *o.threshold_loose;
  if (o.crop_padding) c.crop_padding = *o.crop_padding;
  if (o.score_mode) c.score_mode = *parse_score_mode(*o.score_mode);
  if (o.image_filter) c.image_filter = *parse_image_filter(*o.image_filter);
  if (o.strict) c.parse_mode = ParseMode::Strict;
  if (o.lenient) c.parse_mode = ParseMode::Lenient;
  if (o.jobs) c.jobs = *o.jobs;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation toolkit for unseen-script scene text detection"};
  app.require_subcommand(1);
  Overrides o;

  auto* validate = app.add_subcommand("validate", "parse ground truth (and detections) and report counts");
  auto* nms = app.add_subcommand("nms", "non-maximum suppression over detection files");
  auto* crops = app.add_subcommand("crop-specs", "minimum-area crop rectangles for each detection");
  auto* classify = app.add_subcommand("classify", "assign an unseen script to each detected region");
  auto* evaluate = app.add_subcommand("evaluate", "per-class AP, mAP and P/R/F report");
  auto* analyze = app.add_subcommand("analyze", "cross-script f-measure matrix analysis");
  for (auto* cmd : {validate, nms, crops, classify, evaluate, analyze}) add_common_options(*cmd, o);
  analyze->add_option("matrix", o.matrix, "CSV f-measure matrix");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = build_config(o);
    namespace cli = scriptdet::cli;
    nlohmann::json result;
    if (validate->parsed()) result = cli::cmd_validate(config);
    else if (nms->parsed()) result = cli::cmd_nms(config);
    else if (crops->parsed()) result = cli::cmd_crop_specs(config);
    else if (classify->parsed()) result = cli::cmd_classify(config);
    else if (evaluate->parsed()) result = scriptdet::to_json(cli::cmd_evaluate(config));
    else if (analyze->parsed()) result = cli::cmd_analyze(config);
    std::cout << result.dump(2) << '\n';
    return 0;
  } catch (const scriptdet::Error& e) {
    scriptdet::detail::log(scriptdet::detail::LogLevel::Error, e.what());
    return 2;
  } catch (const std::exception& e) {
    scriptdet::detail::log(scriptdet::detail::LogLevel::Error, e.what());
    return 1;
  }
}
