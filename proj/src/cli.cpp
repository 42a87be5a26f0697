#include "scriptdet/cli.hpp"

#include "scriptdet/detail/log.hpp"
#include "scriptdet/detail/parallel.hpp"
#include "scriptdet/detail/strings.hpp"
#include "scriptdet/error.hpp"
#include "scriptdet/geometry.hpp"
#include "scriptdet/nms.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace scriptdet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidThreshold, std::string(name) + " must lie in [0,1]");
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorCode::InvalidConfig, std::string(what) + " is not configured");
  if (!fs::exists(p)) throw Error(ErrorCode::Io, std::string(what) + " not found: " + p.string());
}

void write_output(const RunConfig& config, const std::string& name, const std::string& content) {
  const auto path = config.out_dir / name;
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
  detail::log(detail::LogLevel::Info, "wrote " + path.string());
}

ScriptSet script_list(const json& j, const char* key) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be a list of script names");
  ScriptSet out;
  for (const auto& item : j) out.emplace(item.get<std::string>());
  return out;
}

DetectionSet load_detections(const RunConfig& config) {
  require_path(config.detections, "detections");
  return config.detection_layout == DetectionLayout::PerImage
             ? load_detection_dir(config.detections, config.parse_mode, config.workers())
             : load_detection_file(config.detections, config.parse_mode);
}

GroundTruthSet load_ground_truth(const RunConfig& config) {
  require_path(config.gt_dir, "gt_dir");
  return load_gt_dir(config.gt_dir, config.parse_options(), config.workers());
}

json stats_json(const ParseStats& s) {
  return {{"files", s.files},
          {"records", s.records},
          {"skipped", s.skipped},
          {"degenerate", s.degenerate},
          {"dont_care", s.dont_care}};
}

ClassEmbeddingTable load_class_table(const RunConfig& config) {
  require_path(config.class_embeddings, "class_embeddings");
  std::ifstream in(config.class_embeddings, std::ios::binary);
  return load_class_embeddings(in, config.split);
}

// Classifies every detection over the unseen classes.
std::vector<AssignmentRow> classify_all(const RunConfig& config, const DetectionSet& dets) {
  require_path(config.embeddings, "embeddings");
  std::ifstream in(config.embeddings, std::ios::binary);
  const auto embeddings = load_embeddings(in);
  const auto table = load_class_table(config);

  std::vector<const std::pair<const std::string, std::vector<DetectionRecord>>*> images;
  for (const auto& entry : dets.by_image) images.push_back(&entry);
  std::vector<std::vector<AssignmentRow>> per_image(images.size());
  detail::parallel_for(images.size(), config.workers(), [&](std::size_t i) {
    const auto& [id, records] = *images[i];
    for (std::size_t k = 0; k < records.size(); ++k) {
      const auto key = region_key(records[k], k);
      const auto it = embeddings.find(key);
      if (it == embeddings.end()) throw Error(ErrorCode::MissingEmbedding, "no embedding for region '" + key + "'");
      auto a = classify_region(it->second, table, config.split.unseen, key);
      a.rank_score = rank_score(records[k].confidence, a.similarity, config.score_mode);
      per_image[i].push_back({id, std::move(a)});
    }
  });
  std::vector<AssignmentRow> rows;
  for (auto& v : per_image) std::move(v.begin(), v.end(), std::back_inserter(rows));
  return rows;
}

}  // namespace

void RunConfig::validate() const {
  check_unit(iou_thresh, "iou_thresh");
  check_unit(nms_iou, "nms_iou");
  check_unit(nms_score, "nms_score");
  check_unit(threshold_close, "threshold_close");
  check_unit(threshold_loose, "threshold_loose");
  check_unit(zero_gt_ap, "zero_gt_ap");
  if (crop_padding < 0) throw Error(ErrorCode::InvalidConfig, "crop_padding must be non-negative");
  split.validate();
}

unsigned RunConfig::workers() const { return jobs == 0 ? detail::default_jobs() : jobs; }

ParseOptions RunConfig::parse_options() const {
  ParseOptions o;
  o.mode = parse_mode;
  o.vocabulary = split.all();
  o.ignore = ignore;
  return o;
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig e;
  e.iou_thresh = iou_thresh;
  e.score_mode = score_mode;
  e.zero_gt_ap = zero_gt_ap;
  e.image_filter = image_filter;
  e.class_aware = class_aware;
  e.jobs = workers();
  return e;
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  RunConfig c;
  const auto path_of = [&](const json& v) {
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "gt_dir") c.gt_dir = path_of(v);
      else if (key == "detections") c.detections = path_of(v);
      else if (key == "detection_layout") {
        const auto s = v.get<std::string>();
        if (s == "per-image") c.detection_layout = DetectionLayout::PerImage;
        else if (s == "combined") c.detection_layout = DetectionLayout::Combined;
        else throw Error(ErrorCode::InvalidConfig, "detection_layout must be per-image or combined");
      } else if (key == "embeddings") c.embeddings = path_of(v);
      else if (key == "class_embeddings") c.class_embeddings = path_of(v);
      else if (key == "assignments") c.assignments = path_of(v);
      else if (key == "image_meta") c.image_meta = path_of(v);
      else if (key == "matrix") c.matrix = path_of(v);
      else if (key == "out") c.out_dir = path_of(v);
      else if (key == "seen") c.split.seen = script_list(v, "seen");
      else if (key == "unseen") c.split.unseen = script_list(v, "unseen");
      else if (key == "ignore") c.ignore = script_list(v, "ignore");
      else if (key == "iou_thresh") c.iou_thresh = v.get<double>();
      else if (key == "nms_iou") c.nms_iou = v.get<double>();
      else if (key == "nms_score") c.nms_score = v.get<double>();
      else if (key == "threshold_close") c.threshold_close = v.get<double>();
      else if (key == "threshold_loose") c.threshold_loose = v.get<double>();
      else if (key == "zero_gt_ap") c.zero_gt_ap = v.get<double>();
      else if (key == "crop_padding") c.crop_padding = v.get<double>();
      else if (key == "score_mode") {
        const auto m = parse_score_mode(v.get<std::string>());
        if (!m) throw Error(ErrorCode::InvalidConfig, "score_mode must be detector, similarity or product");
        c.score_mode = *m;
      } else if (key == "parse_mode") {
        const auto s = v.get<std::string>();
        if (s != "strict" && s != "lenient") throw Error(ErrorCode::InvalidConfig, "parse_mode must be strict or lenient");
        c.parse_mode = s == "strict" ? ParseMode::Strict : ParseMode::Lenient;
      } else if (key == "image_filter") {
        const auto f = parse_image_filter(v.get<std::string>());
        if (!f) throw Error(ErrorCode::InvalidConfig, "image_filter must be all, seen, unseen or exclusive");
        c.image_filter = *f;
      } else if (key == "class_aware") c.class_aware = v.get<bool>();
      else if (key == "jobs") c.jobs = v.get<unsigned>();
      else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& file) {
  const auto text = read_text_file(file);
  json j;
  try {
    j = json::parse(detail::strip_bom(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, file.string() + ": " + e.what());
  }
  return run_config_from_json(j, file.parent_path());
}

json cmd_validate(const RunConfig& config) {
  config.validate();
  const auto gt = load_ground_truth(config);

  std::map<ScriptClass, std::pair<std::size_t, std::size_t>> instances;  // cared, don't-care
  std::map<ScriptClass, std::size_t> images_with;
  for (const auto& [id, records] : gt.by_image) {
    ScriptSet present;
    for (const auto& r : records) {
      auto& [cared, dont_care] = instances[r.script];
      (r.dont_care ? dont_care : cared) += 1;
      if (!r.dont_care) present.insert(r.script);
    }
    for (const auto& s : present) ++images_with[s];
  }

  json scripts = json::object();
  for (const auto& [s, counts] : instances) {
    const char* category = config.split.seen.contains(s)     ? "seen"
                           : config.split.unseen.contains(s) ? "unseen"
                                                             : "other";
    scripts[s.name()] = {{"category", category},
                         {"instances", counts.first},
                         {"dont_care", counts.second},
                         {"images", images_with[s]}};
  }
  json filters = json::object();
  for (const auto f : {ImageFilter::All, ImageFilter::Seen, ImageFilter::Unseen, ImageFilter::Exclusive}) {
    filters[std::string(to_string(f))] = filter_images(gt, config.split, f).size();
  }
  json summary = {{"parse_mode", config.parse_mode == ParseMode::Strict ? "strict" : "lenient"},
                  {"ground_truth", stats_json(gt.stats)},
                  {"scripts", scripts},
                  {"images", filters}};
  if (!config.detections.empty()) summary["detections"] = stats_json(load_detections(config).stats);
  write_output(config, "validate.json", summary.dump(2) + "\n");
  return summary;
}

json cmd_nms(const RunConfig& config) {
  config.validate();
  const auto dets = load_detections(config);
  std::vector<const std::vector<DetectionRecord>*> inputs;
  std::vector<std::string> ids;
  for (const auto& [id, records] : dets.by_image) {
    ids.push_back(id);
    inputs.push_back(&records);
  }
  std::vector<std::vector<DetectionRecord>> kept(ids.size());
  detail::parallel_for(ids.size(), config.workers(), [&](std::size_t i) {
    auto keyed = *inputs[i];
    for (std::size_t k = 0; k < keyed.size(); ++k) keyed[k].region_id = region_key(keyed[k], k);
    kept[i] = nms(keyed, config.nms_iou, config.nms_score);
  });

  std::size_t total_in = 0;
  std::size_t total_out = 0;
  std::ostringstream combined;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    total_in += inputs[i]->size();
    total_out += kept[i].size();
    if (config.detection_layout == DetectionLayout::Combined) {
      write_detection_stream(combined, kept[i], true);
    } else {
      std::ostringstream one;
      write_detection_stream(one, kept[i], false);
      write_output(config, (fs::path("nms") / ("res_" + ids[i] + ".txt")).string(), one.str());
    }
  }
  if (config.detection_layout == DetectionLayout::Combined) {
    write_output(config, "detections_nms.txt", combined.str());
  }
  return {{"images", ids.size()}, {"input", total_in}, {"kept", total_out},
          {"nms_iou", config.nms_iou}, {"nms_score", config.nms_score}};
}

json cmd_crop_specs(const RunConfig& config) {
  config.validate();
  const auto dets = load_detections(config);
  require_path(config.image_meta, "image_meta");
  std::ifstream meta_in(config.image_meta, std::ios::binary);
  const auto meta = load_image_meta(meta_in);

  std::vector<CropSpecRow> rows;
  std::size_t skipped = 0;
  std::size_t clamped = 0;
  for (const auto& [id, records] : dets.by_image) {
    const auto it = meta.find(id);
    if (it == meta.end()) throw Error(ErrorCode::InvalidConfig, "no image size for '" + id + "'");
    for (std::size_t k = 0; k < records.size(); ++k) {
      try {
        auto crop = crop_spec_for_quad(records[k].quad, it->second, config.crop_padding);
        clamped += crop.clamped ? 1 : 0;
        rows.push_back({id, region_key(records[k], k), crop});
      } catch (const Error& e) {
        if (config.parse_mode == ParseMode::Strict || e.code() != ErrorCode::QuadOutsideImage) throw;
        detail::log(detail::LogLevel::Warn, e.what());
        ++skipped;
      }
    }
  }
  std::ostringstream csv;
  write_crop_specs_csv(csv, rows);
  write_output(config, "crop_specs.csv", csv.str());
  return {{"regions", rows.size()}, {"clamped", clamped}, {"skipped", skipped}};
}

json cmd_classify(const RunConfig& config) {
  config.validate();
  const auto dets = load_detections(config);
  const auto rows = classify_all(config, dets);
  std::ostringstream csv;
  write_assignments_csv(csv, rows);
  write_output(config, "assignments.csv", csv.str());
  json per_class = json::object();
  for (const auto& c : config.split.unseen) per_class[c.name()] = 0;
  for (const auto& r : rows) per_class[r.assignment.script.name()] = per_class[r.assignment.script.name()].get<int>() + 1;
  return {{"regions", rows.size()}, {"per_class", per_class}, {"score_mode", std::string(to_string(config.score_mode))}};
}

EvalReport cmd_evaluate(const RunConfig& config) {
  config.validate();
  const auto gt = load_ground_truth(config);
  const auto dets = load_detections(config);

  std::map<std::string, ScriptAssignment> assignments;
  if (config.class_aware) {
    std::vector<AssignmentRow> rows;
    if (!config.assignments.empty()) {
      require_path(config.assignments, "assignments");
      std::ifstream in(config.assignments, std::ios::binary);
      rows = read_assignments_csv(in);
    } else {
      rows = classify_all(config, dets);
    }
    for (auto& r : rows) {
      const std::string key = r.assignment.region_id;
      if (!assignments.emplace(key, std::move(r.assignment)).second) {
        throw Error(ErrorCode::DuplicateRegionId, "region '" + key + "' assigned twice");
      }
    }
  }
  auto report = evaluate(gt, dets, assignments, config.split, config.eval_config());
  write_output(config, "report.json", report_to_string(report));
  if (config.class_aware) write_output(config, "per_class.csv", per_class_csv(report));
  return report;
}

json cmd_analyze(const RunConfig& config) {
  check_unit(config.threshold_close, "threshold_close");
  check_unit(config.threshold_loose, "threshold_loose");
  require_path(config.matrix, "matrix");
  std::ifstream in(config.matrix, std::ios::binary);
  const auto m = parse_matrix_csv(in);

  const auto train_one = one_train_test_rest(m);
  const auto test_one = one_test_train_rest(m);
  json box = json::object();
  std::ostringstream csv;
  csv << "aggregation,script,mean,median,q1,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& [name, series] : {std::pair{"train_one_test_rest", &train_one}, std::pair{"test_one_train_rest", &test_one}}) {
    json agg = json::object();
    for (const auto& s : *series) {
      const auto stats = box_stats(s.values);
      agg[s.script.name()] = to_json(stats);
      std::string outliers;
      for (const auto& o : stats.outliers) {
        if (!outliers.empty()) outliers += ';';
        outliers += o.label.name() + ":" + detail::format_number(o.value);
      }
      using detail::format_number;
      csv << name << ',' << s.script.name() << ',' << format_number(stats.mean) << ',' << format_number(stats.median)
          << ',' << format_number(stats.q1) << ',' << format_number(stats.q3) << ','
          << format_number(stats.whisker_low) << ',' << format_number(stats.whisker_high) << ',' << outliers << '\n';
    }
    box[name] = agg;
  }
  json analysis = {
      {"thresholds", {{"close", config.threshold_close}, {"loose", config.threshold_loose}}},
      {"edges",
       {{"close", to_json(proximity_edges(m, config.threshold_close))},
        {"loose", to_json(proximity_edges(m, config.threshold_loose))}}},
      {"box_stats", box},
  };
  write_output(config, "analysis.json", analysis.dump(2) + "\n");
  write_output(config, "box_stats.csv", csv.str());
  write_output(config, "proximity.svg", render_proximity_svg(m, config.threshold_close, config.threshold_loose));
  write_output(config, "boxplot_train_one_test_rest.svg",
               render_boxplot_svg(train_one, "Trained on one script, tested on the rest"));
  write_output(config, "boxplot_test_one_train_rest.svg",
               render_boxplot_svg(test_one, "Tested on one script, trained on the rest"));
  return analysis;
}

}  // namespace scriptdet::cli
