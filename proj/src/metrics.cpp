#include "scriptdet/metrics.hpp"

#include "scriptdet/detail/parallel.hpp"
#include "scriptdet/detail/strings.hpp"
#include "scriptdet/error.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <sstream>

namespace scriptdet {

namespace {

void check_threshold(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidThreshold, std::string(what) + " must lie in [0,1]");
}

struct Hit {
  double score;
  bool tp;
};

// Everything evaluate() needs from one image; merged afterwards in image order.
struct ImageResult {
  MatchResult agnostic;
  ScriptSet cared_scripts;
  std::map<ScriptClass, std::vector<Hit>> hits;
  std::map<ScriptClass, std::size_t> n_gt;
  GeometryDiagnostics diag;
};

nlohmann::json to_json(const DetectionReport& r) {
  return {{"images", r.images},       {"n_gt", r.n_gt},
          {"tp", r.tp},               {"fp", r.fp},
          {"precision", r.prf.precision}, {"recall", r.prf.recall},
          {"f_measure", r.prf.f_measure}, {"dont_care_absorbed", r.dont_care_absorbed}};
}

nlohmann::json names(const ScriptSet& s) {
  auto out = nlohmann::json::array();
  for (const auto& c : s) out.push_back(c.name());
  return out;
}

}  // namespace

MatchResult match_detections(std::span<const RankedDetection> dets, std::span<const GtRegion> gts, double iou_thresh,
                             GeometryDiagnostics* diag) {
  check_threshold(iou_thresh, "IoU threshold");
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  MatchResult res;
  res.detections.resize(dets.size());
  res.gt_matched.assign(gts.size(), false);
  res.n_gt = static_cast<std::size_t>(std::count_if(gts.begin(), gts.end(), [](const GtRegion& g) { return !g.dont_care; }));

  for (const std::size_t i : order) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    std::optional<std::size_t> dc_best;
    double dc_iou = -1.0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double iou = quad_iou(dets[i].quad, gts[j].quad, diag);
      if (gts[j].dont_care) {
        if (iou > dc_iou) {
          dc_iou = iou;
          dc_best = j;
        }
      } else if (!res.gt_matched[j] && iou > best_iou) {
        best_iou = iou;
        best = j;
      }
    }
    auto& out = res.detections[i];
    if (best && best_iou >= iou_thresh) {
      out = {Outcome::TruePositive, best, best_iou};
      res.gt_matched[*best] = true;
      ++res.tp;
    } else if (dc_best && dc_iou >= iou_thresh) {
      out = {Outcome::DontCare, dc_best, dc_iou};
      ++res.dont_care_absorbed;
    } else {
      out = {Outcome::FalsePositive, std::nullopt, std::max({best_iou, dc_iou, 0.0})};
      ++res.fp;
    }
  }
  return res;
}

MatchResult match_detections(std::span<const RankedDetection> dets, std::span<const GroundTruthRecord> gts,
                             double iou_thresh, GeometryDiagnostics* diag) {
  std::vector<GtRegion> regions;
  regions.reserve(gts.size());
  for (const auto& g : gts) regions.push_back({g.quad, g.dont_care});
  return match_detections(dets, regions, iou_thresh, diag);
}

PrecisionRecall precision_recall_f(std::size_t tp, std::size_t fp, std::size_t n_gt) {
  PrecisionRecall r;
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (n_gt > 0) r.recall = static_cast<double>(tp) / static_cast<double>(n_gt);
  if (r.precision + r.recall > 0) r.f_measure = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double ap_11point(std::span<const bool> ranked_is_tp, std::size_t n_gt, double zero_gt_ap) {
  if (n_gt == 0) return ranked_is_tp.empty() ? zero_gt_ap : 0.0;
  const std::size_t n = ranked_is_tp.size();
  std::vector<std::size_t> tp_at(n);
  std::vector<double> best_from(n + 1, 0.0);  // max precision over prefixes k..n-1
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += ranked_is_tp[k] ? 1 : 0;
    tp_at[k] = tp;
  }
  for (std::size_t k = n; k-- > 0;) {
    const double precision = static_cast<double>(tp_at[k]) / static_cast<double>(k + 1);
    best_from[k] = std::max(best_from[k + 1], precision);
  }
  // Recall is nondecreasing down the list, so the prefixes reaching a level
  // form a suffix; compare tp/n_gt >= level/10 in integers.
  double sum = 0.0;
  std::size_t first = 0;
  for (std::size_t level = 0; level <= 10; ++level) {
    while (first < n && 10 * tp_at[first] < level * n_gt) ++first;
    sum += best_from[first];
  }
  return sum / 11;
}

double mean_ap(const std::map<ScriptClass, double>& per_class, const ScriptSet& classes) {
  if (classes.empty()) throw Error(ErrorCode::EmptyClassSet, "mAP over no classes");
  double sum = 0.0;
  for (const auto& c : classes) {
    const auto it = per_class.find(c);
    if (it == per_class.end()) throw Error(ErrorCode::MissingClass, "no AP for '" + c.name() + "'");
    sum += it->second;
  }
  return sum / static_cast<double>(classes.size());
}

EvalReport evaluate(const GroundTruthSet& gt, const DetectionSet& dets,
                    const std::map<std::string, ScriptAssignment>& assignments, const ClassSplit& split,
                    const EvalConfig& config) {
  check_threshold(config.iou_thresh, "IoU threshold");
  const auto images = filter_images(gt, split, config.image_filter);
  const std::vector<DetectionRecord> no_dets;

  std::vector<ImageResult> results(images.size());
  detail::parallel_for(images.size(), config.jobs, [&](std::size_t i) {
    const auto& id = images[i];
    const auto& gts = gt.by_image.at(id);
    const auto found = dets.by_image.find(id);
    const auto& image_dets = found == dets.by_image.end() ? no_dets : found->second;
    auto& out = results[i];

    std::vector<RankedDetection> by_confidence;
    for (const auto& d : image_dets) by_confidence.push_back({d.quad, d.confidence});
    out.agnostic = match_detections(by_confidence, gts, config.iou_thresh, &out.diag);
    for (const auto& g : gts) {
      if (!g.dont_care) out.cared_scripts.insert(g.script);
    }
    if (!config.class_aware) return;

    std::vector<const ScriptAssignment*> assigned(image_dets.size());
    for (std::size_t k = 0; k < image_dets.size(); ++k) {
      const auto key = region_key(image_dets[k], k);
      const auto it = assignments.find(key);
      if (it == assignments.end()) throw Error(ErrorCode::MissingEmbedding, "no script assignment for region '" + key + "'");
      assigned[k] = &it->second;
    }
    for (const auto& c : split.unseen) {
      std::vector<GtRegion> regions;
      std::size_t n_gt = 0;
      for (const auto& g : gts) {
        if (g.dont_care || g.script == c) regions.push_back({g.quad, g.dont_care});
        n_gt += (!g.dont_care && g.script == c) ? 1 : 0;
      }
      out.n_gt[c] = n_gt;
      std::vector<RankedDetection> ranked;
      for (std::size_t k = 0; k < image_dets.size(); ++k) {
        if (assigned[k]->script != c) continue;
        ranked.push_back({image_dets[k].quad,
                          rank_score(image_dets[k].confidence, assigned[k]->similarity, config.score_mode)});
      }
      const auto match = match_detections(ranked, regions, config.iou_thresh, &out.diag);
      auto& hits = out.hits[c];
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        const auto outcome = match.detections[k].outcome;
        if (outcome != Outcome::DontCare) hits.push_back({ranked[k].score, outcome == Outcome::TruePositive});
      }
    }
  });

  EvalReport report;
  report.config = config;
  report.split = split;
  report.images = images.size();
  for (const auto& [id, list] : dets.by_image) {
    if (!std::binary_search(images.begin(), images.end(), id)) report.detections_ignored += list.size();
  }

  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& r = results[i];
    report.hull_fallbacks += r.diag.hull_fallbacks;
    auto add = [&r](DetectionReport& d) {
      ++d.images;
      d.n_gt += r.agnostic.n_gt;
      d.tp += r.agnostic.tp;
      d.fp += r.agnostic.fp;
      d.dont_care_absorbed += r.agnostic.dont_care_absorbed;
    };
    add(report.combined);
    for (const auto& s : r.cared_scripts) add(report.per_script[s]);
  }
  report.combined.prf = precision_recall_f(report.combined.tp, report.combined.fp, report.combined.n_gt);
  for (auto& [s, d] : report.per_script) d.prf = precision_recall_f(d.tp, d.fp, d.n_gt);

  if (config.class_aware) {
    std::map<ScriptClass, double> aps;
    for (const auto& c : split.unseen) {
      std::vector<Hit> hits;
      ClassReport cr;
      for (const auto& r : results) {
        const auto& h = r.hits.at(c);
        hits.insert(hits.end(), h.begin(), h.end());
        cr.n_gt += r.n_gt.at(c);
      }
      std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.score > b.score; });
      const auto tp_flags = std::make_unique<bool[]>(hits.size());
      for (std::size_t k = 0; k < hits.size(); ++k) tp_flags[k] = hits[k].tp;
      cr.n_det = hits.size();
      cr.tp = static_cast<std::size_t>(std::count_if(hits.begin(), hits.end(), [](const Hit& h) { return h.tp; }));
      cr.fp = cr.n_det - cr.tp;
      cr.ap = ap_11point(std::span<const bool>(tp_flags.get(), hits.size()), cr.n_gt, config.zero_gt_ap);
      aps[c] = cr.ap;
      report.per_class[c] = cr;
    }
    report.map = mean_ap(aps, split.unseen);
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [c, r] : report.per_class) {
    per_class[c.name()] = {{"ap", r.ap}, {"n_gt", r.n_gt}, {"n_det", r.n_det}, {"tp", r.tp}, {"fp", r.fp}};
  }
  nlohmann::json per_script = nlohmann::json::object();
  for (const auto& [s, r] : report.per_script) per_script[s.name()] = to_json(r);

  const auto& cfg = report.config;
  return {
      {"config",
       {{"iou_thresh", cfg.iou_thresh},
        {"score_mode", std::string(to_string(cfg.score_mode))},
        {"zero_gt_ap", cfg.zero_gt_ap},
        {"image_filter", std::string(to_string(cfg.image_filter))},
        {"class_aware", cfg.class_aware},
        {"seen", names(report.split.seen)},
        {"unseen", names(report.split.unseen)}}},
      {"images", report.images},
      {"class_aware",
       {{"per_class", per_class}, {"map", report.map ? nlohmann::json(*report.map) : nlohmann::json(nullptr)}}},
      {"class_agnostic", {{"combined", to_json(report.combined)}, {"per_script", per_script}}},
      {"diagnostics", {{"hull_fallbacks", report.hull_fallbacks}, {"detections_ignored", report.detections_ignored}}},
  };
}

std::string report_to_string(const EvalReport& report) { return to_json(report).dump(2) + "\n"; }

std::string per_class_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class,ap,n_gt,n_det,tp,fp\n";
  for (const auto& [c, r] : report.per_class) {
    out << c.name() << ',' << detail::format_number(r.ap) << ',' << r.n_gt << ',' << r.n_det << ',' << r.tp << ','
        << r.fp << '\n';
  }
  return out.str();
}

}  // namespace scriptdet
