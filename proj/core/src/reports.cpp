#include "layoutfuse/reports.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace layoutfuse {

using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string ap_to_csv(const std::map<std::string, ApResult>& by_stream) {
  std::ostringstream out;
  out << "stream,category,iou_threshold,ap,gt_count,prediction_count\n";
  for (const auto& [stream, r] : by_stream) {
    for (const auto& c : r.per_category) {
      for (std::size_t i = 0; i < c.ap_per_threshold.size(); ++i)
        out << stream << ',' << c.category << ',' << num(r.iou_thresholds[i]) << ',' << num(c.ap_per_threshold[i])
            << ',' << c.gt_count << ',' << c.prediction_count << '\n';
      out << stream << ',' << c.category << ",mean," << num(c.ap) << ',' << c.gt_count << ','
          << c.prediction_count << '\n';
    }
    out << stream << ",all,mean," << num(r.ap) << ",,\n";
    out << stream << ",all,0.5," << num(r.ap50) << ",,\n";
    out << stream << ",all,0.75," << num(r.ap75) << ",,\n";
    out << stream << ",all,weighted," << num(r.weighted_ap) << ",,\n";
  }
  return out.str();
}

std::string ap_to_json(const std::map<std::string, ApResult>& by_stream) {
  json doc = json::object();
  for (const auto& [stream, r] : by_stream) {
    json cats = json::array();
    for (const auto& c : r.per_category)
      cats.push_back({{"category", c.category},
                      {"gt_count", c.gt_count},
                      {"prediction_count", c.prediction_count},
                      {"ap", c.ap},
                      {"ap50", c.ap50},
                      {"ap75", c.ap75},
                      {"ap_per_threshold", c.ap_per_threshold}});
    doc[stream] = {{"ap", r.ap},
                   {"ap50", r.ap50},
                   {"ap75", r.ap75},
                   {"weighted_ap", r.weighted_ap},
                   {"iou_thresholds", r.iou_thresholds},
                   {"per_category", cats}};
  }
  return doc.dump(2) + "\n";
}

std::string ece_to_csv(const std::map<std::string, EceResult>& by_stream) {
  std::ostringstream out;
  out << "stream,kind,lower,upper,count,mean_confidence,accuracy,ece\n";
  for (const auto& [stream, r] : by_stream) {
    for (const auto& b : r.bins)
      out << stream << ",bin," << num(b.lower) << ',' << num(b.upper) << ',' << b.count << ','
          << num(b.mean_confidence) << ',' << num(b.accuracy) << ",\n";
    out << stream << ",summary,,,,,," << num(r.ece) << '\n';
  }
  return out.str();
}

std::string ece_to_json(const std::map<std::string, EceResult>& by_stream) {
  json doc = json::object();
  for (const auto& [stream, r] : by_stream) {
    json bins = json::array();
    for (const auto& b : r.bins)
      bins.push_back({{"lower", b.lower},
                      {"upper", b.upper},
                      {"count", b.count},
                      {"mean_confidence", b.mean_confidence},
                      {"accuracy", b.accuracy}});
    doc[stream] = {{"ece", r.ece}, {"bins", bins}};
  }
  return doc.dump(2) + "\n";
}

std::string theory_report_to_csv(const TheoryReport& r) {
  std::ostringstream out;
  out << "kind,key,n,seed,value\n";
  for (const auto& c : r.cells) {
    const std::string prefix = "cell,";
    const std::string where = ',' + std::to_string(c.n) + ',' + std::to_string(c.seed_index) + ',';
    out << prefix << "gap" << where << num(c.gap) << '\n';
    out << prefix << "weight_gap" << where << num(c.weight_gap) << '\n';
    out << prefix << "excess_risk" << where << num(c.excess_risk) << '\n';
    out << prefix << "learned_risk" << where << num(c.learned_risk) << '\n';
    out << prefix << "oracle_risk" << where << num(c.oracle_risk) << '\n';
    out << prefix << "best_epoch" << where << c.best_epoch << '\n';
  }
  for (const auto& p : r.mean_gaps) out << "mean,gap," << num(p.n) << ",," << num(p.gap) << '\n';
  const std::string n = num(r.n);
  out << "summary,k," << n << ",," << num(r.k) << '\n';
  out << "summary,sqrt_k_over_n," << n << ",," << num(r.sqrt_k_over_n) << '\n';
  out << "summary,predicted_gap_simple," << n << ",," << num(r.predicted_gap_simple) << '\n';
  out << "summary,predicted_gap_test3," << n << ",," << num(r.predicted_gap_test3) << '\n';
  if (r.boundary_fraction) out << "summary,boundary_fraction,,," << num(*r.boundary_fraction) << '\n';
  if (r.regimes) {
    out << "summary,boundary_mean_residual,,," << num(r.regimes->boundary_mean_residual) << '\n';
    out << "summary,interior_mean_residual,,," << num(r.regimes->interior_mean_residual) << '\n';
    out << "summary,regime_separation_sigmas,,," << num(r.regimes->separation_sigmas()) << '\n';
  }
  if (r.slope) {
    out << "summary,slope,,," << num(r.slope->slope) << '\n';
    out << "summary,slope_stderr,,," << num(r.slope->slope_stderr) << '\n';
  }
  if (r.calibrated_constant) out << "summary,calibrated_constant,,," << num(*r.calibrated_constant) << '\n';
  if (r.bound_holds_at_largest_n)
    out << "summary,bound_holds_at_largest_n,,," << (*r.bound_holds_at_largest_n ? 1 : 0) << '\n';
  return out.str();
}

std::string theory_report_to_json(const TheoryReport& r) {
  json doc = {{"n", r.n},
              {"k", r.k},
              {"sqrt_k_over_n", r.sqrt_k_over_n},
              {"predicted_gap_simple", r.predicted_gap_simple},
              {"predicted_gap_test3", r.predicted_gap_test3},
              {"notes", r.notes}};
  if (r.boundary_fraction) doc["boundary_fraction"] = *r.boundary_fraction;
  if (r.regimes) {
    const auto& g = *r.regimes;
    doc["regimes"] = {{"boundary_count", g.boundary_count},
                      {"interior_count", g.interior_count},
                      {"boundary_mean_residual", g.boundary_mean_residual},
                      {"interior_mean_residual", g.interior_mean_residual},
                      {"boundary_stderr", g.boundary_stderr},
                      {"interior_stderr", g.interior_stderr},
                      {"separation_sigmas", finite_or_null(g.separation_sigmas())}};
  }
  if (!r.cells.empty()) {
    json cells = json::array();
    for (const auto& c : r.cells)
      cells.push_back({{"n", c.n},
                       {"seed", c.seed_index},
                       {"gap", c.gap},
                       {"weight_gap", c.weight_gap},
                       {"excess_risk", c.excess_risk},
                       {"learned_risk", c.learned_risk},
                       {"oracle_risk", c.oracle_risk},
                       {"best_epoch", c.best_epoch}});
    doc["cells"] = cells;
    json means = json::array();
    for (const auto& p : r.mean_gaps) means.push_back({{"n", p.n}, {"gap", p.gap}});
    doc["mean_gaps"] = means;
  }
  if (r.slope)
    doc["slope"] = {{"slope", r.slope->slope},
                    {"stderr", r.slope->slope_stderr},
                    {"intercept", r.slope->intercept},
                    {"points", r.slope->points}};
  if (r.calibrated_constant) doc["calibrated_constant"] = *r.calibrated_constant;
  if (r.bound_holds_at_largest_n) doc["bound_holds_at_largest_n"] = *r.bound_holds_at_largest_n;
  return doc.dump(2) + "\n";
}

std::string provenance_counts_to_json(const std::map<Provenance, std::size_t>& counts) {
  json doc = {{"fused", 0}, {"teacher", 0}, {"llm-soft", 0}};
  for (const auto& [p, n] : counts) doc[std::string(to_string(p))] = n;
  return doc.dump(2) + "\n";
}

std::string schedule_to_csv(int epochs, const Taxonomy& taxonomy, const CurriculumConfig& config) {
  std::ostringstream out;
  out << "epoch,sources,thresholds,soft_categories,regenerate\n";
  for (int e = 1; e <= epochs; ++e) {
    const SchedulePhase ph = schedule(e, taxonomy, config);
    out << e << ',';
    std::string sep;
    for (Provenance p : ph.allowed) {
      out << sep << to_string(p);
      sep = ";";
    }
    out << ',';
    sep.clear();
    for (const auto& [cat, t] : ph.thresholds) {
      out << sep << cat << '=' << num(t);
      sep = ";";
    }
    out << ',';
    sep.clear();
    for (const auto& cat : ph.soft_categories) {
      out << sep << cat;
      sep = ";";
    }
    out << ',' << (ph.regenerate ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace layoutfuse
