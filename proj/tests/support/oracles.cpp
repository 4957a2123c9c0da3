#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace oracle {

namespace {

struct Raster {
  long a = 0, b = 0, both = 0, hull = 0;
};

Raster rasterize(const BoundingBox& a, const BoundingBox& b, int cells) {
  Raster r;
  const double hx1 = std::min(a.x1, b.x1), hy1 = std::min(a.y1, b.y1);
  const double hx2 = std::max(a.x2, b.x2), hy2 = std::max(a.y2, b.y2);
  for (int i = 0; i < cells; ++i) {
    const double x = (i + 0.5) / cells;
    for (int j = 0; j < cells; ++j) {
      const double y = (j + 0.5) / cells;
      const bool in_a = x >= a.x1 && x < a.x2 && y >= a.y1 && y < a.y2;
      const bool in_b = x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
      r.a += in_a;
      r.b += in_b;
      r.both += in_a && in_b;
      r.hull += x >= hx1 && x < hx2 && y >= hy1 && y < hy2;
    }
  }
  return r;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double lg(double p) {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

double naive_iou(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double h = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = w * h;
  const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::string canon(const std::string& c) {
  if (c == "page-header") return "header";
  if (c == "page-footer") return "footer";
  if (c == "picture") return "figure";
  if (c == "list-item") return "list";
  if (c == "section") return "section-header";
  return c;
}

const std::vector<std::string> kNames{"caption", "header", "title",     "footer",    "table",   "figure",
                                      "list",    "section-header", "text", "paragraph", "footnote"};

}  // namespace

double raster_iou(const BoundingBox& a, const BoundingBox& b, int cells) {
  const Raster r = rasterize(a, b, cells);
  const long uni = r.a + r.b - r.both;
  return uni > 0 ? static_cast<double>(r.both) / static_cast<double>(uni) : 0.0;
}

double raster_giou(const BoundingBox& a, const BoundingBox& b, int cells) {
  const Raster r = rasterize(a, b, cells);
  const double uni = static_cast<double>(r.a + r.b - r.both);
  const double hull = static_cast<double>(r.hull);
  return static_cast<double>(r.both) / uni - (hull - uni) / hull;
}

std::vector<layoutfuse::FusedLabel> naive_refine(const layoutfuse::Page& page, const NaiveConfig& cfg,
                                                 const layoutfuse::GateParams* gate) {
  using layoutfuse::FusedLabel;
  using layoutfuse::Provenance;
  std::vector<FusedLabel> out;
  std::vector<bool> matched(page.llm.size(), false);

  auto compatible = [&](const std::string& a, const std::string& b) {
    const std::string x = canon(a), y = canon(b);
    return x == y || cfg.confusable.count({x, y}) || cfg.confusable.count({y, x});
  };

  for (std::size_t t = 0; t < page.teacher.size(); ++t) {
    const auto& bt = page.teacher[t];
    std::size_t star = page.llm.size();
    double best = -1.0;
    for (std::size_t k = 0; k < page.llm.size(); ++k) {
      if (matched[k]) continue;
      const double v = naive_iou(bt.box, page.llm[k].box);
      if (v > best) {
        best = v;
        star = k;
      }
    }
    if (star < page.llm.size() && best >= cfg.tau && compatible(bt.category, page.llm[star].category)) {
      const auto& r = page.llm[star];
      matched[star] = true;
      double a = cfg.alpha;
      double lam = cfg.w_t;
      if (gate) {
        const double pt = std::clamp(bt.confidence, 0.0, 1.0);
        const double sl = std::clamp(r.score, 0.0, 1.0);
        const double io = std::clamp(best, 0.0, 1.0);
        a = lam = layoutfuse::gate_forward(*gate, layoutfuse::GateInput{{pt, sl, io}, r.q_text, r.q_spatial});
      } else if (bt.coord_variance) {
        const double vt = *bt.coord_variance;
        const double vl = cfg.llm_var_scale / (r.q_text * r.q_spatial);
        a = lam = vt == 0.0 ? 1.0 : (1.0 / vt) / (1.0 / vt + 1.0 / vl);
      }
      FusedLabel f;
      f.box = {a * bt.box.x1 + (1 - a) * r.box.x1, a * bt.box.y1 + (1 - a) * r.box.y1,
               a * bt.box.x2 + (1 - a) * r.box.x2, a * bt.box.y2 + (1 - a) * r.box.y2};
      const double pt = sig(lg(bt.confidence) / cfg.T_t);
      const double sl = sig(lg(r.score) / cfg.T_l);
      f.confidence = sig(lam * lg(pt) + (1 - lam) * lg(sl));
      f.category = bt.category == r.category ? bt.category : r.category;
      f.provenance = Provenance::kFused;
      f.teacher_index = t;
      f.llm_index = star;
      out.push_back(f);
    } else {
      const double thr = cfg.rare.count(canon(bt.category)) ? cfg.thr_rare : cfg.thr_frequent;
      if (bt.confidence >= thr) {
        FusedLabel f;
        f.box = bt.box;
        f.category = bt.category;
        f.confidence = bt.confidence;
        f.provenance = Provenance::kTeacher;
        f.teacher_index = t;
        out.push_back(f);
      }
    }
  }
  for (std::size_t k = 0; k < page.llm.size(); ++k) {
    const auto& r = page.llm[k];
    if (!matched[k] && r.score >= cfg.soft_min && cfg.soft.count(canon(r.category))) {
      FusedLabel f;
      f.box = r.box;
      f.category = r.category;
      f.confidence = r.score;
      f.provenance = Provenance::kLlmSoft;
      f.smoothing = cfg.eps;
      f.llm_index = k;
      out.push_back(f);
    }
  }
  return out;
}

BoundingBox random_box(layoutfuse::Rng& rng, double min_side) {
  const double w = rng.uniform(min_side, 0.5), h = rng.uniform(min_side, 0.5);
  const double x = rng.uniform(0.0, 1.0 - w), y = rng.uniform(0.0, 1.0 - h);
  return {x, y, x + w, y + h};
}

layoutfuse::Page random_page(layoutfuse::Rng& rng, std::size_t id, bool with_variance) {
  layoutfuse::Page p;
  p.page_id = "rand-" + std::to_string(id);
  const std::size_t nt = rng.below(7), nl = rng.below(7);
  for (std::size_t i = 0; i < nt; ++i) {
    layoutfuse::TeacherPrediction t;
    t.box = random_box(rng);
    t.category = kNames[rng.below(kNames.size())];
    t.confidence = rng.uniform(0.01, 0.99);
    if (with_variance && rng.bernoulli(0.7)) t.coord_variance = rng.bernoulli(0.1) ? 0.0 : rng.uniform(1e-5, 0.01);
    p.teacher.push_back(t);
  }
  for (std::size_t i = 0; i < nl; ++i) {
    layoutfuse::LlmRegion r;
    if (!p.teacher.empty() && rng.bernoulli(0.7)) {
      const auto& src = p.teacher[rng.below(p.teacher.size())];
      const double j = rng.uniform(0.0, 0.08);
      r.box = {std::max(0.0, src.box.x1 + rng.uniform(-j, j)), std::max(0.0, src.box.y1 + rng.uniform(-j, j)),
               std::min(1.0, src.box.x2 + rng.uniform(-j, j)), std::min(1.0, src.box.y2 + rng.uniform(-j, j))};
      if (!(r.box.x1 < r.box.x2 && r.box.y1 < r.box.y2)) r.box = src.box;
      r.category = rng.bernoulli(0.6) ? src.category : kNames[rng.below(kNames.size())];
    } else {
      r.box = random_box(rng);
      r.category = kNames[rng.below(kNames.size())];
    }
    r.score = rng.uniform(0.01, 0.99);
    r.q_text = rng.uniform(0.1, 1.0);
    r.q_spatial = rng.uniform(0.1, 1.0);
    p.llm.push_back(r);
  }
  return p;
}

namespace {

double simulated_t(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> z;
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = z(gen);
    s += d;
    ss += d * d;
  }
  const double mean = s / n;
  const double var = (ss - n * mean * mean) / (n - 1);
  return mean / std::sqrt(var / n);
}

}  // namespace

double monte_carlo_t_pvalue(double t, std::size_t n, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) hits += std::abs(simulated_t(gen, n)) >= std::abs(t);
  return static_cast<double>(hits) / static_cast<double>(draws);
}

double monte_carlo_t_upper_tail(double t, std::size_t n, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) hits += simulated_t(gen, n) >= t;
  return static_cast<double>(hits) / static_cast<double>(draws);
}

double boost_incomplete_beta(double a, double b, double x) { return boost::math::ibeta(a, b, x); }

double boost_student_t_cdf(double t, double dof) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(dof), t);
}

double direct_fusion_variance(double sigma_t, double sigma_l, double rho, double alpha, std::size_t samples,
                              std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double c = z(gen), u = z(gen), v = z(gen);
    const double et = sigma_t * (std::sqrt(rho) * c + std::sqrt(1 - rho) * u);
    const double el = sigma_l * (std::sqrt(rho) * c + std::sqrt(1 - rho) * v);
    const double f = alpha * et + (1 - alpha) * el;
    s += f;
    ss += f * f;
  }
  const double mean = s / samples;
  return (ss - samples * mean * mean) / (samples - 1);
}

}  // namespace oracle
