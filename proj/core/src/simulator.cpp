#include "layoutfuse/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "layoutfuse/calibration.hpp"
#include "layoutfuse/error.hpp"
#include "layoutfuse/geometry.hpp"
#include "layoutfuse/random.hpp"

namespace layoutfuse {

std::vector<std::pair<std::string, double>> default_category_frequencies() {
  return {{"text", 0.35},   {"paragraph", 0.15}, {"section-header", 0.12}, {"list", 0.08},
          {"table", 0.06},  {"figure", 0.06},    {"caption", 0.06},        {"header", 0.04},
          {"footer", 0.04}, {"title", 0.02},     {"footnote", 0.02}};
}

std::vector<CategoryPair> default_simulator_confusions() {
  auto pairs = default_confusable_pairs();
  pairs.insert(pairs.end(), {{"text", "paragraph"}, {"list", "text"}, {"footnote", "footer"}, {"header", "title"}});
  return pairs;
}

SimConfig default_sim_config() {
  SimConfig c;
  c.category_frequencies = default_category_frequencies();
  c.confusion_pairs = default_simulator_confusions();
  return c;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("simulator." + m); };
  if (grid_rows == 0 || grid_cols == 0) fail("grid_rows/grid_cols: must be >= 1");
  if (regions_min > regions_max) fail("regions_min: must not exceed regions_max");
  if (regions_max > grid_rows * grid_cols)
    fail("regions_max: " + std::to_string(regions_max) + " regions do not fit a " + std::to_string(grid_rows) + "x" +
         std::to_string(grid_cols) + " grid");
  Taxonomy tax = [&] {
    try {
      return Taxonomy::by_name(taxonomy);
    } catch (const Error&) {
      fail("taxonomy: unknown taxonomy '" + taxonomy + "'");
    }
    return Taxonomy::doclaynet();
  }();
  double total = 0.0;
  for (const auto& [name, p] : category_frequencies) {
    if (!tax.contains(name)) fail("category_frequencies: unknown category '" + name + "'");
    if (!(p >= 0.0) || !std::isfinite(p)) fail("category_frequencies." + name + ": must be >= 0");
    total += p;
  }
  if (!category_frequencies.empty() && std::abs(total - 1.0) > 1e-6)
    fail("category_frequencies: probabilities sum to " + std::to_string(total) + ", expected 1");
  auto check_sigma = [&](double s, const std::string& field) {
    if (!(s >= 0.0) || !std::isfinite(s)) fail(field + ": must be a finite value >= 0");
  };
  check_sigma(sigma_teacher, "sigma_teacher");
  check_sigma(sigma_llm, "sigma_llm");
  for (const auto& [name, s] : sigma_teacher_by_category) {
    if (!tax.contains(name)) fail("sigma_teacher_by_category: unknown category '" + name + "'");
    check_sigma(s, "sigma_teacher_by_category." + name);
  }
  for (const auto& [name, s] : sigma_llm_by_category) {
    if (!tax.contains(name)) fail("sigma_llm_by_category: unknown category '" + name + "'");
    check_sigma(s, "sigma_llm_by_category." + name);
  }
  if (!(rho >= 0.0 && rho <= 0.99)) fail("rho: must be in [0, 0.99]");
  if (!std::isfinite(noise_confidence_coupling)) fail("noise_confidence_coupling: must be finite");
  if (!(noise_hidden_spread >= 0.0) || !std::isfinite(noise_hidden_spread))
    fail("noise_hidden_spread: must be >= 0");
  if (!(teacher_confusion >= 0.0 && teacher_confusion < 0.5)) fail("teacher_confusion: must be in [0, 0.5)");
  if (!(llm_confusion >= 0.0 && llm_confusion < 0.5)) fail("llm_confusion: must be in [0, 0.5)");
  for (const auto& [a, b] : confusion_pairs)
    if (!tax.contains(a) || !tax.contains(b)) fail("confusion_pairs: unknown category in {" + a + ", " + b + "}");
  if (!(confidence_spread >= 0.0) || !std::isfinite(confidence_spread)) fail("confidence_spread: must be >= 0");
  if (!(teacher_temperature > 0.0) || !std::isfinite(teacher_temperature))
    fail("teacher_temperature: must be > 0");
  if (!(llm_temperature > 0.0) || !std::isfinite(llm_temperature)) fail("llm_temperature: must be > 0");
  if (!(teacher_miss_rate >= 0.0 && teacher_miss_rate < 1.0)) fail("teacher_miss_rate: must be in [0, 1)");
  if (!(llm_miss_rate >= 0.0 && llm_miss_rate < 1.0)) fail("llm_miss_rate: must be in [0, 1)");
}

double SimConfig::teacher_sigma_for(const std::string& category) const {
  const auto it = sigma_teacher_by_category.find(category);
  return it == sigma_teacher_by_category.end() ? sigma_teacher : it->second;
}

double SimConfig::llm_sigma_for(const std::string& category) const {
  const auto it = sigma_llm_by_category.find(category);
  return it == sigma_llm_by_category.end() ? sigma_llm : it->second;
}

double logit_mean_for_error_rate(double error_rate, double spread) {
  if (!(error_rate > 0.0 && error_rate < 1.0)) throw Error("logit_mean_for_error_rate: rate must be in (0, 1)");
  if (!(spread >= 0.0)) throw Error("logit_mean_for_error_rate: spread must be >= 0");
  if (spread == 0.0) return logit(1.0 - error_rate);
  // E[1 - sigmoid(mu + spread Z)] by the trapezoid rule on [-8, 8]
  constexpr int kPoints = 1601;
  constexpr double kLo = -8.0;
  constexpr double kStep = 16.0 / (kPoints - 1);
  auto expected_error = [&](double mu) {
    double sum = 0.0;
    double wsum = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double z = kLo + kStep * i;
      const double w = std::exp(-0.5 * z * z) * ((i == 0 || i == kPoints - 1) ? 0.5 : 1.0);
      sum += w * sigmoid(-(mu + spread * z));
      wsum += w;
    }
    return sum / wsum;
  };
  double lo = -60.0;
  double hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_error(mid) > error_rate) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

constexpr double kProbFloor = 1e-9;

struct Model {
  SimConfig cfg;
  Taxonomy taxonomy;
  std::vector<std::string> categories;
  std::vector<double> cumulative;
  std::map<std::string, std::vector<std::string>> partners;
  double mu_teacher = 0.0;
  double mu_llm = 0.0;

  explicit Model(const SimConfig& c) : cfg(c), taxonomy(Taxonomy::by_name(c.taxonomy)) {
    cfg.validate();
    if (cfg.category_frequencies.empty()) {
      for (const auto& info : taxonomy.categories())
        cfg.category_frequencies.emplace_back(info.name, 1.0 / static_cast<double>(taxonomy.size()));
    }
    double acc = 0.0;
    for (const auto& [name, p] : cfg.category_frequencies) {
      categories.push_back(taxonomy.canonical(name));
      acc += p;
      cumulative.push_back(acc);
    }
    for (const auto& [a, b] : cfg.confusion_pairs) {
      const auto& ca = taxonomy.canonical(a);
      const auto& cb = taxonomy.canonical(b);
      if (ca == cb) continue;
      auto add = [&](const std::string& x, const std::string& y) {
        auto& v = partners[x];
        if (std::find(v.begin(), v.end(), y) == v.end()) v.push_back(y);
      };
      add(ca, cb);
      add(cb, ca);
    }
    // A zero error rate still needs a latent mean for the confidences.
    mu_teacher = logit_mean_for_error_rate(std::max(cfg.teacher_confusion, 1e-4), cfg.confidence_spread);
    mu_llm = logit_mean_for_error_rate(std::max(cfg.llm_confusion, 1e-4), cfg.confidence_spread);
  }

  std::string sample_category(Rng& rng) const {
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), categories.size() - 1);
    return categories[i];
  }

  std::string confuse(const std::string& truth, Rng& rng) const {
    const auto it = partners.find(truth);
    if (it != partners.end() && !it->second.empty()) return it->second[rng.below(it->second.size())];
    std::vector<std::string> others;
    for (const auto& info : taxonomy.categories())
      if (info.name != truth) others.push_back(info.name);
    if (others.empty()) return truth;
    return others[rng.below(others.size())];
  }
};

struct SourceDraw {
  std::string category;
  double confidence = 0.5;
  double sigma = 0.0;
  bool correct = true;
};

// Latent logit z ~ N(mu, spread^2); correct ~ Bernoulli(sigmoid(z)); the
// reported confidence is sigmoid(temperature * z).
SourceDraw draw_source(const Model& m, const std::string& truth, double mu, double error_rate, double temperature,
                       double base_sigma, Rng& rng) {
  SourceDraw d;
  const double zscore = rng.normal();
  const double z = mu + m.cfg.confidence_spread * zscore;
  const double u = rng.uniform();
  const double hidden = rng.normal();
  d.correct = error_rate == 0.0 || u < sigmoid(z);
  d.category = d.correct ? truth : m.confuse(truth, rng);
  d.confidence = std::clamp(sigmoid(temperature * z), kProbFloor, 1.0 - kProbFloor);
  const double coupled = std::clamp(zscore, -3.0, 3.0);
  d.sigma = base_sigma * std::exp(-m.cfg.noise_confidence_coupling * coupled + m.cfg.noise_hidden_spread * hidden);
  return d;
}

BoundingBox perturb(const BoundingBox& truth, const std::array<double, 4>& error, int* clamped) {
  auto c = truth.coords();
  for (std::size_t i = 0; i < 4; ++i) c[i] += error[i];
  BoundingBox b = BoundingBox::from_coords(c);
  const int n = clamp_to_unit(b);
  if (clamped) *clamped += n;
  constexpr double kMin = 1e-6;
  if (b.x2 - b.x1 < kMin) {
    const double mid = std::clamp(0.5 * (b.x1 + b.x2), kMin, 1.0 - kMin);
    b.x1 = mid - 0.5 * kMin;
    b.x2 = mid + 0.5 * kMin;
  }
  if (b.y2 - b.y1 < kMin) {
    const double mid = std::clamp(0.5 * (b.y1 + b.y2), kMin, 1.0 - kMin);
    b.y1 = mid - 0.5 * kMin;
    b.y2 = mid + 0.5 * kMin;
  }
  return b;
}

struct RegionDraw {
  TeacherPrediction teacher;
  LlmRegion llm;
  bool teacher_present = true;
  bool llm_present = true;
  SimulatedRegion facts;
};

RegionDraw draw_region(const Model& m, const GroundTruthAnnotation& gt, Rng& rng) {
  const SimConfig& c = m.cfg;
  const double base_t = c.teacher_sigma_for(gt.category);
  const double base_l = c.llm_sigma_for(gt.category);
  const SourceDraw t = draw_source(m, gt.category, m.mu_teacher, c.teacher_confusion, c.teacher_temperature, base_t, rng);
  const SourceDraw l = draw_source(m, gt.category, m.mu_llm, c.llm_confusion, c.llm_temperature, base_l, rng);

  std::array<double, 4> et{}, el{};
  const double a = std::sqrt(c.rho);
  const double b = std::sqrt(1.0 - c.rho);
  for (std::size_t i = 0; i < 4; ++i) {
    const double shared = rng.normal();
    et[i] = t.sigma * (a * shared + b * rng.normal());
    el[i] = l.sigma * (a * shared + b * rng.normal());
  }

  RegionDraw r;
  r.teacher_present = rng.uniform() >= c.teacher_miss_rate;
  r.llm_present = rng.uniform() >= c.llm_miss_rate;

  r.teacher.box = perturb(gt.box, et, nullptr);
  r.teacher.category = t.category;
  r.teacher.confidence = t.confidence;
  if (c.emit_coord_var) r.teacher.coord_variance = t.sigma * t.sigma;

  r.llm.box = perturb(gt.box, el, nullptr);
  r.llm.category = l.category;
  r.llm.score = l.confidence;
  // Quality relative to the category's base sigma, so that
  // base^2 / (q_text q_spatial) is the instance variance whenever sigma >= base.
  const double q = (l.sigma > 0.0 && base_l > 0.0) ? std::min(1.0, base_l / l.sigma) : 1.0;
  r.llm.q_text = std::max(q, 1e-6);
  r.llm.q_spatial = std::max(q, 1e-6);

  r.facts.sigma_teacher = t.sigma;
  r.facts.sigma_llm = l.sigma;
  r.facts.teacher_correct = t.correct;
  r.facts.llm_correct = l.correct;
  return r;
}

std::string stub_text(const std::string& category, std::size_t ordinal, Rng& rng) {
  if (category == "caption") return (rng.bernoulli(0.5) ? "Figure " : "Table ") + std::to_string(ordinal) + ": caption";
  if (category == "header") return "Running header";
  if (category == "footer") return "page " + std::to_string(ordinal);
  if (category == "title") return "Document title";
  if (category == "section-header") return std::to_string(ordinal) + " Section";
  if (category == "footnote") return std::to_string(ordinal) + " footnote";
  if (category == "table" || category == "figure") return "";
  return "Body text";
}

bool stub_bold(const std::string& category) {
  return category == "header" || category == "title" || category == "section-header";
}

double oracle_weight(double sigma_t, double sigma_l, double rho) {
  const double den = sigma_t * sigma_t + sigma_l * sigma_l - 2.0 * rho * sigma_t * sigma_l;
  if (den <= 1e-12 * std::max(1e-300, sigma_t * sigma_t + sigma_l * sigma_l) || den <= 0.0) return 0.5;
  return std::clamp((sigma_l * sigma_l - rho * sigma_t * sigma_l) / den, 0.0, 1.0);
}

}  // namespace

std::vector<Page> generate_pages(const SimConfig& config) {
  const Model m(config);
  std::vector<Page> pages;
  pages.reserve(config.pages);
  const double cell_w = 1.0 / static_cast<double>(config.grid_cols);
  const double cell_h = 1.0 / static_cast<double>(config.grid_rows);
  const std::size_t cells = config.grid_rows * config.grid_cols;
  for (std::size_t p = 0; p < config.pages; ++p) {
    Rng rng(derive_seed(config.seed, 1, p));
    Page page;
    char id[32];
    std::snprintf(id, sizeof id, "sim-%06zu", p);
    page.page_id = id;
    const std::size_t count =
        config.regions_min + static_cast<std::size_t>(rng.below(config.regions_max - config.regions_min + 1));
    std::vector<std::size_t> cell(cells);
    std::iota(cell.begin(), cell.end(), 0);
    for (std::size_t i = 0; i < count; ++i) std::swap(cell[i], cell[i + rng.below(cells - i)]);
    std::sort(cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(count));

    std::vector<GroundTruthAnnotation> gt;
    for (std::size_t i = 0; i < count; ++i) {
      const double x0 = static_cast<double>(cell[i] % config.grid_cols) * cell_w;
      const double y0 = static_cast<double>(cell[i] / config.grid_cols) * cell_h;
      BoundingBox box{x0 + cell_w * rng.uniform(0.05, 0.2), y0 + cell_h * rng.uniform(0.05, 0.2),
                      x0 + cell_w * (1.0 - rng.uniform(0.05, 0.2)), y0 + cell_h * (1.0 - rng.uniform(0.05, 0.2))};
      const std::string category = m.sample_category(rng);
      page.ocr_blocks.push_back({box, stub_text(category, i + 1, rng), stub_bold(category)});
      gt.push_back({box, category});
    }
    page.ground_truth = std::move(gt);
    pages.push_back(std::move(page));
  }
  return pages;
}

std::vector<SimulatedPage> simulate_predictions(std::span<const Page> pages, const SimConfig& config) {
  const Model m(config);
  std::vector<SimulatedPage> out;
  out.reserve(pages.size());
  for (std::size_t p = 0; p < pages.size(); ++p) {
    const Page& src = pages[p];
    if (!src.ground_truth) throw DatasetError("page '" + src.page_id + "': ground truth is required for simulation");
    Rng rng(derive_seed(config.seed, 2, p));
    SimulatedPage sp;
    sp.page = src;
    sp.page.teacher.clear();
    sp.page.llm.clear();
    sp.page.refined.reset();
    for (std::size_t j = 0; j < src.ground_truth->size(); ++j) {
      RegionDraw d = draw_region(m, (*src.ground_truth)[j], rng);
      d.facts.gt_index = j;
      if (d.teacher_present) {
        d.facts.teacher_index = sp.page.teacher.size();
        sp.page.teacher.push_back(std::move(d.teacher));
      }
      if (d.llm_present) {
        d.facts.llm_index = sp.page.llm.size();
        sp.page.llm.push_back(std::move(d.llm));
      }
      sp.regions.push_back(d.facts);
    }
    out.push_back(std::move(sp));
  }
  return out;
}

std::vector<SimulatedPage> simulate_dataset(const SimConfig& config) {
  const auto pages = generate_pages(config);
  return simulate_predictions(pages, config);
}

std::vector<OracleSample> sample_oracle_pairs(const SimConfig& config, std::size_t n, std::uint64_t seed) {
  const Model m(config);
  Rng rng(derive_seed(seed, 3));
  std::vector<OracleSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.uniform(0.1, 0.4);
    const double h = rng.uniform(0.03, 0.2);
    const double x1 = rng.uniform(0.05, 0.95 - w);
    const double y1 = rng.uniform(0.05, 0.95 - h);
    GroundTruthAnnotation gt{{x1, y1, x1 + w, y1 + h}, m.sample_category(rng)};
    const RegionDraw d = draw_region(m, gt, rng);
    OracleSample s;
    s.sample.input.psi = extract_psi(d.teacher.confidence, d.llm.score, iou(d.teacher.box, d.llm.box));
    s.sample.input.q_text = d.llm.q_text;
    s.sample.input.q_spatial = d.llm.q_spatial;
    s.sample.teacher_box = d.teacher.box;
    s.sample.llm_box = d.llm.box;
    s.sample.truth_box = gt.box;
    s.sample.teacher_correct = d.facts.teacher_correct;
    s.sample.llm_correct = d.facts.llm_correct;
    s.sigma_teacher = d.facts.sigma_teacher;
    s.sigma_llm = d.facts.sigma_llm;
    s.oracle_weight = oracle_weight(s.sigma_teacher, s.sigma_llm, config.rho);
    s.disagree = d.teacher.category != d.llm.category;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> monte_carlo_fusion_variance_curve(double sigma_t, double sigma_l, double rho,
                                                      std::span<const double> alphas, std::size_t samples,
                                                      std::uint64_t seed) {
  if (samples < 2) throw Error("monte_carlo_fusion_variance: at least two samples are required");
  if (!(sigma_t >= 0.0) || !(sigma_l >= 0.0)) throw Error("monte_carlo_fusion_variance: sigmas must be >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error("monte_carlo_fusion_variance: rho must be in [0, 1]");
  Rng rng(seed);
  const double a = std::sqrt(rho);
  const double b = std::sqrt(1.0 - rho);
  // Welford updates of the means and co-moments of (e_t, e_l)
  double mt = 0.0, ml = 0.0, ctt = 0.0, cll = 0.0, ctl = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = rng.normal();
    const double et = sigma_t * (a * z + b * rng.normal());
    const double el = sigma_l * (a * z + b * rng.normal());
    const double k = static_cast<double>(i + 1);
    const double dt = et - mt;
    const double dl = el - ml;
    mt += dt / k;
    ml += dl / k;
    ctt += dt * (et - mt);
    cll += dl * (el - ml);
    ctl += dt * (el - ml);
  }
  const double denom = static_cast<double>(samples - 1);
  const double vt = ctt / denom;
  const double vl = cll / denom;
  const double cov = ctl / denom;
  std::vector<double> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) out.push_back(alpha * alpha * vt + (1 - alpha) * (1 - alpha) * vl + 2 * alpha * (1 - alpha) * cov);
  return out;
}

double monte_carlo_fusion_variance(double sigma_t, double sigma_l, double rho, double alpha, std::size_t samples,
                                   std::uint64_t seed) {
  const double a[] = {alpha};
  return monte_carlo_fusion_variance_curve(sigma_t, sigma_l, rho, a, samples, seed).front();
}

}  // namespace layoutfuse
