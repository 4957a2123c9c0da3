#include "layoutfuse_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "layoutfuse/calibration.hpp"
#include "layoutfuse/config_io.hpp"
#include "layoutfuse/dataset.hpp"
#include "layoutfuse/error.hpp"
#include "layoutfuse/evaluation.hpp"
#include "layoutfuse/gating.hpp"
#include "layoutfuse/heuristics.hpp"
#include "layoutfuse/metrics.hpp"
#include "layoutfuse/random.hpp"
#include "layoutfuse/refine.hpp"
#include "layoutfuse/reports.hpp"
#include "layoutfuse/simulator.hpp"
#include "layoutfuse/theory.hpp"

#ifndef LAYOUTFUSE_VERSION
#define LAYOUTFUSE_VERSION "0.0.0"
#endif

namespace layoutfuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::vector<double> parse_metric_list(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<double> values;
  if (first != std::string_view::npos && text[first] == '[') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(std::string("metric list: malformed JSON: ") + e.what());
    }
    for (const auto& v : doc) {
      if (!v.is_number()) throw Error("metric list: expected numbers");
      values.push_back(v.get<double>());
    }
    return values;
  }
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw Error("metric list: not a number: '" + token + "'");
    values.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') flush();
    else token.push_back(c);
  }
  flush();
  return values;
}

namespace {

struct Context {
  const Options& opt;
  ProjectConfig config;
  CommandResult result;

  bool csv() const { return opt.format != Format::kJson; }
  bool json_out() const { return opt.format != Format::kCsv; }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = opt.out / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw Error("write failed for '" + path.string() + "'");
    result.outputs.push_back(name);
  }

  void write_pages(const std::string& name, std::span<const Page> pages) {
    save_dataset(opt.out / name, pages);
    result.outputs.push_back(name);
  }

  std::vector<Page> load(bool canonicalize = true) const {
    if (!opt.dataset) throw Error("--dataset is required");
    return load_dataset(*opt.dataset, canonicalize ? &config.taxonomy : nullptr).pages;
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void cmd_simulate(Context& ctx) {
  SimConfig sim = ctx.config.simulator;
  if (ctx.opt.seed) sim.seed = *ctx.opt.seed;
  if (ctx.opt.pages) sim.pages = *ctx.opt.pages;
  sim.validate();
  ctx.result.seed = sim.seed;
  const auto simulated = simulate_dataset(sim);
  std::vector<Page> pages;
  std::ostringstream oracle;
  oracle << "page_id,gt_index,teacher_index,llm_index,sigma_teacher,sigma_llm,teacher_correct,llm_correct\n";
  std::size_t regions = 0;
  for (const auto& sp : simulated) {
    for (const auto& r : sp.regions) {
      oracle << sp.page.page_id << ',' << r.gt_index << ','
             << (r.teacher_index ? std::to_string(*r.teacher_index) : "") << ','
             << (r.llm_index ? std::to_string(*r.llm_index) : "") << ',' << num(r.sigma_teacher) << ','
             << num(r.sigma_llm) << ',' << r.teacher_correct << ',' << r.llm_correct << '\n';
      ++regions;
    }
    pages.push_back(sp.page);
  }
  ctx.write_pages("dataset.jsonl", pages);
  ctx.write("oracle.csv", oracle.str());
  ctx.result.summary = "simulated " + std::to_string(pages.size()) + " pages with " + std::to_string(regions) +
                       " regions (seed " + std::to_string(sim.seed) + ")";
}

std::optional<GateParams> load_gate(const Options& opt) {
  if (!opt.gate) return std::nullopt;
  if (!fs::exists(*opt.gate)) throw Error("gate file not found: '" + opt.gate->string() + "'");
  return gate_from_json(read_text_file(*opt.gate));
}

void cmd_fuse(Context& ctx) {
  auto pages = ctx.load();
  const PseudoLabelRefiner refiner(ctx.config.fusion, ctx.config.taxonomy, ctx.config.curriculum, load_gate(ctx.opt));
  std::map<Provenance, std::size_t> counts{{Provenance::kFused, 0}, {Provenance::kTeacher, 0}, {Provenance::kLlmSoft, 0}};
  for (auto& page : pages) {
    page.refined = refiner.refine(page);
    for (const auto& l : *page.refined) ++counts[l.provenance];
  }
  ctx.write_pages("refined.jsonl", pages);
  if (ctx.json_out()) ctx.write("provenance.json", provenance_counts_to_json(counts));
  if (ctx.csv()) {
    std::ostringstream csv;
    csv << "provenance,count\n";
    for (const auto& [p, n] : counts) csv << to_string(p) << ',' << n << '\n';
    ctx.write("provenance.csv", csv.str());
  }
  ctx.result.summary = "fused " + std::to_string(pages.size()) + " pages: fused=" +
                       std::to_string(counts[Provenance::kFused]) +
                       " teacher=" + std::to_string(counts[Provenance::kTeacher]) +
                       " llm-soft=" + std::to_string(counts[Provenance::kLlmSoft]);
}

// Gamma over matched pairs of a dataset; needs per-box teacher variances.
std::vector<double> dataset_gammas(const Context& ctx) {
  const auto pages = ctx.load();
  const PseudoLabelRefiner refiner(ctx.config.fusion, ctx.config.taxonomy, ctx.config.curriculum);
  std::vector<double> gammas;
  for (const auto& page : pages) {
    for (const auto& m : refiner.match(page).matches) {
      const auto& t = page.teacher[m.teacher_index];
      const auto& l = page.llm[m.llm_index];
      if (!t.coord_variance)
        throw DatasetError("page '" + page.page_id + "': teacher[" + std::to_string(m.teacher_index) +
                           "].coord_var is required for the regime analysis");
      const double st = std::sqrt(*t.coord_variance);
      const double sl = std::sqrt(ctx.config.fusion.llm_variance_scale * llm_spatial_variance(l.q_text, l.q_spatial));
      gammas.push_back(complementarity_factor(st, sl, t.category != l.category ? 1.0 : 0.0));
    }
  }
  if (gammas.empty()) throw DatasetError("no matched pairs in the dataset");
  return gammas;
}

void cmd_theory(Context& ctx) {
  TheoryReport report;
  if (ctx.opt.experiment) {
    SampleComplexityConfig exp = ctx.config.experiment;
    if (ctx.opt.seed) exp.master_seed = *ctx.opt.seed;
    ctx.result.seed = exp.master_seed;
    report = run_sample_complexity_experiment(exp);
  } else {
    report = theory_diagnostics(ctx.opt.n.value_or(26000.0), ctx.config.theory);
    ctx.result.seed = ctx.opt.seed.value_or(0);
  }
  if (ctx.opt.dataset) report.boundary_fraction = boundary_measure(dataset_gammas(ctx), ctx.config.theory);
  if (ctx.csv()) ctx.write("theory.csv", theory_report_to_csv(report));
  if (ctx.json_out()) ctx.write("theory.json", theory_report_to_json(report));
  std::ostringstream s;
  s << "k=" << num(report.k) << " sqrt(k/n)=" << num(report.sqrt_k_over_n)
    << " gap_simple=" << num(report.predicted_gap_simple) << " gap_test3=" << num(report.predicted_gap_test3);
  if (report.boundary_fraction) s << " boundary_fraction=" << num(*report.boundary_fraction);
  if (report.slope) s << " slope=" << num(report.slope->slope) << "+-" << num(report.slope->slope_stderr);
  for (const auto& note : report.notes) s << "\nnote: " << note;
  ctx.result.summary = s.str();
}

std::vector<Stream> available_streams(std::span<const Page> pages) {
  const bool refined = !pages.empty() && std::all_of(pages.begin(), pages.end(), [](const Page& p) {
    return p.refined.has_value();
  });
  if (refined) return {Stream::kRefined, Stream::kTeacher, Stream::kLlm};
  return {Stream::kTeacher, Stream::kLlm};
}

void cmd_evaluate(Context& ctx) {
  const auto pages = ctx.load();
  for (const auto& p : pages)
    if (!p.ground_truth) throw DatasetError("page '" + p.page_id + "': ground truth is required for evaluation");
  std::map<std::string, ApResult> ap;
  std::map<std::string, EceResult> ece;
  json calibration = json::object();
  std::ostringstream calib_csv;
  calib_csv << "stream,temperature,ece_before,ece_after,fit_samples,eval_samples\n";
  std::ostringstream summary;
  for (Stream s : available_streams(pages)) {
    const std::string name(to_string(s));
    const auto images = eval_images(pages, s);
    ap[name] = average_precision(images);
    const auto outcomes = confidence_outcomes(images);
    if (!outcomes.confidences.empty())
      ece[name] = expected_calibration_error(outcomes.confidences, outcomes.correct);
    summary << name << ": AP=" << num(ap[name].ap) << " AP50=" << num(ap[name].ap50)
            << " AP75=" << num(ap[name].ap75);
    if (ece.count(name)) summary << " ECE=" << num(ece[name].ece);
    summary << '\n';
    if (!ctx.opt.calibrate) continue;
    // fit on even pages, report on odd pages
    std::vector<EvalImage> fit_images, eval_part;
    for (std::size_t i = 0; i < images.size(); ++i) (i % 2 == 0 ? fit_images : eval_part).push_back(images[i]);
    const auto fit_data = confidence_outcomes(fit_images);
    const auto eval_data = confidence_outcomes(eval_part);
    if (eval_data.confidences.empty()) throw DatasetError("calibration: no predictions on the held-out pages");
    const TemperatureFit fit = fit_temperature(fit_data.confidences, fit_data.correct);
    std::vector<double> scaled;
    for (double c : eval_data.confidences) scaled.push_back(apply_temperature(c, fit.temperature));
    const double before = expected_calibration_error(eval_data.confidences, eval_data.correct).ece;
    const double after = expected_calibration_error(scaled, eval_data.correct).ece;
    calibration[name] = {{"temperature", fit.temperature},
                         {"ece_before", before},
                         {"ece_after", after},
                         {"fit_samples", fit_data.confidences.size()},
                         {"eval_samples", eval_data.confidences.size()}};
    calib_csv << name << ',' << num(fit.temperature) << ',' << num(before) << ',' << num(after) << ','
              << fit_data.confidences.size() << ',' << eval_data.confidences.size() << '\n';
    summary << "  calibrated T=" << num(fit.temperature) << " ECE " << num(before) << " -> " << num(after) << '\n';
  }
  if (ctx.csv()) {
    ctx.write("ap.csv", ap_to_csv(ap));
    ctx.write("ece.csv", ece_to_csv(ece));
    if (ctx.opt.calibrate) ctx.write("calibration.csv", calib_csv.str());
  }
  if (ctx.json_out()) {
    ctx.write("ap.json", ap_to_json(ap));
    ctx.write("ece.json", ece_to_json(ece));
    if (ctx.opt.calibrate) ctx.write("calibration.json", calibration.dump(2) + "\n");
  }
  ctx.result.summary = summary.str();
  if (!ctx.result.summary.empty()) ctx.result.summary.pop_back();
}

void cmd_compare(Context& ctx) {
  if (!ctx.opt.a || !ctx.opt.b) throw Error("--a and --b are required");
  const auto a = parse_metric_list(read_text_file(*ctx.opt.a));
  const auto b = parse_metric_list(read_text_file(*ctx.opt.b));
  if (a.size() != b.size())
    throw Error("compare: runs are not paired (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                " values)");
  const TTestResult t = paired_t_test(a, b);
  const TostResult e = tost(a, b, ctx.opt.margin, ctx.opt.alpha);
  const std::string stars = significance_stars(t.p);
  if (ctx.json_out()) {
    json doc = {{"n", t.n},
                {"mean_difference", t.mean_difference},
                {"t", std::isfinite(t.t) ? json(t.t) : json(nullptr)},
                {"p", t.p},
                {"stars", stars},
                {"zero_variance", t.zero_variance},
                {"tost",
                 {{"margin", e.margin},
                  {"alpha", e.alpha},
                  {"p_lower", e.p_lower},
                  {"p_upper", e.p_upper},
                  {"equivalent", e.equivalent}}}};
    ctx.write("compare.json", doc.dump(2) + "\n");
  }
  if (ctx.csv()) {
    std::ostringstream csv;
    csv << "n,mean_difference,t,p,stars,tost_p_lower,tost_p_upper,margin,alpha,equivalent,zero_variance\n"
        << t.n << ',' << num(t.mean_difference) << ',' << num(t.t) << ',' << num(t.p) << ',' << stars << ','
        << num(e.p_lower) << ',' << num(e.p_upper) << ',' << num(e.margin) << ',' << num(e.alpha) << ','
        << (e.equivalent ? 1 : 0) << ',' << (t.zero_variance ? 1 : 0) << '\n';
    ctx.write("compare.csv", csv.str());
  }
  std::ostringstream s;
  s << "mean difference " << num(t.mean_difference) << ", t=" << num(t.t) << ", p=" << num(t.p) << stars
    << "; TOST (margin " << num(e.margin) << ", alpha " << num(e.alpha) << "): "
    << (e.equivalent ? "equivalent" : "not equivalent");
  if (t.zero_variance) s << " [zero-variance convention]";
  ctx.result.summary = s.str();
}

void cmd_heuristics(Context& ctx) {
  auto pages = ctx.load();
  std::map<std::string, std::size_t> counts;
  for (auto& page : pages) {
    page.llm = heuristic_regions(page, ctx.config.heuristics);
    page.refined.reset();
    for (const auto& r : page.llm) ++counts[r.category];
  }
  ctx.write_pages("heuristic.jsonl", pages);
  if (ctx.json_out()) ctx.write("heuristics.json", json(counts).dump(2) + "\n");
  if (ctx.csv()) {
    std::ostringstream csv;
    csv << "category,regions\n";
    for (const auto& [c, n] : counts) csv << c << ',' << n << '\n';
    ctx.write("heuristics.csv", csv.str());
  }
  std::ostringstream s;
  s << "heuristic regions on " << pages.size() << " pages:";
  for (const auto& [c, n] : counts) s << ' ' << c << '=' << n;
  ctx.result.summary = s.str();
}

Stream parse_stream(const std::string& s) {
  if (s == "teacher") return Stream::kTeacher;
  if (s == "llm") return Stream::kLlm;
  if (s == "refined") return Stream::kRefined;
  throw Error("unknown stream '" + s + "' (expected teacher, llm or refined)");
}

void cmd_calibrate(Context& ctx) {
  const auto pages = ctx.load();
  const Stream stream = parse_stream(ctx.opt.stream);
  const auto outcomes = confidence_outcomes(eval_images(pages, stream));
  const TemperatureFit fit = fit_temperature(outcomes.confidences, outcomes.correct);
  std::vector<double> scaled;
  for (double c : outcomes.confidences) scaled.push_back(apply_temperature(c, fit.temperature));
  const double before = expected_calibration_error(outcomes.confidences, outcomes.correct).ece;
  const double after = expected_calibration_error(scaled, outcomes.correct).ece;
  if (ctx.json_out()) {
    json doc = {{"stream", ctx.opt.stream},  {"temperature", fit.temperature}, {"nll", fit.nll},
                {"iterations", fit.iterations}, {"samples", outcomes.confidences.size()},
                {"ece_before", before},      {"ece_after", after}};
    ctx.write("calibration.json", doc.dump(2) + "\n");
  }
  if (ctx.csv()) {
    std::ostringstream csv;
    csv << "stream,temperature,nll,iterations,samples,ece_before,ece_after\n"
        << ctx.opt.stream << ',' << num(fit.temperature) << ',' << num(fit.nll) << ',' << fit.iterations << ','
        << outcomes.confidences.size() << ',' << num(before) << ',' << num(after) << '\n';
    ctx.write("calibration.csv", csv.str());
  }
  ctx.result.summary = ctx.opt.stream + ": T=" + num(fit.temperature) + " ECE " + num(before) + " -> " + num(after);
}

// Matched pairs whose teacher box overlaps a ground-truth box at IoU >= 0.5.
std::vector<GateSample> samples_from_pages(std::span<const Page> pages, const PseudoLabelRefiner& refiner) {
  std::vector<GateSample> out;
  for (const auto& page : pages) {
    if (!page.ground_truth) throw DatasetError("page '" + page.page_id + "': ground truth is required for training");
    for (const auto& m : refiner.match(page).matches) {
      const auto& t = page.teacher[m.teacher_index];
      const auto& l = page.llm[m.llm_index];
      double best = 0.5;
      const GroundTruthAnnotation* truth = nullptr;
      for (const auto& g : *page.ground_truth) {
        const double v = iou(t.box, g.box);
        if (v >= best) {
          best = v;
          truth = &g;
        }
      }
      if (!truth) continue;
      GateSample s;
      s.input.psi = extract_psi(t, l, m);
      s.input.q_text = l.q_text;
      s.input.q_spatial = l.q_spatial;
      s.teacher_box = t.box;
      s.llm_box = l.box;
      s.truth_box = truth->box;
      s.teacher_correct = t.category == truth->category;
      s.llm_correct = l.category == truth->category;
      out.push_back(s);
    }
  }
  return out;
}

void cmd_train_gate(Context& ctx) {
  GateTrainConfig train = ctx.config.gate_training;
  if (ctx.opt.seed) train.seed = *ctx.opt.seed;
  ctx.result.seed = train.seed;
  std::vector<GateSample> samples;
  if (ctx.opt.dataset) {
    const PseudoLabelRefiner refiner(ctx.config.fusion, ctx.config.taxonomy, ctx.config.curriculum);
    samples = samples_from_pages(ctx.load(), refiner);
  } else {
    for (auto& s : sample_oracle_pairs(ctx.config.simulator, ctx.opt.samples, derive_seed(train.seed, 0x5a3)))
      samples.push_back(s.sample);
  }
  const GateTrainResult r = train_gate(samples, train);
  ctx.write("gate.json", gate_to_json(r.params) + "\n");
  if (ctx.csv()) {
    std::ostringstream csv;
    csv << "epoch,train_loss,validation_loss\n";
    for (const auto& e : r.history) csv << e.epoch << ',' << num(e.train_loss) << ',' << num(e.validation_loss) << '\n';
    ctx.write("training.csv", csv.str());
  }
  if (ctx.json_out()) {
    json hist = json::array();
    for (const auto& e : r.history)
      hist.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"validation_loss", e.validation_loss}});
    json doc = {{"samples", samples.size()},
                {"best_epoch", r.best_epoch},
                {"box_scale", r.box_scale},
                {"parameter_count", r.params.parameter_count()},
                {"history", hist}};
    ctx.write("training.json", doc.dump(2) + "\n");
  }
  double mean_gate = 0.0;
  for (const auto& s : samples) mean_gate += gate_forward(r.params, s.input);
  mean_gate /= static_cast<double>(samples.size());
  ctx.result.summary = "trained gate on " + std::to_string(samples.size()) + " pairs: best epoch " +
                       std::to_string(r.best_epoch) + ", " + std::to_string(r.params.parameter_count()) +
                       " parameters, mean teacher weight " + num(mean_gate);
}

void cmd_lipschitz(Context& ctx) {
  if (!ctx.opt.gate) throw Error("--gate is required");
  const GateParams gate = *load_gate(ctx.opt);
  std::vector<GateInput> points;
  if (ctx.opt.dataset) {
    const PseudoLabelRefiner refiner(ctx.config.fusion, ctx.config.taxonomy, ctx.config.curriculum);
    for (const auto& page : ctx.load())
      for (const auto& m : refiner.match(page).matches) {
        const auto& l = page.llm[m.llm_index];
        points.push_back({extract_psi(page.teacher[m.teacher_index], l, m), l.q_text, l.q_spatial});
      }
  } else {
    constexpr int kSteps = 11;
    for (int i = 0; i < kSteps; ++i)
      for (int j = 0; j < kSteps; ++j)
        for (int k = 0; k < kSteps; ++k)
          points.push_back({{i / 10.0, j / 10.0, k / 10.0}});
  }
  const std::uint64_t seed = ctx.opt.seed.value_or(0x5eed);
  ctx.result.seed = seed;
  const LipschitzEstimate est = estimate_lipschitz(gate, points, 10'000'000, seed);
  if (ctx.json_out()) {
    json doc = {{"lipschitz", est.value}, {"pairs", est.pairs}, {"subsampled", est.subsampled}, {"points", points.size()}};
    ctx.write("lipschitz.json", doc.dump(2) + "\n");
  }
  if (ctx.csv()) {
    std::ostringstream csv;
    csv << "lipschitz,pairs,subsampled,points\n"
        << num(est.value) << ',' << est.pairs << ',' << (est.subsampled ? 1 : 0) << ',' << points.size() << '\n';
    ctx.write("lipschitz.csv", csv.str());
  }
  ctx.result.summary = "Lipschitz estimate " + num(est.value) + " over " + std::to_string(est.pairs) + " pairs";
}

void cmd_schedule(Context& ctx) {
  if (ctx.opt.epochs < 1) throw ConfigError("--epochs: must be >= 1");
  const std::string csv = schedule_to_csv(ctx.opt.epochs, ctx.config.taxonomy, ctx.config.curriculum);
  ctx.write("schedule.csv", csv);
  ctx.result.summary = csv;
  ctx.result.summary.pop_back();
}

using Handler = void (*)(Context&);

const std::map<std::string, Handler, std::less<>>& handlers() {
  static const std::map<std::string, Handler, std::less<>> table{
      {"simulate", cmd_simulate},     {"fuse", cmd_fuse},           {"theory", cmd_theory},
      {"evaluate", cmd_evaluate},     {"compare", cmd_compare},     {"heuristics", cmd_heuristics},
      {"calibrate", cmd_calibrate},   {"train-gate", cmd_train_gate}, {"lipschitz", cmd_lipschitz},
      {"schedule", cmd_schedule},
  };
  return table;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, h] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

CommandResult run_command(std::string_view command, const Options& options) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) throw Error("unknown command '" + std::string(command) + "'");
  Context ctx{options, options.config ? load_project_config(*options.config) : ProjectConfig{}, {}};
  if (!options.config) ctx.config.validate();
  fs::create_directories(options.out);
  it->second(ctx);
  return ctx.result;
}

int execute(std::string_view command, const Options& options, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  try {
    const ProjectConfig config = options.config ? load_project_config(*options.config) : ProjectConfig{};
    const CommandResult r = run_command(command, options);
    json outputs = json::array();
    for (const auto& name : r.outputs)
      outputs.push_back({{"path", name}, {"sha256", sha256_hex(read_text_file(options.out / name))}});
    json manifest = {{"command", std::string(command)},
                     {"config_digest", sha256_hex(project_config_to_json(config))},
                     {"config_path", options.config ? options.config->string() : std::string()},
                     {"seed", r.seed},
                     {"version", LAYOUTFUSE_VERSION},
                     {"started_at", started},
                     {"finished_at", utc_now()},
                     {"outputs", outputs}};
    std::ofstream f(options.out / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << '\n';
    if (!f) throw Error("cannot write manifest.json");
    if (!r.summary.empty()) out << r.summary << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace layoutfuse::cli
