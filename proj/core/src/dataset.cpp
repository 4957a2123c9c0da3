#include "layoutfuse/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "layoutfuse/error.hpp"

namespace layoutfuse {
namespace {

using nlohmann::json;

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw DatasetError("line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_field(const std::string& page_id, const std::string& field, const std::string& what) {
  throw DatasetError("page '" + page_id + "': " + field + ": " + what);
}

struct Reader {
  std::size_t line;
  std::string page_id;
  std::size_t clamped = 0;

  const json& require(const json& obj, const char* key, const std::string& where) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail_line(line, where + ": missing \"" + key + "\"");
    return *it;
  }

  double number(const json& v, const std::string& where) const {
    if (!v.is_number()) fail_line(line, where + ": expected a number");
    return v.get<double>();
  }

  std::string string(const json& v, const std::string& where) const {
    if (!v.is_string()) fail_line(line, where + ": expected a string");
    return v.get<std::string>();
  }

  BoundingBox box(const json& obj, const std::string& where) {
    const json& b = require(obj, "bbox", where);
    if (!b.is_array() || b.size() != 4) fail_line(line, where + ".bbox: expected [x1, y1, x2, y2]");
    BoundingBox out{number(b[0], where + ".bbox"), number(b[1], where + ".bbox"), number(b[2], where + ".bbox"),
                    number(b[3], where + ".bbox")};
    for (double c : out.coords()) {
      if (!std::isfinite(c)) fail_field(page_id, where + ".bbox", "non-finite coordinate");
    }
    clamped += static_cast<std::size_t>(clamp_to_unit(out));
    return out;
  }

  const json& array(const json& obj, const char* key) const {
    static const json empty = json::array();
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return empty;
    if (!it->is_array()) fail_line(line, std::string(key) + ": expected an array");
    return *it;
  }
};

std::string indexed(const char* list, std::size_t i) { return std::string(list) + "[" + std::to_string(i) + "]"; }

void check_box(const Page& p, const BoundingBox& b, const std::string& where) {
  if (!is_valid(b)) {
    std::string why = "invalid box";
    if (!(b.x1 < b.x2)) why = "x1 must be < x2";
    else if (!(b.y1 < b.y2)) why = "y1 must be < y2";
    fail_field(p.page_id, where + ".bbox", why);
  }
}

void check_open_prob(const Page& p, double v, const std::string& where) {
  if (!(v > 0.0 && v < 1.0)) fail_field(p.page_id, where, "must be in (0, 1)");
}

json box_json(const BoundingBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

void canonicalize(Page& page, const Taxonomy& taxonomy) {
  auto fix = [&](std::string& category, const std::string& where) {
    if (!taxonomy.contains(category)) fail_field(page.page_id, where + ".type", "unknown category '" + category + "'");
    category = taxonomy.canonical(category);
  };
  for (std::size_t i = 0; i < page.teacher.size(); ++i) fix(page.teacher[i].category, indexed("teacher", i));
  for (std::size_t i = 0; i < page.llm.size(); ++i) fix(page.llm[i].category, indexed("llm", i));
  if (page.ground_truth) {
    for (std::size_t i = 0; i < page.ground_truth->size(); ++i)
      fix((*page.ground_truth)[i].category, indexed("ground_truth", i));
  }
  if (page.refined) {
    for (std::size_t i = 0; i < page.refined->size(); ++i) fix((*page.refined)[i].category, indexed("refined", i));
  }
}

Page parse_with(Reader& r, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_line(r.line, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail_line(r.line, "expected a JSON object");

  Page page;
  page.page_id = r.string(r.require(doc, "page_id", "page"), "page_id");
  r.page_id = page.page_id;

  const auto& blocks = r.array(doc, "ocr_blocks");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto where = indexed("ocr_blocks", i);
    OcrBlock b;
    b.box = r.box(blocks[i], where);
    if (auto it = blocks[i].find("text"); it != blocks[i].end()) b.text = r.string(*it, where + ".text");
    if (auto it = blocks[i].find("is_bold"); it != blocks[i].end()) {
      if (!it->is_boolean()) fail_line(r.line, where + ".is_bold: expected a boolean");
      b.is_bold = it->get<bool>();
    }
    page.ocr_blocks.push_back(std::move(b));
  }

  const auto& teacher = r.array(doc, "teacher");
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    const auto where = indexed("teacher", i);
    const json& t = teacher[i];
    TeacherPrediction p;
    p.box = r.box(t, where);
    p.category = r.string(r.require(t, "type", where), where + ".type");
    if (t.contains("confidence")) {
      p.confidence = r.number(t["confidence"], where + ".confidence");
    } else {
      p.confidence = r.number(r.require(t, "score", where), where + ".score");
    }
    if (auto it = t.find("coord_var"); it != t.end() && !it->is_null()) {
      p.coord_variance = r.number(*it, where + ".coord_var");
    }
    page.teacher.push_back(std::move(p));
  }

  const auto& llm = r.array(doc, "llm");
  for (std::size_t i = 0; i < llm.size(); ++i) {
    const auto where = indexed("llm", i);
    const json& l = llm[i];
    LlmRegion reg;
    reg.box = r.box(l, where);
    reg.category = r.string(r.require(l, "type", where), where + ".type");
    reg.score = r.number(r.require(l, "score", where), where + ".score");
    if (auto it = l.find("q_text"); it != l.end()) reg.q_text = r.number(*it, where + ".q_text");
    if (auto it = l.find("q_spatial"); it != l.end()) reg.q_spatial = r.number(*it, where + ".q_spatial");
    if (auto it = l.find("source"); it != l.end()) reg.source = r.string(*it, where + ".source");
    page.llm.push_back(std::move(reg));
  }

  if (auto it = doc.find("ground_truth"); it != doc.end() && !it->is_null()) {
    const auto& gt = r.array(doc, "ground_truth");
    std::vector<GroundTruthAnnotation> out;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const auto where = indexed("ground_truth", i);
      GroundTruthAnnotation a;
      a.box = r.box(gt[i], where);
      a.category = r.string(r.require(gt[i], "type", where), where + ".type");
      out.push_back(std::move(a));
    }
    page.ground_truth = std::move(out);
  }

  if (auto it = doc.find("refined"); it != doc.end() && !it->is_null()) {
    const auto& refined = r.array(doc, "refined");
    std::vector<FusedLabel> out;
    for (std::size_t i = 0; i < refined.size(); ++i) {
      const auto where = indexed("refined", i);
      const json& f = refined[i];
      FusedLabel label;
      label.box = r.box(f, where);
      label.category = r.string(r.require(f, "type", where), where + ".type");
      label.confidence = r.number(r.require(f, "score", where), where + ".score");
      try {
        label.provenance =
            provenance_from_string(r.string(r.require(f, "provenance", where), where + ".provenance"));
      } catch (const DatasetError& e) {
        fail_line(r.line, where + ".provenance: " + e.what());
      }
      if (auto s = f.find("smoothing"); s != f.end()) label.smoothing = r.number(*s, where + ".smoothing");
      if (auto s = f.find("teacher_index"); s != f.end() && s->is_number_unsigned())
        label.teacher_index = s->get<std::size_t>();
      if (auto s = f.find("llm_index"); s != f.end() && s->is_number_unsigned())
        label.llm_index = s->get<std::size_t>();
      out.push_back(std::move(label));
    }
    page.refined = std::move(out);
  }

  validate_page(page);
  return page;
}

}  // namespace

void validate_page(const Page& p) {
  if (p.page_id.empty()) fail_field(p.page_id, "page_id", "must not be empty");
  for (std::size_t i = 0; i < p.ocr_blocks.size(); ++i) check_box(p, p.ocr_blocks[i].box, indexed("ocr_blocks", i));
  for (std::size_t i = 0; i < p.teacher.size(); ++i) {
    const auto where = indexed("teacher", i);
    const auto& t = p.teacher[i];
    check_box(p, t.box, where);
    if (t.category.empty()) fail_field(p.page_id, where + ".type", "must not be empty");
    check_open_prob(p, t.confidence, where + ".confidence");
    if (t.coord_variance && !(*t.coord_variance >= 0.0 && std::isfinite(*t.coord_variance)))
      fail_field(p.page_id, where + ".coord_var", "must be finite and >= 0");
  }
  for (std::size_t i = 0; i < p.llm.size(); ++i) {
    const auto where = indexed("llm", i);
    const auto& l = p.llm[i];
    check_box(p, l.box, where);
    if (l.category.empty()) fail_field(p.page_id, where + ".type", "must not be empty");
    check_open_prob(p, l.score, where + ".score");
    if (!(l.q_text > 0.0 && l.q_text <= 1.0)) fail_field(p.page_id, where + ".q_text", "must be in (0, 1]");
    if (!(l.q_spatial > 0.0 && l.q_spatial <= 1.0)) fail_field(p.page_id, where + ".q_spatial", "must be in (0, 1]");
  }
  if (p.ground_truth) {
    for (std::size_t i = 0; i < p.ground_truth->size(); ++i) {
      const auto where = indexed("ground_truth", i);
      check_box(p, (*p.ground_truth)[i].box, where);
      if ((*p.ground_truth)[i].category.empty()) fail_field(p.page_id, where + ".type", "must not be empty");
    }
  }
  if (p.refined) {
    for (std::size_t i = 0; i < p.refined->size(); ++i) {
      const auto where = indexed("refined", i);
      const auto& f = (*p.refined)[i];
      check_box(p, f.box, where);
      if (!(f.confidence >= 0.0 && f.confidence <= 1.0)) fail_field(p.page_id, where + ".score", "must be in [0, 1]");
      if (!(f.smoothing >= 0.0 && f.smoothing < 1.0)) fail_field(p.page_id, where + ".smoothing", "must be in [0, 1)");
      if (f.provenance != Provenance::kLlmSoft && f.smoothing != 0.0)
        fail_field(p.page_id, where + ".smoothing", "only llm-soft labels carry smoothing");
    }
  }
}

Page parse_page(std::string_view line, std::size_t line_number) {
  Reader r{line_number, {}, 0};
  return parse_with(r, line);
}

LoadReport read_dataset(std::istream& in, const Taxonomy* taxonomy) {
  LoadReport report;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Reader r{line_number, {}, 0};
    Page page = parse_with(r, line);
    if (taxonomy != nullptr) canonicalize(page, *taxonomy);
    if (!ids.insert(page.page_id).second) fail_field(page.page_id, "page_id", "duplicate page id");
    report.clamped_coordinates += r.clamped;
    report.pages.push_back(std::move(page));
  }
  return report;
}

LoadReport load_dataset(const std::filesystem::path& path, const Taxonomy* taxonomy) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in, taxonomy);
}

std::string serialize_page(const Page& page) {
  json doc = json::object();
  doc["page_id"] = page.page_id;

  json blocks = json::array();
  for (const auto& b : page.ocr_blocks) {
    blocks.push_back({{"bbox", box_json(b.box)}, {"text", b.text}, {"is_bold", b.is_bold}});
  }
  doc["ocr_blocks"] = std::move(blocks);

  json teacher = json::array();
  for (const auto& t : page.teacher) {
    json o = {{"type", t.category}, {"bbox", box_json(t.box)}, {"confidence", t.confidence}};
    if (t.coord_variance) o["coord_var"] = *t.coord_variance;
    teacher.push_back(std::move(o));
  }
  doc["teacher"] = std::move(teacher);

  json llm = json::array();
  for (const auto& l : page.llm) {
    json o = {{"type", l.category},
              {"bbox", box_json(l.box)},
              {"score", l.score},
              {"q_text", l.q_text},
              {"q_spatial", l.q_spatial}};
    if (!l.source.empty()) o["source"] = l.source;
    llm.push_back(std::move(o));
  }
  doc["llm"] = std::move(llm);

  if (page.ground_truth) {
    json gt = json::array();
    for (const auto& a : *page.ground_truth) gt.push_back({{"type", a.category}, {"bbox", box_json(a.box)}});
    doc["ground_truth"] = std::move(gt);
  }
  if (page.refined) {
    json refined = json::array();
    for (const auto& f : *page.refined) {
      json o = {{"type", f.category},
                {"bbox", box_json(f.box)},
                {"score", f.confidence},
                {"provenance", std::string(to_string(f.provenance))},
                {"smoothing", f.smoothing}};
      if (f.teacher_index) o["teacher_index"] = *f.teacher_index;
      if (f.llm_index) o["llm_index"] = *f.llm_index;
      refined.push_back(std::move(o));
    }
    doc["refined"] = std::move(refined);
  }
  return doc.dump();
}

void write_dataset(std::ostream& out, std::span<const Page> pages) {
  for (const auto& page : pages) out << serialize_page(page) << '\n';
}

void save_dataset(const std::filesystem::path& path, std::span<const Page> pages) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write dataset '" + path.string() + "'");
  write_dataset(out, pages);
  if (!out) throw DatasetError("write failed for '" + path.string() + "'");
}

}  // namespace layoutfuse
