#include "textcen/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace textcen {

// ---- regions -----------------------------------------------------------------

Region parse_region(std::string_view spec) {
  if (spec == "golden") return Region::make(0.618, 0.30, 0.95, 0.70);
  if (spec == "center") return Region::make(0.35, 0.40, 0.65, 0.60);

  double v[4];
  std::size_t n = 0;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = spec.find(',', pos);
    const std::string token(spec.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (n == 4) throw Error(ErrorCode::ParseError, "region has more than 4 values near '" + token + "'");
    char* end = nullptr;
    const double x = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(x)) {
      throw Error(ErrorCode::ParseError, "bad region value '" + token + "'");
    }
    v[n++] = x;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (n != 4) throw Error(ErrorCode::ParseError, "region needs 4 values x0,y0,x1,y1 or a preset name");
  return Region::make(v[0], v[1], v[2], v[3]);
}

// ---- JSON line locator ---------------------------------------------------------

namespace {

class LineScanner {
 public:
  explicit LineScanner(std::string_view text) : text_(text) {}

  std::map<std::string, int> run() {
    skip_ws();
    if (pos_ < text_.size()) value("");
    return std::move(lines_);
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') ++line_;
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') break;
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    ++pos_;
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  void value(const std::string& path) {
    lines_.emplace(path, line_);
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const std::string key = string_token();
        skip_ws();
        ++pos_;  // colon
        skip_ws();
        value(path + "/" + escape(key));
        skip_ws();
        if (text_[pos_] == ',') ++pos_;
        skip_ws();
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      for (int i = 0; pos_ < text_.size() && text_[pos_] != ']'; ++i) {
        value(path + "/" + std::to_string(i));
        skip_ws();
        if (text_[pos_] == ',') ++pos_;
        skip_ws();
      }
      ++pos_;
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos) ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

}  // namespace

std::map<std::string, int> json_value_lines(std::string_view text) { return LineScanner(text).run(); }

// ---- scene parsing -------------------------------------------------------------

namespace {

class SceneReader {
 public:
  SceneReader(std::string_view text, std::string_view source) : source_(source) {
    try {
      doc_ = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string(source) + ": " + e.what());
    }
    lines_ = json_value_lines(text);
  }

  Scene read() {
    const Json& root = doc_;
    expect_object(root, "", {"objects", "background_token", "layers", "steps", "sharpen", "noise_amp", "seed", "targets"});
    Scene s;
    const Json& objects = require(root, "", "objects");
    if (!objects.is_array() || objects.empty()) fail("/objects", "must be a non-empty array");
    std::set<int> tokens;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const std::string p = "/objects/" + std::to_string(i);
      const Json& o = objects[i];
      expect_object(o, p, {"token", "label", "center", "sigma", "amplitude"});
      BlobObject b;
      b.token = integer(require(o, p, "token"), p + "/token", 0);
      if (!tokens.insert(b.token).second) fail(p + "/token", "duplicate object token");
      if (o.contains("label")) {
        if (!o["label"].is_string()) fail(p + "/label", "must be a string");
        b.label = o["label"].get<std::string>();
      }
      const Json& c = require(o, p, "center");
      if (!c.is_array() || c.size() != 2) fail(p + "/center", "must be [x, y]");
      b.center_x = number(c[0], p + "/center/0");
      b.center_y = number(c[1], p + "/center/1");
      if (b.center_x < 0 || b.center_x > 1 || b.center_y < 0 || b.center_y > 1) {
        fail(p + "/center", "must lie in [0,1]^2");
      }
      b.sigma = number(require(o, p, "sigma"), p + "/sigma");
      if (!(b.sigma > 0.0 && b.sigma <= 0.5)) fail(p + "/sigma", "must lie in (0, 0.5]");
      if (o.contains("amplitude")) {
        b.amplitude = number(o["amplitude"], p + "/amplitude");
        if (!(b.amplitude > 0.0 && b.amplitude <= 1.0)) fail(p + "/amplitude", "must lie in (0, 1]");
      }
      s.objects.push_back(std::move(b));
    }
    if (root.contains("background_token")) {
      s.background_token = integer(root["background_token"], "/background_token", 0);
      if (tokens.contains(s.background_token)) fail("/background_token", "collides with an object token");
    } else {
      int bg = 0;
      while (tokens.contains(bg)) ++bg;
      s.background_token = bg;
    }
    const Json& layers = require(root, "", "layers");
    if (!layers.is_array() || layers.empty()) fail("/layers", "must be a non-empty array of [H, W]");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string p = "/layers/" + std::to_string(i);
      if (!layers[i].is_array() || layers[i].size() != 2) fail(p, "must be [H, W]");
      s.layers.push_back({integer(layers[i][0], p + "/0", 2), integer(layers[i][1], p + "/1", 2)});
    }
    s.steps = integer(require(root, "", "steps"), "/steps", 1);
    if (root.contains("sharpen")) {
      s.sharpen = number(root["sharpen"], "/sharpen");
      if (s.sharpen < 0) fail("/sharpen", "must be >= 0");
    }
    if (root.contains("noise_amp")) {
      s.noise_amp = number(root["noise_amp"], "/noise_amp");
      if (s.noise_amp < 0) fail("/noise_amp", "must be >= 0");
    }
    if (root.contains("seed")) {
      const Json& seed = root["seed"];
      if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
        fail("/seed", "must be a non-negative integer");
      }
      s.seed = seed.get<std::uint64_t>();
    }
    if (root.contains("targets")) {
      const Json& targets = root["targets"];
      if (!targets.is_array()) fail("/targets", "must be an array");
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const std::string p = "/targets/" + std::to_string(i);
        expect_object(targets[i], p, {"region", "omega"});
        const Json& r = require(targets[i], p, "region");
        if (!r.is_array() || r.size() != 4) fail(p + "/region", "must be [x0, y0, x1, y1]");
        WeightedRegion w;
        try {
          w.region = Region::make(number(r[0], p + "/region/0"), number(r[1], p + "/region/1"),
                                  number(r[2], p + "/region/2"), number(r[3], p + "/region/3"));
        } catch (const Error& e) {
          fail(p + "/region", e.what());
        }
        if (targets[i].contains("omega")) {
          w.omega = number(targets[i]["omega"], p + "/omega");
          if (w.omega < 0) fail(p + "/omega", "must be >= 0");
        }
        s.targets.push_back(w);
      }
    }
    try {
      s.validate();
    } catch (const Error& e) {
      fail("", e.what());
    }
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    int line = 1;
    if (auto it = lines_.find(pointer); it != lines_.end()) line = it->second;
    std::ostringstream os;
    os << source_ << ":" << line << ": " << (pointer.empty() ? "/" : pointer) << " " << what;
    throw Error(ErrorCode::InvariantError, os.str());
  }

  void expect_object(const Json& j, const std::string& p, std::initializer_list<std::string_view> allowed) const {
    if (!j.is_object()) fail(p, "must be an object");
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) fail(p + "/" + key, "is not a recognised key");
    }
  }

  const Json& require(const Json& j, const std::string& p, const char* key) const {
    if (!j.contains(key)) fail(p, std::string("is missing required key '") + key + "'");
    return j[key];
  }

  double number(const Json& j, const std::string& p) const {
    if (!j.is_number()) fail(p, "must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(p, "must be finite");
    return v;
  }

  int integer(const Json& j, const std::string& p, int min_value) const {
    if (!j.is_number_integer()) fail(p, "must be an integer");
    const auto v = j.get<std::int64_t>();
    if (v < min_value || v > 1'000'000) fail(p, "must be >= " + std::to_string(min_value));
    return static_cast<int>(v);
  }

  std::string source_;
  Json doc_;
  std::map<std::string, int> lines_;
};

}  // namespace

Scene parse_scene(std::string_view text, std::string_view source_name) {
  return SceneReader(text, source_name).read();
}

Scene load_scene(const std::filesystem::path& path) { return parse_scene(read_file(path), path.string()); }

double round_sig9(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Json scene_to_json(const Scene& scene) {
  Json objects = Json::array();
  for (const auto& o : scene.sorted_objects()) {
    objects.push_back({{"token", o.token},
                       {"label", o.label},
                       {"center", {round_sig9(o.center_x), round_sig9(o.center_y)}},
                       {"sigma", round_sig9(o.sigma)},
                       {"amplitude", round_sig9(o.amplitude)}});
  }
  Json layers = Json::array();
  for (const auto& l : scene.layers) layers.push_back({l.height, l.width});
  Json doc = {{"objects", objects},         {"background_token", scene.background_token},
              {"layers", layers},           {"steps", scene.steps},
              {"sharpen", round_sig9(scene.sharpen)}, {"noise_amp", round_sig9(scene.noise_amp)},
              {"seed", scene.seed}};
  if (!scene.targets.empty()) {
    Json targets = Json::array();
    for (const auto& t : scene.targets) {
      targets.push_back({{"region",
                          {round_sig9(t.region.x0), round_sig9(t.region.y0), round_sig9(t.region.x1),
                           round_sig9(t.region.y1)}},
                         {"omega", round_sig9(t.omega)}});
    }
    doc["targets"] = targets;
  }
  return doc;
}

namespace {

void emit(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {  // std::map order: sorted
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(key).dump() + ": ";
        emit(value, indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        emit(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      std::string s = format_sig9(v);
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string canonical_dump(const Json& doc) {
  std::string out;
  emit(doc, 0, out);
  out += '\n';
  return out;
}

Json params_to_json(const GuidanceParams& p) {
  Json omega = Json::array();
  for (double w : p.omega) omega.push_back(round_sig9(w));
  return {{"theta", round_sig9(p.theta)},       {"xi", round_sig9(p.xi)},
          {"alpha", round_sig9(p.alpha)},       {"margin_m", round_sig9(p.margin_m)},
          {"omega", omega},                     {"lambda_sec", round_sig9(p.lambda_sec)},
          {"gamma", round_sig9(p.gamma)},       {"max_step", round_sig9(p.max_step)},
          {"bbox_mass", round_sig9(p.bbox_mass)}, {"eps_dist", round_sig9(p.eps_dist)}};
}

Json metrics_to_json(const MetricsReport& m) {
  Json doc = {{"tv_loss_in_R", round_sig9(m.tv_loss_in_R)},
              {"saliency_iou", round_sig9(m.saliency_iou)},
              {"semantic_score", round_sig9(m.semantic_score)},
              {"vtcm", nullptr}};
  if (m.vtcm) doc["vtcm"] = round_sig9(*m.vtcm);
  return doc;
}

MetricsReport metrics_from_json(const Json& doc) {
  try {
    MetricsReport m;
    m.tv_loss_in_R = doc.at("tv_loss_in_R").get<double>();
    m.saliency_iou = doc.at("saliency_iou").get<double>();
    m.semantic_score = doc.at("semantic_score").get<double>();
    if (!doc.at("vtcm").is_null()) m.vtcm = doc.at("vtcm").get<double>();
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("metrics record: ") + e.what());
  }
}

Json report_to_json(const GuidanceReport& report, const Scene& scene, const Region& region,
                    const GuidanceParams& params, const std::vector<std::string>& renders) {
  Json steps = Json::array();
  for (const auto& rec : report.per_step) {
    Json conflicts = Json::array();
    for (const auto& c : rec.conflicts) {
      conflicts.push_back({{"layer", c.where.layer}, {"token", c.where.token}, {"mean", round_sig9(c.mean)}});
    }
    Json moves = Json::array();
    for (const auto& d : rec.displacements) {
      moves.push_back({{"layer", d.where.layer},
                       {"token", d.where.token},
                       {"delta", {round_sig9(d.delta.row), round_sig9(d.delta.col)}},
                       {"norm", round_sig9(d.delta.norm())},
                       {"scaled", d.scaled},
                       {"scale", {round_sig9(d.scale.row), round_sig9(d.scale.col)}}});
    }
    steps.push_back({{"step", rec.step},
                     {"t", rec.t},
                     {"conflicts", conflicts},
                     {"displacements", moves},
                     {"loss",
                      {{"total", round_sig9(rec.loss.total)},
                       {"main", round_sig9(rec.loss.main)},
                       {"norm", round_sig9(rec.loss.norm)}}},
                     {"mean_attn_in_R", round_sig9(rec.mean_attn_in_R)}});
  }
  Json trajectories = Json::object();
  for (const auto& [token, path] : report.trajectories) {
    Json pts = Json::array();
    for (const auto& p : path) pts.push_back({round_sig9(p.center_x), round_sig9(p.center_y), round_sig9(p.sigma)});
    trajectories[std::to_string(token)] = pts;
  }
  Json final_objects = Json::array();
  for (const auto& o : report.final_state.objects) {
    final_objects.push_back(
        {{"token", o.token}, {"center", {round_sig9(o.center_x), round_sig9(o.center_y)}}, {"sigma", round_sig9(o.sigma)}});
  }
  Json mean_in_r = Json::object();
  for (const auto& [token, v] : report.final_mean_in_R) mean_in_r[std::to_string(token)] = round_sig9(v);

  return {{"format", "textcen-run-report/1"},
          {"params", params_to_json(params)},
          {"scene", scene_to_json(scene)},
          {"region", {round_sig9(region.x0), round_sig9(region.y0), round_sig9(region.x1), round_sig9(region.y1)}},
          {"steps", steps},
          {"metrics", {{"guided", metrics_to_json(report.metrics_res)}, {"unguided", metrics_to_json(report.metrics_ori)}}},
          {"final",
           {{"objects", final_objects},
            {"mean_in_R", mean_in_r},
            {"ever_flagged", Json(std::vector<int>(report.ever_flagged.begin(), report.ever_flagged.end()))}}},
          {"trajectories", trajectories},
          {"renders", renders}};
}

Json parse_report(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "textcen-run-report/1") {
    throw Error(ErrorCode::ParseError, "not a textcen run report");
  }
  for (const char* key : {"params", "scene", "region", "steps", "metrics", "final", "trajectories", "renders"}) {
    if (!doc.contains(key)) throw Error(ErrorCode::ParseError, std::string("report lacks '") + key + "'");
  }
  return doc;
}

RunSummary summary_from_report(const Json& doc) {
  RunSummary s;
  s.guided = metrics_from_json(doc.at("metrics").at("guided"));
  s.unguided = metrics_from_json(doc.at("metrics").at("unguided"));
  s.steps = static_cast<int>(doc.at("steps").size());
  return s;
}

std::string metrics_csv(const GuidanceReport& report) {
  std::string out(kMetricsCsvHeader);
  out += '\n';
  for (const auto& rec : report.per_step) {
    out += std::to_string(rec.step) + ',' + std::to_string(rec.conflicts.size()) + ',' +
           format_sig9(rec.max_displacement()) + ',' + format_sig9(rec.loss.total) + ',' + format_sig9(rec.loss.main) +
           ',' + format_sig9(rec.loss.norm) + ',' + format_sig9(rec.mean_attn_in_R) + '\n';
  }
  return out;
}

// ---- PGM -----------------------------------------------------------------------

std::string encode_pgm(const AttentionMap& map) {
  std::string out = "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n255\n";
  const double peak = map.max_value();
  out.reserve(out.size() + map.size());
  for (double v : map.values()) {
    const double scaled = peak > 0.0 ? v * 255.0 / peak : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::min(255.0, std::floor(scaled + 0.5)))));
  }
  return out;
}

AttentionMap decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> long {
    skip();
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw Error(ErrorCode::ParseError, "malformed PGM header");
    return std::stol(std::string(bytes.substr(start, pos - start)));
  };
  if (bytes.substr(0, 2) != "P5") throw Error(ErrorCode::ParseError, "not a binary PGM (P5)");
  pos = 2;
  const long width = number();
  const long height = number();
  const long maxval = number();
  if (maxval <= 0 || maxval > 255) throw Error(ErrorCode::ParseError, "only 8-bit PGM is supported");
  if (width < 2 || height < 2 || width > 100000 || height > 100000) {
    throw Error(ErrorCode::ParseError, "PGM must be at least 2x2");
  }
  ++pos;  // single whitespace before the raster
  const auto n = static_cast<std::size_t>(width * height);
  if (bytes.size() < pos + n) throw Error(ErrorCode::ParseError, "truncated PGM raster");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = static_cast<unsigned char>(bytes[pos + i]) / static_cast<double>(maxval);
  }
  return AttentionMap(static_cast<int>(height), static_cast<int>(width), std::move(values));
}

void write_render(const AttentionMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pgm(map));
}

AttentionMap read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

// ---- files ---------------------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace textcen
