#include "docsynth/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <nlohmann/json.hpp>

#include "docsynth/errors.hpp"
#include "docsynth/image.hpp"

namespace docsynth {

namespace {

using Json = nlohmann::json;  // std::map objects: keys come out sorted

Json vec(const Vec2& v) { return Json::array({v.x, v.y}); }
Json vec(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }
Vec2 vec2(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
Vec3 vec3(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

Json rect(const UvRect& r) { return Json::array({r.u0, r.v0, r.u1, r.v1}); }
UvRect rect(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()}; }

Json to_json(const SheetSpec& s) {
  Json fields = Json::array();
  for (const auto& f : s.fields) fields.push_back({{"name", f.name}, {"uv_rect", rect(f.uv_rect)}});
  return {{"width_m", s.width_m}, {"height_m", s.height_m}, {"grid_nx", s.grid_nx}, {"grid_ny", s.grid_ny},
          {"texture", s.texture}, {"fields", fields}, {"class_label", s.class_label}};
}

SheetSpec sheet_from(const Json& j) {
  SheetSpec s;
  s.width_m = j.at("width_m");
  s.height_m = j.at("height_m");
  s.grid_nx = j.at("grid_nx");
  s.grid_ny = j.at("grid_ny");
  s.texture = j.at("texture");
  s.class_label = j.at("class_label");
  for (const auto& f : j.at("fields")) s.fields.push_back({f.at("name"), rect(f.at("uv_rect"))});
  return s;
}

Json to_json(const DeformOp& op) {
  if (const auto* b = std::get_if<Bend>(&op)) return {{"type", "bend"}, {"curvature", b->curvature}, {"axis_angle", b->axis_angle}};
  if (const auto* f = std::get_if<Fold>(&op))
    return {{"type", "fold"}, {"point", vec(f->point)}, {"direction", vec(f->direction)}, {"dihedral", f->dihedral}};
  const auto& r = std::get<Roughness>(op);
  return {{"type", "roughness"}, {"amplitude_m", r.amplitude_m}, {"frequency", r.frequency}, {"noise_seed", r.noise_seed}};
}

DeformOp op_from(const Json& j) {
  const std::string type = j.at("type");
  if (type == "bend") return Bend{j.at("curvature"), j.at("axis_angle")};
  if (type == "fold") return Fold{vec2(j.at("point")), vec2(j.at("direction")), j.at("dihedral")};
  if (type == "roughness") return Roughness{j.at("amplitude_m"), j.at("frequency"), j.at("noise_seed")};
  throw IoError(IoErrorKind::kMalformed, "unknown deformation type '" + type + "'");
}

Json to_json(const CameraModel& c) {
  Json j = {{"width", c.width},
            {"height", c.height},
            {"sensor_width_mm", c.sensor_width_mm},
            {"focal_mm", c.focal_mm},
            {"focus_distance_m", c.focus_distance_m},
            {"position", vec(c.position)},
            {"right", vec(c.orientation.right)},
            {"up", vec(c.orientation.up)},
            {"forward", vec(c.orientation.forward)},
            {"roll_theta", c.roll_theta}};
  j["f_number"] = c.f_number ? Json(*c.f_number) : Json(nullptr);
  return j;
}

CameraModel camera_from(const Json& j) {
  CameraModel c;
  c.width = j.at("width");
  c.height = j.at("height");
  c.sensor_width_mm = j.at("sensor_width_mm");
  c.focal_mm = j.at("focal_mm");
  c.focus_distance_m = j.at("focus_distance_m");
  c.position = vec3(j.at("position"));
  c.orientation = {vec3(j.at("right")), vec3(j.at("up")), vec3(j.at("forward"))};
  c.roll_theta = j.at("roll_theta");
  if (!j.at("f_number").is_null()) c.f_number = j.at("f_number").get<double>();
  return c;
}

Json to_json(const LightSpec& l) {
  Json j = {{"position", vec(l.position)}, {"normal", vec(l.normal)}};
  if (const auto* p = std::get_if<PointEmitter>(&l.kind)) {
    j["type"] = "point";
    j["intensity_w"] = p->intensity_w;
  } else if (const auto* a = std::get_if<AreaEmitter>(&l.kind)) {
    j["type"] = "area";
    j["width_m"] = a->width_m;
    j["height_m"] = a->height_m;
    j["radiance"] = vec(a->radiance);
  } else {
    j["type"] = "environment";
    j["radiance"] = vec(std::get<EnvironmentEmitter>(l.kind).radiance);
  }
  return j;
}

LightSpec light_from(const Json& j) {
  LightSpec l;
  l.position = vec3(j.at("position"));
  l.normal = vec3(j.at("normal"));
  const std::string type = j.at("type");
  if (type == "point") l.kind = PointEmitter{j.at("intensity_w")};
  else if (type == "area") l.kind = AreaEmitter{j.at("width_m"), j.at("height_m"), vec3(j.at("radiance"))};
  else if (type == "environment") l.kind = EnvironmentEmitter{vec3(j.at("radiance"))};
  else throw IoError(IoErrorKind::kMalformed, "unknown light type '" + type + "'");
  return l;
}

Json to_json(const BackgroundSpec& b) {
  Json extras = Json::array();
  for (const auto& e : b.extra_sheets) extras.push_back({{"offset", vec(e.offset)}, {"rotation", e.rotation}, {"z", e.z}});
  Json occluders = Json::array();
  for (const auto& o : b.occluders)
    occluders.push_back({{"shape", o.shape == OccluderShape::kBox ? "box" : "quad"},
                         {"center", vec(o.center)},
                         {"size", vec(o.size)},
                         {"yaw", o.yaw},
                         {"albedo", vec(o.albedo)}});
  return {{"surface", b.surface},         {"table_z", b.table_z},   {"table_extent_m", b.table_extent_m},
          {"texture_tile_m", b.texture_tile_m}, {"extra_sheets", extras}, {"occluders", occluders}};
}

BackgroundSpec background_from(const Json& j) {
  BackgroundSpec b;
  b.surface = j.at("surface");
  b.table_z = j.at("table_z");
  b.table_extent_m = j.at("table_extent_m");
  b.texture_tile_m = j.at("texture_tile_m");
  for (const auto& e : j.at("extra_sheets")) b.extra_sheets.push_back({vec2(e.at("offset")), e.at("rotation"), e.at("z")});
  for (const auto& o : j.at("occluders")) {
    Occluder occ;
    occ.shape = o.at("shape") == "box" ? OccluderShape::kBox : OccluderShape::kQuad;
    occ.center = vec3(o.at("center"));
    occ.size = vec3(o.at("size"));
    occ.yaw = o.at("yaw");
    occ.albedo = vec3(o.at("albedo"));
    b.occluders.push_back(occ);
  }
  return b;
}

Json scene_json(const SceneInstance& s) {
  Json ops = Json::array();
  for (const auto& op : s.deformation.ops) ops.push_back(to_json(op));
  Json lights = Json::array();
  for (const auto& l : s.lights) lights.push_back(to_json(l));
  Json style = {{"sigma", s.style.sigma}, {"morph_radius", s.style.morph_radius}};
  style["morph"] = !s.style.morph ? "none" : (*s.style.morph == MorphOp::kErode ? "erode" : "dilate");
  Json patch = nullptr;
  if (s.patch)
    patch = {{"texture", s.patch->texture}, {"rect", rect(s.patch->rect)}, {"field_name", s.patch->field_name}};
  return {{"seed", s.seed},
          {"index", s.index},
          {"base_document", s.base_document},
          {"sheet", to_json(s.sheet)},
          {"deformation", ops},
          {"camera", to_json(s.camera)},
          {"lights", lights},
          {"background", to_json(s.background)},
          {"render", {{"spp", s.render.spp}, {"max_depth", s.render.max_depth}, {"tile", s.render.tile}}},
          {"style", style},
          {"patch", patch},
          {"categorical_choices", s.categorical_choices},
          {"continuous_values", s.continuous_values}};
}

SceneInstance scene_from(const Json& j) {
  SceneInstance s;
  s.seed = j.at("seed");
  s.index = j.at("index");
  s.base_document = j.at("base_document");
  s.sheet = sheet_from(j.at("sheet"));
  for (const auto& op : j.at("deformation")) s.deformation.ops.push_back(op_from(op));
  s.camera = camera_from(j.at("camera"));
  for (const auto& l : j.at("lights")) s.lights.push_back(light_from(l));
  s.background = background_from(j.at("background"));
  const Json& r = j.at("render");
  s.render = {r.at("spp"), r.at("max_depth"), r.at("tile")};
  const Json& st = j.at("style");
  s.style.sigma = st.at("sigma");
  s.style.morph_radius = st.at("morph_radius");
  const std::string morph = st.at("morph");
  if (morph == "erode") s.style.morph = MorphOp::kErode;
  if (morph == "dilate") s.style.morph = MorphOp::kDilate;
  if (const Json& p = j.at("patch"); !p.is_null())
    s.patch = ContentPatch{p.at("texture"), rect(p.at("rect")), p.at("field_name")};
  s.categorical_choices = j.at("categorical_choices").get<std::map<std::string, std::string>>();
  s.continuous_values = j.at("continuous_values").get<std::map<std::string, double>>();
  return s;
}

Json parse_line(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    throw IoError(IoErrorKind::kMalformed, std::string("malformed manifest line: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw IoError(IoErrorKind::kMalformed, std::string("malformed manifest record: ") + e.what());
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

SampleRecord record_paths(std::uint64_t sample_id) {
  char stem[32];
  std::snprintf(stem, sizeof stem, "%06llu", static_cast<unsigned long long>(sample_id));
  SampleRecord r;
  r.sample_id = sample_id;
  r.image_path = std::string("images/") + stem + ".png";
  r.depth_path = std::string("depth/") + stem + "_depth.pfm";
  r.seg_path = std::string("seg/") + stem + "_seg.png";
  return r;
}

std::string scene_to_json(const SceneInstance& scene) { return scene_json(scene).dump(); }

SceneInstance scene_from_json(std::string_view text) {
  return guarded([&] { return scene_from(parse_line(text)); });
}

std::string serialize_record(const SampleRecord& r) {
  Json fields = Json::array();
  for (const auto& f : r.fields) {
    Json polygon = Json::array();
    for (const auto& p : f.polygon) polygon.push_back(vec(p));
    fields.push_back({{"name", f.name},
                      {"polygon", polygon},
                      {"aabb", Json::array({f.aabb.x0, f.aabb.y0, f.aabb.x1, f.aabb.y1})},
                      {"visibility", f.visibility},
                      {"fully_in_frame", f.fully_in_frame}});
  }
  Json homography = nullptr;
  if (r.homography) {
    homography = Json::array();
    for (const auto& row : r.homography->h) homography.push_back(Json::array({row[0], row[1], row[2]}));
  }
  const Json labels = {
      {"angle", {{"theta", r.angle.theta}, {"sin_theta", r.angle.sin_theta}, {"cos_theta", r.angle.cos_theta}}},
      {"homography", homography},
      {"fields", fields}};
  const Json j = {{"sample_id", r.sample_id},   {"image_path", r.image_path}, {"depth_path", r.depth_path},
                  {"seg_path", r.seg_path},     {"class_label", r.class_label}, {"scene", scene_json(r.scene)},
                  {"labels", labels}};
  return j.dump();
}

SampleRecord parse_record(std::string_view line) {
  return guarded([&] {
    const Json j = parse_line(line);
    SampleRecord r;
    r.sample_id = j.at("sample_id");
    r.image_path = j.at("image_path");
    r.depth_path = j.at("depth_path");
    r.seg_path = j.at("seg_path");
    r.class_label = j.at("class_label");
    r.scene = scene_from(j.at("scene"));
    const Json& labels = j.at("labels");
    const Json& angle = labels.at("angle");
    r.angle = {angle.at("theta"), angle.at("sin_theta"), angle.at("cos_theta")};
    if (const Json& h = labels.at("homography"); !h.is_null()) {
      Homography hom;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) hom.h[i][k] = h.at(i).at(k);
      r.homography = hom;
    }
    for (const auto& f : labels.at("fields")) {
      ProjectedField pf;
      pf.name = f.at("name");
      for (const auto& p : f.at("polygon")) pf.polygon.push_back(vec2(p));
      const Json& box = f.at("aabb");
      pf.aabb = {box.at(0), box.at(1), box.at(2), box.at(3)};
      pf.visibility = f.at("visibility");
      pf.fully_in_frame = f.at("fully_in_frame");
      r.fields.push_back(std::move(pf));
    }
    return r;
  });
}

std::string serialize_header(const ManifestHeader& h) {
  const Json j = {
      {"type", "header"},
      {"format", "docsynth-manifest"},
      {"tool_version", h.tool_version},
      {"spec_hash", hex64(h.spec_hash)},
      {"master_seed", h.master_seed},
      {"count", h.count},
      {"rotation_label_mode", h.rotation_label_mode},
      {"field_samples", {{"boundary", kFieldBoundarySamples}, {"interior", kFieldInteriorSamples}}},
      {"passes",
       {{"image", {{"format", "png"}, {"encoding", "srgb8"}, {"content", "linear radiance clipped to [0,1]"}}},
        {"depth",
         {{"format", "pfm"},
          {"units", "m"},
          {"semantics", "euclidean distance from the camera center to the nearest hit along the pixel-center ray"},
          {"miss_sentinel", 3.4e38}}},
        {"seg",
         {{"format", "png"},
          {"encoding", "gray8"},
          {"labels", {{"background", 0}, {"document", 1}, {"occluder", 2}, {"extra_sheet", 3}, {"miss", 255}}}}}}}};
  return j.dump();
}

ManifestHeader parse_header(std::string_view line) {
  return guarded([&] {
    const Json j = parse_line(line);
    if (j.value("type", "") != "header") throw IoError(IoErrorKind::kMalformed, "first manifest line is not a header");
    ManifestHeader h;
    h.spec_hash = std::stoull(j.at("spec_hash").get<std::string>(), nullptr, 16);
    h.master_seed = j.at("master_seed");
    h.count = j.at("count");
    h.tool_version = j.at("tool_version");
    h.rotation_label_mode = j.at("rotation_label_mode");
    return h;
  });
}

void write_pfm(const std::filesystem::path& path, int width, int height, std::span<const float> values) {
  static_assert(std::endian::native == std::endian::little, "PFM writer assumes a little-endian host");
  if (values.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("depth buffer size does not match its dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoErrorKind::kWriteFailed, "cannot open " + path.string());
  out << "Pf\n" << width << ' ' << height << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(width));
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x) {
      const float v = values[static_cast<std::size_t>(y) * width + x];
      row[x] = std::isinf(v) && v > 0 ? kDepthMissSentinel : v;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out.flush()) throw IoError(IoErrorKind::kWriteFailed, "failed writing " + path.string());
}

FloatImage read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::kReadFailed, "cannot open " + path.string());
  std::string magic;
  FloatImage img;
  double scale = 0.0;
  in >> magic >> img.width >> img.height >> scale;
  in.get();
  if (!in || magic != "Pf" || img.width <= 0 || img.height <= 0 || scale >= 0.0)
    throw IoError(IoErrorKind::kMalformed, path.string() + " is not a little-endian grayscale PFM");
  img.values.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = img.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(img.values.data() + static_cast<std::size_t>(y) * img.width),
            static_cast<std::streamsize>(img.width * sizeof(float)));
  }
  if (!in) throw IoError(IoErrorKind::kMalformed, path.string() + " is truncated");
  for (float& v : img.values)
    if (v >= kDepthMissSentinel) v = std::numeric_limits<float>::infinity();
  return img;
}

std::vector<std::filesystem::path> write_sample(const std::filesystem::path& out_dir, const SampleRecord& record,
                                                const RenderPasses& passes) {
  const std::vector<std::filesystem::path> paths = {out_dir / record.image_path, out_dir / record.depth_path,
                                                    out_dir / record.seg_path};
  std::error_code ec;
  for (const auto& p : paths) {
    if (std::filesystem::exists(p, ec)) throw IoError(IoErrorKind::kPathCollision, p.string() + " already exists");
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError(IoErrorKind::kWriteFailed, "cannot create " + p.parent_path().string() + ": " + ec.message());
  }
  const auto rgb8 = tonemap(passes.rgb);
  try {
    write_png_rgb8(paths[0], passes.width, passes.height, rgb8);
    write_pfm(paths[1], passes.width, passes.height, passes.depth);
    write_png_gray8(paths[2], passes.width, passes.height, passes.seg);
  } catch (const ImageError& e) {
    throw IoError(IoErrorKind::kWriteFailed, e.what());
  }
  return paths;
}

std::filesystem::path write_manifest(const std::filesystem::path& out_dir, const ManifestHeader& header,
                                     std::vector<SampleRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].sample_id == records[i - 1].sample_id)
      throw InvalidArgument("duplicate sample_id " + std::to_string(records[i].sample_id));
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto final_path = out_dir / "manifest.jsonl";
  const auto temp_path = out_dir / "manifest.jsonl.tmp";
  {
    std::ofstream out(temp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoErrorKind::kWriteFailed, "cannot open " + temp_path.string());
    out << serialize_header(header) << '\n';
    for (const auto& r : records) out << serialize_record(r) << '\n';
    if (!out.flush()) throw IoError(IoErrorKind::kWriteFailed, "failed writing " + temp_path.string());
  }
  std::filesystem::rename(temp_path, final_path, ec);
  if (ec) throw IoError(IoErrorKind::kWriteFailed, "cannot rename manifest: " + ec.message());
  return final_path;
}

DatasetManifest read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::kReadFailed, "cannot open " + manifest_path.string());
  DatasetManifest m;
  std::string line;
  if (!std::getline(in, line)) throw IoError(IoErrorKind::kMalformed, "empty manifest");
  m.header = parse_header(line);
  while (std::getline(in, line))
    if (!line.empty()) m.records.push_back(parse_record(line));
  return m;
}

}  // namespace docsynth
