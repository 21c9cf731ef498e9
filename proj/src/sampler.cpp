#include "docsynth/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <nlohmann/json.hpp>

#include "docsynth/errors.hpp"
#include "docsynth/textures.hpp"

namespace docsynth {

const char* to_string(SpecErrorKind kind) {
  switch (kind) {
    case SpecErrorKind::kSyntax: return "syntax error";
    case SpecErrorKind::kUnknownParameter: return "unknown parameter";
    case SpecErrorKind::kRangeOrder: return "range order error";
    case SpecErrorKind::kNonPositiveWeight: return "non-positive weight";
    case SpecErrorKind::kDuplicatePath: return "duplicate path";
    case SpecErrorKind::kInvalidValue: return "invalid value";
  }
  return "spec error";
}

namespace {

using Json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

ParamInfo continuous(std::string path, double def, double lo, double hi, std::string description) {
  return {std::move(path), ParamKind::kContinuous, def, {}, lo, hi, {}, std::move(description)};
}

ParamInfo integer(std::string path, double def, double lo, double hi, std::string description) {
  return {std::move(path), ParamKind::kInteger, def, {}, lo, hi, {}, std::move(description)};
}

ParamInfo categorical(std::string path, std::string def, std::vector<std::string> choices, std::string description) {
  return {std::move(path), ParamKind::kCategorical, 0.0, std::move(def), 0.0, 0.0, std::move(choices),
          std::move(description)};
}

const std::vector<ParamInfo> kVocabulary = {
    continuous("camera.distance_m", 0.55, 0.05, 20.0, "distance from the look-at target"),
    continuous("camera.elevation", 0.0, 0.0, 1.4, "tilt of the view axis away from the sheet normal (rad)"),
    continuous("camera.azimuth", 0.0, -kInf, kInf, "direction of the tilt around the sheet normal (rad)"),
    continuous("camera.roll_theta", 0.0, -kPi, kPi, "sensor roll about the view axis (rad)"),
    continuous("camera.target_x", 0.0, -kInf, kInf, "look-at target x on the table (m)"),
    continuous("camera.target_y", 0.0, -kInf, kInf, "look-at target y on the table (m)"),
    continuous("camera.focal_mm", 50.0, 1.0, 1000.0, "lens focal length (mm)"),
    continuous("camera.sensor_width_mm", 36.0, 1.0, 100.0, "sensor width (mm)"),
    continuous("camera.f_number", 0.0, 0.5, 64.0, "aperture f-number; unbound means pinhole"),
    continuous("camera.focus_offset_m", 0.0, -kInf, kInf, "focus distance minus target distance (m)"),
    categorical("sheet.size", "", {"us-letter", "a4"}, "paper preset; unbound keeps the image aspect at letter width"),
    continuous("deform.bend_curvature", 0.0, -kInf, kInf, "cylindrical bend curvature (1/m)"),
    continuous("deform.bend_axis_angle", 0.0, -kInf, kInf, "in-plane bend direction from +x (rad)"),
    continuous("deform.fold_dihedral", 0.0, -kPi, kPi, "fold dihedral angle (rad), open interval"),
    continuous("deform.fold_u", 0.5, 0.0, 1.0, "fold line anchor u"),
    continuous("deform.fold_v", 0.5, 0.0, 1.0, "fold line anchor v"),
    continuous("deform.fold_angle", kPi / 2, -kInf, kInf, "fold line direction in uv (rad)"),
    continuous("deform.roughness_amplitude_m", 0.0, 0.0, kInf, "surface roughness RMS amplitude (m)"),
    continuous("deform.roughness_frequency", 4.0, 0.0, kInf, "roughness cycles per sheet width"),
    categorical("light.kind", "point", {"point", "area", "environment"}, "key light type"),
    continuous("light.intensity_w", 30.0, 0.0, kInf, "point light radiant power (W)"),
    continuous("light.distance_m", 1.2, 0.01, kInf, "key light distance from the table origin (m)"),
    continuous("light.elevation", 0.5, 0.0, kPi / 2, "key light angle from the table normal (rad)"),
    continuous("light.azimuth", 0.8, -kInf, kInf, "key light direction around the table normal (rad)"),
    continuous("light.area_size_m", 0.4, 0.0, kInf, "area light edge length (m)"),
    continuous("light.radiance", 8.0, 0.0, kInf, "area light radiance"),
    continuous("environment.radiance", 0.3, 0.0, kInf, "uniform sky radiance"),
    categorical("background.surface", "wood", {}, "table texture: built-in name or file:<path>"),
    integer("background.extra_sheets", 0, 0, 8, "decoy pages beneath the document"),
    integer("background.occluders", 0, 0, 8, "incidental objects on the table"),
    continuous("occluder.size_m", 0.06, 0.001, kInf, "occluder footprint edge (m)"),
    continuous("occluder.height_m", 0.03, 0.001, kInf, "box height or quad hover height (m)"),
    continuous("noise.sigma", 0.0, 0.0, kInf, "Gaussian style noise standard deviation"),
    categorical("noise.morph_op", "none", {"none", "erode", "dilate"}, "morphological style operation"),
    integer("noise.morph_radius", 1, 1, 16, "morphology window radius (px)"),
    continuous("content.patch_scale", 0.2, 0.01, 1.0, "content patch edge in uv units"),
    continuous("content.patch_u", 0.5, 0.0, 1.0, "content patch center u"),
    continuous("content.patch_v", 0.5, 0.0, 1.0, "content patch center v"),
};

bool accepts_choice(const ParamInfo& info, const std::string& value) {
  if (info.path == "background.surface") return is_builtin_texture(value) || value.rfind("file:", 0) == 0;
  return std::find(info.choices.begin(), info.choices.end(), value) != info.choices.end();
}

std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

Json parse_json(std::string_view text) {
  // One key set per open object, for duplicate detection.
  std::vector<std::set<std::string>> open;
  std::vector<std::string> names;
  std::string pending;
  const Json::parser_callback_t callback = [&](int, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        open.emplace_back();
        names.push_back(pending);
        break;
      case Json::parse_event_t::object_end:
        open.pop_back();
        names.pop_back();
        break;
      case Json::parse_event_t::key: {
        pending = parsed.get<std::string>();
        if (!open.back().insert(pending).second) {
          const std::string where = names.back().empty() ? pending : names.back() + "." + pending;
          throw SpecError(SpecErrorKind::kDuplicatePath, pending, "'" + where + "' is given more than once");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return Json::parse(text.begin(), text.end(), callback);
  } catch (const Json::parse_error& e) {
    throw SpecError(SpecErrorKind::kSyntax, "", position_of(text, e.byte) + ": " + e.what());
  }
}

[[noreturn]] void invalid(const std::string& path, const std::string& message) {
  throw SpecError(SpecErrorKind::kInvalidValue, path, "'" + path + "': " + message);
}

double finite_number(const Json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(path, "expected a finite number");
  return v;
}

std::int64_t integer_value(const Json& j, const std::string& path, std::int64_t lo, std::int64_t hi) {
  if (!j.is_number_integer()) invalid(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < lo || v > hi) invalid(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

std::string string_value(const Json& j, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected a string");
  return j.get<std::string>();
}

ParamEntry parse_entry(const std::string& path, const Json& j) {
  const ParamInfo* info = find_parameter(path);
  if (!info) throw SpecError(SpecErrorKind::kUnknownParameter, path, "'" + path + "' is not a scene parameter");
  if (!j.is_object()) invalid(path, "expected {min, max} or {choices}");

  if (info->kind == ParamKind::kCategorical) {
    if (j.size() != 1 || !j.contains("choices")) invalid(path, "categorical parameters take {\"choices\": {...}}");
    const Json& choices = j.at("choices");
    if (!choices.is_object() || choices.empty()) invalid(path, "choices must be a non-empty object");
    CategoricalDist dist;
    for (const auto& [name, weight] : choices.items()) {
      const double w = finite_number(weight, path + "." + name);
      if (!(w > 0.0))
        throw SpecError(SpecErrorKind::kNonPositiveWeight, path, "'" + path + "': weight of '" + name + "' must be > 0");
      if (!accepts_choice(*info, name)) invalid(path, "'" + name + "' is not an accepted value");
      dist.items.emplace_back(name, w);
    }
    return dist;
  }

  for (const auto& [key, value] : j.items())
    if (key != "min" && key != "max") invalid(path, "unexpected key '" + key + "'");
  if (!j.contains("min") || !j.contains("max")) invalid(path, "ranges need both min and max");
  ParamRange range;
  if (info->kind == ParamKind::kInteger) {
    if (!j.at("min").is_number_integer() || !j.at("max").is_number_integer()) invalid(path, "integer bounds required");
  }
  range.min = finite_number(j.at("min"), path);
  range.max = finite_number(j.at("max"), path);
  if (range.min > range.max)
    throw SpecError(SpecErrorKind::kRangeOrder, path,
                    "'" + path + "': min " + std::to_string(range.min) + " exceeds max " + std::to_string(range.max));
  // Tolerates decimal spellings of pi at the angular domain ends.
  constexpr double kSlack = 1e-9;
  if (range.min < info->domain_min - kSlack || range.max > info->domain_max + kSlack)
    invalid(path, "range must lie within [" + std::to_string(info->domain_min) + ", " +
                      std::to_string(info->domain_max) + "]");
  if (path == "deform.fold_dihedral" && (std::abs(range.min) >= kPi || std::abs(range.max) >= kPi))
    invalid(path, "|dihedral| must be < pi");
  return range;
}

void parse_render(const Json& j, RenderDefaults& render) {
  if (!j.is_object()) invalid("render", "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "render." + key;
    if (key == "width") render.width = static_cast<int>(integer_value(value, path, 1, 16384));
    else if (key == "height") render.height = static_cast<int>(integer_value(value, path, 1, 16384));
    else if (key == "spp") render.spp = static_cast<int>(integer_value(value, path, 1, 1 << 20));
    else if (key == "max_depth") render.max_depth = static_cast<int>(integer_value(value, path, 1, 64));
    else if (key == "tile") render.tile = static_cast<int>(integer_value(value, path, 8, 4096));
    else throw SpecError(SpecErrorKind::kUnknownParameter, path, "'" + path + "' is not a render setting");
  }
}

// Resolves parameter values for one sample, recording them as it goes.
class Resolver {
 public:
  Resolver(const RandomizationSpec& spec, std::uint64_t index, SceneInstance& scene)
      : spec_(spec), index_(index), scene_(scene) {}

  double number(const std::string& path) {
    const ParamInfo& info = *find_parameter(path);
    double v = info.default_value;
    if (const ParamEntry* entry = spec_.find(path)) {
      const auto& range = std::get<ParamRange>(*entry);
      const StreamKey key = parameter_key(spec_.seed, index_, path);
      if (info.kind == ParamKind::kInteger) {
        const double lo = std::ceil(range.min);
        const double hi = std::floor(range.max);
        v = hi < lo ? lo : lo + std::floor(RngStream(key).uniform() * (hi - lo + 1.0));
        v = std::min(v, hi);
      } else {
        v = sample_continuous(range, key);
      }
    }
    scene_.continuous_values[path] = v;
    return v;
  }

  bool bound(const std::string& path) const { return spec_.find(path) != nullptr; }

  std::string choice(const std::string& path) {
    const ParamInfo& info = *find_parameter(path);
    std::string v = info.default_choice;
    if (const ParamEntry* entry = spec_.find(path))
      v = sample_categorical(std::get<CategoricalDist>(*entry), parameter_key(spec_.seed, index_, path));
    if (!v.empty()) scene_.categorical_choices[path] = v;
    return v;
  }

  // Stream for internal randomness (poses of decoys, occluders, ...).
  RngStream stream(std::string_view tag, std::uint64_t k = 0) const {
    return RngStream(parameter_key(spec_.seed, index_, tag).derive(k));
  }

 private:
  const RandomizationSpec& spec_;
  std::uint64_t index_;
  SceneInstance& scene_;
};

bool box_contains(const Occluder& o, const Vec3& p) {
  if (o.shape != OccluderShape::kBox) return false;
  const Vec3 d = p - o.center;
  const double c = std::cos(o.yaw), s = std::sin(o.yaw);
  const double lx = c * d.x + s * d.y;
  const double ly = -s * d.x + c * d.y;
  return std::abs(lx) <= o.size.x / 2 && std::abs(ly) <= o.size.y / 2 && std::abs(d.z) <= o.size.z / 2;
}

}  // namespace

const std::vector<ParamInfo>& parameter_vocabulary() { return kVocabulary; }

const ParamInfo* find_parameter(std::string_view path) {
  for (const auto& info : kVocabulary)
    if (info.path == path) return &info;
  return nullptr;
}

const ParamEntry* RandomizationSpec::find(std::string_view path) const {
  for (const auto& [name, entry] : params)
    if (name == path) return &entry;
  return nullptr;
}

RandomizationSpec parse_spec(std::string_view text) {
  const Json root = parse_json(text);
  if (!root.is_object()) throw SpecError(SpecErrorKind::kSyntax, "", "top level must be an object");
  RandomizationSpec spec;
  spec.source_hash = fnv1a64(text);
  for (const auto& [key, value] : root.items()) {
    if (key == "input_dir") spec.input_dir = string_value(value, key);
    else if (key == "output_dir") spec.output_dir = string_value(value, key);
    else if (key == "patch_dir") spec.patch_dir = string_value(value, key);
    else if (key == "count") spec.count = static_cast<std::uint64_t>(integer_value(value, key, 0, 100'000'000));
    else if (key == "seed") {
      if (!value.is_number_unsigned()) invalid(key, "expected a non-negative integer");
      spec.seed = value.get<std::uint64_t>();
    } else if (key == "render") parse_render(value, spec.render);
    else if (key == "sheet_grid") spec.sheet_grid = static_cast<int>(integer_value(value, key, 1, 256));
    else if (key == "rotation_label_mode") {
      const std::string mode = string_value(value, key);
      if (mode == "projected") spec.rotation_label_mode = RotationLabelMode::kProjected;
      else if (mode == "camera_roll") spec.rotation_label_mode = RotationLabelMode::kCameraRoll;
      else invalid(key, "expected \"projected\" or \"camera_roll\"");
    } else if (key == "deformation_order") {
      if (!value.is_array()) invalid(key, "expected a list");
      spec.deformation_order.clear();
      for (const auto& item : value) {
        const std::string op = string_value(item, key);
        if (op != "bend" && op != "fold" && op != "roughness") invalid(key, "unknown deformation '" + op + "'");
        if (std::find(spec.deformation_order.begin(), spec.deformation_order.end(), op) != spec.deformation_order.end())
          throw SpecError(SpecErrorKind::kDuplicatePath, key, "'" + op + "' listed twice in deformation_order");
        spec.deformation_order.push_back(op);
      }
    } else if (key == "params") {
      if (!value.is_object()) invalid(key, "expected an object");
      for (const auto& [path, entry] : value.items()) spec.params.emplace_back(path, parse_entry(path, entry));
    } else {
      throw SpecError(SpecErrorKind::kUnknownParameter, key, "unknown top-level key '" + key + "'");
    }
  }
  return spec;
}

double sample_continuous(const ParamRange& range, double u) {
  return std::clamp(range.min + u * (range.max - range.min), range.min, range.max);
}

double sample_continuous(const ParamRange& range, StreamKey key) {
  return sample_continuous(range, RngStream(key).uniform());
}

const std::string& sample_categorical(const CategoricalDist& dist, double u) {
  double total = 0.0;
  for (const auto& item : dist.items) total += item.second;
  double cdf = 0.0;
  for (const auto& item : dist.items) {
    cdf += item.second;
    if (u * total < cdf) return item.first;
  }
  return dist.items.back().first;
}

const std::string& sample_categorical(const CategoricalDist& dist, StreamKey key) {
  return sample_categorical(dist, RngStream(key).uniform());
}

StreamKey parameter_key(std::uint64_t master_seed, std::uint64_t index, std::string_view path) {
  return master_key(master_seed).derive(index).derive(path);
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index) {
  return parameter_key(master_seed, index, "render").value;
}

std::size_t choose_document(std::uint64_t master_seed, std::uint64_t index, std::size_t n) {
  if (n == 0) throw InvalidArgument("no base documents to choose from");
  const double u = RngStream(parameter_key(master_seed, index, "document")).uniform();
  return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
}

SceneInstance sample_scene(const RandomizationSpec& spec, const SheetSpec& base_doc, std::uint64_t index,
                           std::span<const std::string> patches) {
  SceneInstance scene;
  scene.seed = sample_seed(spec.seed, index);
  scene.index = index;
  scene.base_document = base_doc.texture;
  scene.sheet = base_doc;
  scene.sheet.grid_nx = scene.sheet.grid_ny = spec.sheet_grid;
  Resolver r(spec, index, scene);

  if (const std::string size = r.choice("sheet.size"); !size.empty()) {
    const SheetSize preset = *sheet_preset(size);
    scene.sheet.width_m = preset.width_m;
    scene.sheet.height_m = preset.height_m;
  }

  // Deformations, in the configured order; identity operations are omitted.
  const double curvature = r.number("deform.bend_curvature");
  const double bend_axis = r.number("deform.bend_axis_angle");
  const double dihedral = r.number("deform.fold_dihedral");
  const double fold_u = r.number("deform.fold_u");
  const double fold_v = r.number("deform.fold_v");
  const double fold_angle = r.number("deform.fold_angle");
  const double rough_amp = r.number("deform.roughness_amplitude_m");
  const double rough_freq = r.number("deform.roughness_frequency");
  for (const auto& op : spec.deformation_order) {
    if (op == "bend" && curvature != 0.0) scene.deformation.ops.emplace_back(Bend{curvature, bend_axis});
    if (op == "fold" && dihedral != 0.0)
      scene.deformation.ops.emplace_back(
          Fold{{fold_u, fold_v}, {std::cos(fold_angle), std::sin(fold_angle)}, dihedral});
    if (op == "roughness" && rough_amp > 0.0)
      scene.deformation.ops.emplace_back(
          Roughness{rough_amp, rough_freq, parameter_key(spec.seed, index, "deform.roughness_seed").value});
  }

  // Camera on a sphere around the target.
  const double distance = r.number("camera.distance_m");
  const double elevation = r.number("camera.elevation");
  const double azimuth = r.number("camera.azimuth");
  const Vec3 target{r.number("camera.target_x"), r.number("camera.target_y"), 0.0};
  const Vec3 position = target + Vec3{std::sin(elevation) * std::sin(azimuth), -std::sin(elevation) * std::cos(azimuth),
                                      std::cos(elevation)} * distance;
  scene.camera = look_at_camera(position, target, spec.render.width, spec.render.height);
  double roll = r.number("camera.roll_theta");
  if (roll <= -kPi) roll = kPi;
  scene.camera.roll_theta = roll;
  scene.camera.focal_mm = r.number("camera.focal_mm");
  scene.camera.sensor_width_mm = r.number("camera.sensor_width_mm");
  const double focus_offset = r.number("camera.focus_offset_m");
  if (r.bound("camera.f_number")) {
    scene.camera.f_number = r.number("camera.f_number");
    scene.camera.focus_distance_m = std::max(1e-3, distance + focus_offset);
  }

  // Lights: a key light plus uniform sky.
  const std::string kind = r.choice("light.kind");
  const double ld = r.number("light.distance_m");
  const double le = r.number("light.elevation");
  const double la = r.number("light.azimuth");
  const double intensity = r.number("light.intensity_w");
  const double area_size = r.number("light.area_size_m");
  const double area_radiance = r.number("light.radiance");
  const double sky = r.number("environment.radiance");
  const Vec3 light_pos = Vec3{std::sin(le) * std::cos(la), std::sin(le) * std::sin(la), std::cos(le)} * ld;
  if (kind == "point") {
    scene.lights.push_back({PointEmitter{intensity}, light_pos, {0, 0, -1}});
  } else if (kind == "area") {
    scene.lights.push_back(
        {AreaEmitter{area_size, area_size, Rgb{area_radiance, area_radiance, area_radiance}}, light_pos,
         normalize(-light_pos)});
  }
  if (sky > 0.0 || scene.lights.empty()) scene.lights.push_back({EnvironmentEmitter{Rgb{sky, sky, sky}}, {}, {0, 0, -1}});

  // Background.
  scene.background.surface = r.choice("background.surface");
  const auto extra = static_cast<int>(r.number("background.extra_sheets"));
  for (int k = 0; k < extra; ++k) {
    RngStream rng = r.stream("background.extra_sheet", static_cast<std::uint64_t>(k));
    ExtraSheet sheet;
    sheet.offset = {(rng.uniform() - 0.5) * 0.3, (rng.uniform() - 0.5) * 0.3};
    sheet.rotation = (rng.uniform() - 0.5) * 1.2;
    sheet.z = -0.0005 - 0.0002 * k;
    scene.background.extra_sheets.push_back(sheet);
  }
  const auto occluders = static_cast<int>(r.number("background.occluders"));
  const double occ_size = r.number("occluder.size_m");
  const double occ_height = r.number("occluder.height_m");
  for (int k = 0; k < occluders; ++k) {
    RngStream rng = r.stream("background.occluder", static_cast<std::uint64_t>(k));
    Occluder occ;
    occ.shape = rng.uniform() < 0.5 ? OccluderShape::kBox : OccluderShape::kQuad;
    const double x = (rng.uniform() - 0.5) * 0.3;
    const double y = (rng.uniform() - 0.5) * 0.36;
    occ.yaw = rng.uniform() * kPi;
    const double g = 0.1 + 0.7 * rng.uniform();
    occ.albedo = {g, g * (0.8 + 0.2 * rng.uniform()), g * (0.8 + 0.2 * rng.uniform())};
    if (occ.shape == OccluderShape::kBox) {
      occ.size = {occ_size, occ_size, occ_height};
      occ.center = {x, y, scene.background.table_z + occ_height / 2};
    } else {
      occ.size = {occ_size, occ_size, 0.0};
      occ.center = {x, y, occ_height};
    }
    if (box_contains(occ, scene.camera.position)) continue;
    scene.background.occluders.push_back(occ);
  }

  // Style noise.
  scene.style.sigma = r.number("noise.sigma");
  const std::string morph = r.choice("noise.morph_op");
  scene.style.morph_radius = static_cast<int>(r.number("noise.morph_radius"));
  if (morph == "erode") scene.style.morph = MorphOp::kErode;
  if (morph == "dilate") scene.style.morph = MorphOp::kDilate;

  // Content patch.
  if (!patches.empty()) {
    const double scale = r.number("content.patch_scale");
    const double pu = r.number("content.patch_u");
    const double pv = r.number("content.patch_v");
    const double u0 = std::clamp(pu - scale / 2, 0.0, 1.0 - scale);
    const double v0 = std::clamp(pv - scale / 2, 0.0, 1.0 - scale);
    const double u = RngStream(parameter_key(spec.seed, index, "content.patch")).uniform();
    const auto pick = std::min(patches.size() - 1, static_cast<std::size_t>(u * static_cast<double>(patches.size())));
    std::string name = "patch";
    for (int k = 1; std::any_of(scene.sheet.fields.begin(), scene.sheet.fields.end(),
                                [&](const FieldAnnotation& f) { return f.name == name; });
         ++k)
      name = "patch_" + std::to_string(k);
    const UvRect rect{u0, v0, std::min(1.0, u0 + scale), std::min(1.0, v0 + scale)};
    scene.patch = ContentPatch{patches[pick], rect, name};
    scene.sheet.fields.push_back({name, rect});
  }

  scene.render = {spec.render.spp, spec.render.max_depth, spec.render.tile};
  check_membership(spec, scene);
  validate(scene);
  return scene;
}

void check_membership(const RandomizationSpec& spec, const SceneInstance& scene) {
  for (const auto& [path, entry] : spec.params) {
    if (const auto* range = std::get_if<ParamRange>(&entry)) {
      const auto it = scene.continuous_values.find(path);
      if (it == scene.continuous_values.end()) continue;  // e.g. content.* without patches
      if (!(it->second >= range->min && it->second <= range->max))
        throw InvalidArgument("'" + path + "' value outside its range");
    } else {
      const auto& dist = std::get<CategoricalDist>(entry);
      const auto it = scene.categorical_choices.find(path);
      if (it == scene.categorical_choices.end()) throw InvalidArgument("'" + path + "' has no recorded choice");
      if (std::none_of(dist.items.begin(), dist.items.end(), [&](const auto& item) { return item.first == it->second; }))
        throw InvalidArgument("'" + path + "' value is not in its distribution");
    }
  }
}

}  // namespace docsynth
