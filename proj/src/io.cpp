#include "regionlift/io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace regionlift {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

[[noreturn]] void bad(const std::string& source, std::size_t line, const std::string& why) {
  throw FormatError(source + ":" + std::to_string(line) + ": " + why);
}

struct LineReader {
  std::istream& in;
  std::string source;
  std::size_t line = 0;

  // Next non-blank line parsed as a JSON object; false at end of input.
  bool next(json& out) {
    std::string text;
    while (std::getline(in, text)) {
      ++line;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        out = json::parse(text);
      } catch (const json::exception& e) {
        bad(source, line, std::string("invalid JSON: ") + e.what());
      }
      if (!out.is_object()) bad(source, line, "record must be a JSON object");
      return true;
    }
    return false;
  }
};

template <typename T>
T field(const json& j, const char* key, const LineReader& r) {
  auto it = j.find(key);
  if (it == j.end()) bad(r.source, r.line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad(r.source, r.line, std::string("field '") + key + "' has the wrong type");
  }
}

bool inclusive_coordinates(const json& header, const LineReader& r, const char* format) {
  if (header.value("format", std::string(format)) != format) {
    bad(r.source, r.line, std::string("expected format '") + format + "'");
  }
  if (header.value("version", kFormatVersion) != kFormatVersion) {
    bad(r.source, r.line, "unsupported format version");
  }
  const std::string coords = header.value("coordinates", std::string("half-open"));
  if (coords == "half-open") return false;
  if (coords == "inclusive") return true;
  bad(r.source, r.line, "coordinates must be 'half-open' or 'inclusive'");
}

Rect read_bbox(const json& j, bool inclusive, const LineReader& r) {
  const auto v = field<std::vector<int>>(j, "bbox", r);
  if (v.size() != 4) bad(r.source, r.line, "bbox must have four integers");
  Rect box{v[0], v[1], v[2], v[3]};
  if (inclusive) {
    box.x2 += 1;
    box.y2 += 1;
  }
  if (!box.valid()) bad(r.source, r.line, "degenerate bbox");
  return box;
}

json bbox_json(const Rect& r) { return json::array({r.x1, r.y1, r.x2, r.y2}); }

}  // namespace

const ImageInfo* AnnotationFile::find_image(const std::string& id) const {
  for (const auto& info : images) {
    if (info.id == id) return &info;
  }
  return nullptr;
}

const ImageInfo& AnnotationFile::image(const std::string& id) const {
  const ImageInfo* info = find_image(id);
  if (!info) throw std::out_of_range("unknown image id '" + id + "'");
  return *info;
}

std::filesystem::path AnnotationFile::resolve(const ImageInfo& info) const {
  const std::filesystem::path p(info.path);
  return p.is_absolute() ? p : base_dir / p;
}

AnnotationFile parse_annotations(std::istream& in, const std::string& source) {
  AnnotationFile out;
  LineReader reader{in, source};
  bool inclusive = false;
  std::set<std::string> image_ids;
  json rec;
  while (reader.next(rec)) {
    const auto type = field<std::string>(rec, "type", reader);
    if (type == "header") {
      inclusive = inclusive_coordinates(rec, reader, "regionlift.annotations");
    } else if (type == "category") {
      const int id = field<int>(rec, "id", reader);
      if (!out.categories.emplace(id, field<std::string>(rec, "name", reader)).second) {
        bad(source, reader.line, "duplicate category id " + std::to_string(id));
      }
    } else if (type == "image") {
      ImageInfo info{field<std::string>(rec, "id", reader), field<std::string>(rec, "path", reader),
                     field<int>(rec, "width", reader), field<int>(rec, "height", reader)};
      if (info.width < 1 || info.height < 1) bad(source, reader.line, "image size must be positive");
      if (!image_ids.insert(info.id).second) bad(source, reader.line, "duplicate image id '" + info.id + "'");
      out.objects[info.id];
      out.images.push_back(std::move(info));
    } else if (type == "object") {
      const auto image = field<std::string>(rec, "image", reader);
      const int category = field<int>(rec, "category", reader);
      const ImageInfo* info = out.find_image(image);
      if (!info) bad(source, reader.line, "object references unknown image '" + image + "'");
      if (!out.categories.contains(category)) {
        bad(source, reader.line, "unknown category " + std::to_string(category));
      }
      const Rect box = read_bbox(rec, inclusive, reader);
      if (!info->extent().contains(box)) bad(source, reader.line, "bbox outside image");
      out.objects[image].push_back({box, 0.0, category});
    } else {
      bad(source, reader.line, "unknown record type '" + type + "'");
    }
  }
  if (out.categories.empty()) bad(source, reader.line, "annotation file declares no categories");
  return out;
}

AnnotationFile load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  AnnotationFile out = parse_annotations(in, path.string());
  out.base_dir = path.parent_path();
  return out;
}

void write_annotations(std::ostream& out, const AnnotationFile& a) {
  out << json{{"type", "header"}, {"format", "regionlift.annotations"},
              {"version", kFormatVersion}, {"coordinates", "half-open"}}.dump()
      << '\n';
  for (const auto& [id, name] : a.categories) {
    out << json{{"type", "category"}, {"id", id}, {"name", name}}.dump() << '\n';
  }
  for (const auto& info : a.images) {
    out << json{{"type", "image"}, {"id", info.id}, {"path", info.path},
                {"width", info.width}, {"height", info.height}}.dump()
        << '\n';
  }
  for (const auto& info : a.images) {
    auto it = a.objects.find(info.id);
    if (it == a.objects.end()) continue;
    for (const BoundingBox& b : it->second) {
      out << json{{"type", "object"}, {"image", info.id}, {"category", b.category_id},
                  {"bbox", bbox_json(b.rect)}}.dump()
          << '\n';
    }
  }
}

void save_annotations(const AnnotationFile& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  write_annotations(out, a);
}

DetectionFile parse_detections(std::istream& in, const std::string& source,
                               const AnnotationFile& manifest) {
  DetectionFile out;
  LineReader reader{in, source};
  bool inclusive = false;
  json rec;
  while (reader.next(rec)) {
    if (rec.value("type", std::string()) == "header") {
      inclusive = inclusive_coordinates(rec, reader, "regionlift.detections");
      continue;
    }
    Detection d;
    d.image_id = field<std::string>(rec, "image", reader);
    d.box.category_id = field<int>(rec, "category", reader);
    d.box.score = field<double>(rec, "score", reader);
    d.box.rect = read_bbox(rec, inclusive, reader);
    const ImageInfo* info = manifest.find_image(d.image_id);
    if (!info) bad(source, reader.line, "unknown image '" + d.image_id + "'");
    if (!manifest.categories.contains(d.box.category_id)) {
      bad(source, reader.line, "unknown category " + std::to_string(d.box.category_id));
    }
    if (!info->extent().contains(d.box.rect)) bad(source, reader.line, "bbox outside image");
    if (!std::isfinite(d.box.score)) bad(source, reader.line, "score must be finite");
    out.records.push_back(std::move(d));
  }
  return out;
}

DetectionFile load_detections(const std::filesystem::path& path, const AnnotationFile& manifest) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  return parse_detections(in, path.string(), manifest);
}

void write_detections(std::ostream& out, const DetectionFile& detections) {
  out << json{{"type", "header"}, {"format", "regionlift.detections"},
              {"version", kFormatVersion}, {"coordinates", "half-open"}}.dump()
      << '\n';
  for (const Detection& d : detections.records) {
    out << json{{"image", d.image_id}, {"category", d.box.category_id},
                {"bbox", bbox_json(d.box.rect)}, {"score", d.box.score}}.dump()
        << '\n';
  }
}

void save_detections(const DetectionFile& detections, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  write_detections(out, detections);
}

}  // namespace regionlift
