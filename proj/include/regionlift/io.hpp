#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "regionlift/evaluation.hpp"
#include "regionlift/geometry.hpp"

namespace regionlift {

/// Malformed input; the message carries "source:line: reason".
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImageInfo {
  std::string id;
  std::string path;  // relative paths resolve against AnnotationFile::base_dir
  int width = 0;
  int height = 0;

  ImageExtent extent() const { return {width, height}; }
  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

/// Category dictionary, image manifest and ground truth.
///
/// Line-delimited JSON, one record per line:
///   {"type":"header","format":"regionlift.annotations","version":1,"coordinates":"half-open"}
///   {"type":"category","id":0,"name":"stripes"}
///   {"type":"image","id":"a","path":"images/a.pgm","width":128,"height":96}
///   {"type":"object","image":"a","category":0,"bbox":[x1,y1,x2,y2]}
/// The header is optional. With "coordinates":"inclusive" the max corner is
/// inclusive (VOC style) and is converted to half-open on load.
struct AnnotationFile {
  std::map<int, std::string> categories;
  std::vector<ImageInfo> images;
  GroundTruthSet objects;
  std::filesystem::path base_dir;

  const ImageInfo* find_image(const std::string& id) const;
  const ImageInfo& image(const std::string& id) const;
  std::size_t category_count() const { return categories.size(); }
  std::filesystem::path resolve(const ImageInfo& info) const;
};

/// Line-delimited JSON detections:
///   {"type":"header","format":"regionlift.detections","version":1,"coordinates":"half-open"}
///   {"image":"a","category":0,"bbox":[x1,y1,x2,y2],"score":0.25}
struct DetectionFile {
  std::vector<Detection> records;
  friend bool operator==(const DetectionFile&, const DetectionFile&) = default;
};

AnnotationFile parse_annotations(std::istream& in, const std::string& source);
AnnotationFile load_annotations(const std::filesystem::path& path);
void write_annotations(std::ostream& out, const AnnotationFile& annotations);
void save_annotations(const AnnotationFile& annotations, const std::filesystem::path& path);

/// Validates image ids, categories and box extents against the manifest.
DetectionFile parse_detections(std::istream& in, const std::string& source,
                               const AnnotationFile& manifest);
DetectionFile load_detections(const std::filesystem::path& path, const AnnotationFile& manifest);
void write_detections(std::ostream& out, const DetectionFile& detections);
void save_detections(const DetectionFile& detections, const std::filesystem::path& path);

}  // namespace regionlift
