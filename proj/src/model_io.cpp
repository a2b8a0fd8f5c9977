#include "regionlift/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace regionlift {

namespace {

constexpr char kMagic[8] = {'R', 'G', 'N', 'L', 'I', 'F', 'T', '\0'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { raw(v, 4); }
  void u64(std::uint64_t v) { raw(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    buf_ += s;
  }
  void doubles(const double* p, std::size_t n) {
    u64(n);
    for (std::size_t i = 0; i < n; ++i) f64(p[i]);
  }
  void doubles(const std::vector<double>& v) { doubles(v.data(), v.size()); }
  void matrix(const RowMatrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }
  void bytes(const std::string& s) { buf_ += s; }
  std::string& buffer() { return buf_; }

 private:
  void raw(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t n) : p_(data), end_(data + n) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  std::uint64_t u64() { return raw(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = count(1);
    std::string s(p_, p_ + n);
    p_ += n;
    return s;
  }
  std::vector<double> doubles() {
    std::vector<double> v(count(8));
    for (double& d : v) d = f64();
    return v;
  }
  RowMatrix matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (cols != 0 && rows > remaining() / 8 / cols) truncated();
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }
  std::string_view take(std::uint64_t n) {
    if (n > remaining()) truncated();
    std::string_view v(p_, n);
    p_ += n;
    return v;
  }
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }
  [[noreturn]] static void truncated() { throw std::runtime_error("model file is truncated"); }

 private:
  std::uint64_t count(std::size_t element_size) {
    const std::uint64_t n = u64();
    if (n > remaining() / element_size) truncated();
    return n;
  }
  std::uint64_t raw(int n) {
    if (remaining() < static_cast<std::size_t>(n)) truncated();
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p_[i])) << (8 * i);
    p_ += n;
    return v;
  }
  const char* p_;
  const char* end_;
};

void write_svm(Writer& w, const SvmModel& m) {
  w.i32(static_cast<std::int32_t>(m.kernel.kind));
  w.f64(m.kernel.gamma);
  w.matrix(m.support_vectors);
  w.doubles(m.dual_coef);
  w.f64(m.bias);
  w.doubles(m.weights);
}

SvmModel read_svm(Reader& r) {
  SvmModel m;
  const std::int32_t kind = r.i32();
  if (kind != 0 && kind != 1) throw std::runtime_error("model file: unknown kernel kind");
  m.kernel.kind = static_cast<KernelKind>(kind);
  m.kernel.gamma = r.f64();
  m.support_vectors = r.matrix();
  m.dual_coef = r.doubles();
  m.bias = r.f64();
  m.weights = r.doubles();
  if (m.dual_coef.size() != static_cast<std::size_t>(m.support_vectors.rows())) {
    throw std::runtime_error("model file: support vector count mismatch");
  }
  return m;
}

void section(Writer& out, const char tag[4], const std::string& payload, std::uint32_t& count) {
  out.bytes(std::string(tag, 4));
  out.u64(payload.size());
  out.bytes(payload);
  ++count;
}

}  // namespace

std::string serialize_model(const ModelBundle& bundle) {
  std::uint32_t sections = 0;
  Writer body;
  section(body, "CONF", to_json(bundle.config).dump(), sections);

  if (bundle.encoding) {
    const BowEncoding& e = *bundle.encoding;
    Writer w;
    w.str(e.codebook.channel);
    w.matrix(e.codebook.centers);
    w.u64(e.sampling.patch_sizes.size());
    for (int s : e.sampling.patch_sizes) w.i32(s);
    w.i32(e.sampling.stride);
    w.i32(e.llc.neighbors);
    w.f64(e.llc.lambda);
    w.u64(e.pyramid.levels.size());
    for (const PyramidLevel& l : e.pyramid.levels) {
      w.i32(l.rows);
      w.i32(l.cols);
    }
    section(body, "ENCP", w.buffer(), sections);
  }

  if (!bundle.classifiers.empty()) {
    Writer w;
    w.u64(bundle.classifiers.size());
    for (const auto& [category, scorer] : bundle.classifiers) {
      w.i32(category);
      w.doubles(scorer.weights);
      w.f64(scorer.bias);
    }
    section(body, "CLSF", w.buffer(), sections);
  }

  if (!bundle.rescorers.empty() || !bundle.rescore_skipped.empty()) {
    Writer w;
    w.u64(bundle.rescorers.size());
    for (const auto& [category, model] : bundle.rescorers) {
      w.i32(category);
      write_svm(w, model);
    }
    w.u64(bundle.rescore_skipped.size());
    for (int c : bundle.rescore_skipped) w.i32(c);
    section(body, "RESC", w.buffer(), sections);
  }

  Writer out;
  out.bytes(std::string(kMagic, sizeof kMagic));
  out.u32(kModelVersion);
  out.u32(sections);
  out.bytes(body.buffer());
  const std::string& bytes = out.buffer();
  out.u64(fnv1a(bytes.data(), bytes.size()));
  return out.buffer();
}

ModelBundle deserialize_model(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 16) Reader::truncated();
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("not a regionlift model file (bad magic)");
  }
  Reader header(bytes.data() + sizeof kMagic, bytes.size() - sizeof kMagic);
  const std::uint32_t version = header.u32();
  if (version != kModelVersion) {
    throw std::runtime_error("unsupported model version " + std::to_string(version) +
                             " (expected " + std::to_string(kModelVersion) + ")");
  }
  const std::size_t body_end = bytes.size() - 8;
  Reader trailer(bytes.data() + body_end, 8);
  if (trailer.u64() != fnv1a(bytes.data(), body_end)) {
    throw std::runtime_error("model checksum mismatch (file corrupt or truncated)");
  }

  Reader r(bytes.data() + sizeof kMagic + 4, body_end - sizeof kMagic - 4);
  const std::uint32_t sections = r.u32();
  ModelBundle bundle;
  bool have_config = false;
  for (std::uint32_t s = 0; s < sections; ++s) {
    const std::string tag(r.take(4));
    const std::uint64_t length = r.u64();
    const std::string_view payload = r.take(length);
    Reader p(payload.data(), payload.size());
    if (tag == "CONF") {
      bundle.config = config_from_json(nlohmann::json::parse(payload));
      have_config = true;
    } else if (tag == "ENCP") {
      BowEncoding e;
      e.codebook.channel = p.str();
      e.codebook.centers = p.matrix();
      e.sampling.patch_sizes.clear();
      for (std::uint64_t n = p.u64(), i = 0; i < n; ++i) e.sampling.patch_sizes.push_back(p.i32());
      e.sampling.stride = p.i32();
      e.llc.neighbors = p.i32();
      e.llc.lambda = p.f64();
      e.pyramid.levels.clear();
      for (std::uint64_t n = p.u64(), i = 0; i < n; ++i) {
        const int rows = p.i32();
        e.pyramid.levels.push_back({rows, p.i32()});
      }
      bundle.encoding = std::move(e);
    } else if (tag == "CLSF") {
      const std::uint64_t n = p.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        const int category = p.i32();
        LinearScorer scorer;
        scorer.weights = p.doubles();
        scorer.bias = p.f64();
        bundle.classifiers.emplace(category, std::move(scorer));
      }
    } else if (tag == "RESC") {
      const std::uint64_t n = p.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        const int category = p.i32();
        bundle.rescorers.emplace(category, read_svm(p));
      }
      const std::uint64_t skipped = p.u64();
      for (std::uint64_t i = 0; i < skipped; ++i) bundle.rescore_skipped.insert(p.i32());
    } else {
      throw std::runtime_error("model file: unknown section '" + tag + "'");
    }
  }
  if (!have_config) throw std::runtime_error("model file: missing configuration section");
  if (r.remaining() != 0) throw std::runtime_error("model file: trailing bytes after sections");
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  const std::string bytes = serialize_model(bundle);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize_model(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace regionlift
