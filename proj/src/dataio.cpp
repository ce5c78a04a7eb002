#include "dbn/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

#include "dbn/rng.hpp"

namespace fs = std::filesystem;

namespace dbn::dataio {

PgmError::PgmError(PgmErrorKind kind, std::size_t offset, const std::string& what)
    : DataError("PGM: " + what + " at byte " + std::to_string(offset)), kind_(kind), offset_(offset) {}

namespace {

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }

  // Skips whitespace and '#' comments (which run to end of line).
  void skip_separators() {
    while (!at_end()) {
      if (peek() == '#') {
        while (!at_end() && peek() != '\n' && peek() != '\r') ++pos_;
      } else if (is_space(peek())) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Reads an unsigned decimal field; `start` receives its offset.
  std::uint64_t read_uint(PgmErrorKind eof_kind, const char* field, std::size_t& start,
                          PgmErrorKind bad_kind = PgmErrorKind::malformed_header) {
    skip_separators();
    start = pos_;
    if (at_end()) throw PgmError(eof_kind, pos_, std::string("unexpected end of file reading ") + field);
    if (peek() < '0' || peek() > '9')
      throw PgmError(bad_kind, pos_, std::string("expected digit for ") + field);
    std::uint64_t v = 0;
    while (!at_end() && peek() >= '0' && peek() <= '9') {
      v = v * 10 + (peek() - '0');
      if (v > (1ULL << 40)) throw PgmError(bad_kind, start, std::string(field) + " too large");
      ++pos_;
    }
    if (!at_end() && !is_space(peek()) && peek() != '#')
      throw PgmError(bad_kind, pos_, std::string("junk after ") + field);
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
    throw PgmError(PgmErrorKind::bad_magic, 0, "expected magic P5 or P2");
  const bool binary = bytes[1] == '5';

  HeaderReader rd(bytes);
  rd.advance();
  rd.advance();
  if (!rd.at_end() && !is_space(rd.peek()) && rd.peek() != '#')
    throw PgmError(PgmErrorKind::malformed_header, rd.pos(), "no separator after magic");

  std::size_t at = 0;
  const auto width = rd.read_uint(PgmErrorKind::malformed_header, "width", at);
  if (width == 0) throw PgmError(PgmErrorKind::zero_dimension, at, "zero width");
  const auto height = rd.read_uint(PgmErrorKind::malformed_header, "height", at);
  if (height == 0) throw PgmError(PgmErrorKind::zero_dimension, at, "zero height");
  const auto maxval = rd.read_uint(PgmErrorKind::malformed_header, "maxval", at);
  if (maxval == 0) throw PgmError(PgmErrorKind::malformed_header, at, "maxval 0");
  if (maxval > 255) throw PgmError(PgmErrorKind::maxval_too_large, at, "maxval " + std::to_string(maxval) + " > 255");

  const std::size_t count = width * height;
  std::vector<std::uint8_t> data(count);

  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    if (rd.at_end()) throw PgmError(PgmErrorKind::truncated_payload, rd.pos(), "missing raster");
    if (!is_space(rd.peek())) throw PgmError(PgmErrorKind::malformed_header, rd.pos(), "expected whitespace before raster");
    rd.advance();
    const std::size_t start = rd.pos();
    if (bytes.size() - start < count)
      throw PgmError(PgmErrorKind::truncated_payload, bytes.size(),
                     "raster has " + std::to_string(bytes.size() - start) + " of " + std::to_string(count) + " bytes");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), count, data.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = rd.read_uint(PgmErrorKind::truncated_payload, "sample", at, PgmErrorKind::bad_ascii_sample);
      if (v > maxval) throw PgmError(PgmErrorKind::bad_ascii_sample, at, "sample exceeds maxval");
      data[i] = static_cast<std::uint8_t>(v);
    }
  }
  return GrayImage(width, height, std::move(data));
}

GrayImage load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError(PgmErrorKind::io, 0, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const PgmError& e) {
    throw PgmError(e.kind(), e.offset(), path.string() + ": " + std::string(e.what()).substr(5));
  }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

void save_pgm(const GrayImage& image, const fs::path& path) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

RgbImage stack_to_rgb(const GrayImage& image) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(3 * image.size());
  for (auto g : image.pixels()) rgb.insert(rgb.end(), {g, g, g});
  return RgbImage(image.width(), image.height(), std::move(rgb));
}

std::size_t DatasetManifest::count_of(std::size_t class_index) const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                [&](const ManifestEntry& e) { return e.class_index == class_index; }));
}

void DatasetManifest::validate() const {
  if (class_names.size() < 2) throw DataError("manifest needs at least 2 classes");
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.class_index >= class_names.size())
      throw DataError("manifest entry " + e.path + " has class index " + std::to_string(e.class_index) +
                      " >= K=" + std::to_string(class_names.size()));
    if (!seen.insert(e.path).second) throw DataError("duplicate manifest path " + e.path);
  }
}

namespace {

bool has_pgm_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm";
}

}  // namespace

DatasetManifest scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root.string());

  std::vector<std::string> classes;
  for (const auto& d : fs::directory_iterator(root))
    if (d.is_directory()) classes.push_back(d.path().filename().string());
  std::sort(classes.begin(), classes.end());  // std::string compares bytes
  if (classes.size() < 2)
    throw DataError("dataset root " + root.string() + " has " + std::to_string(classes.size()) +
                    " class directories; need at least 2");

  DatasetManifest m;
  m.root = root;
  m.class_names = classes;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    std::vector<std::string> files;
    for (const auto& f : fs::directory_iterator(root / classes[k]))
      if (f.is_regular_file() && has_pgm_extension(f.path()))
        files.push_back(classes[k] + "/" + f.path().filename().string());
    if (files.empty()) throw DataError("class directory " + classes[k] + " has no .pgm files");
    for (auto& f : files) m.entries.push_back({std::move(f), k});
  }
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  m.validate();
  return m;
}

std::pair<DatasetManifest, DatasetManifest> split_manifest(const DatasetManifest& manifest, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  manifest.validate();

  DatasetManifest train{manifest.root, manifest.class_names, {}};
  DatasetManifest val{manifest.root, manifest.class_names, {}};
  Rng rng(spec.seed);
  for (std::size_t k = 0; k < manifest.num_classes(); ++k) {
    std::vector<ManifestEntry> members;
    for (const auto& e : manifest.entries)
      if (e.class_index == k) members.push_back(e);
    const std::size_t n = members.size();
    if (n < 2)
      throw DataError("class " + manifest.class_names[k] + " has " + std::to_string(n) +
                      " entries; stratified split needs at least 2");
    for (std::size_t i = n - 1; i > 0; --i) std::swap(members[i], members[rng.below(i + 1)]);
    auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? train : val).entries.push_back(members[i]);
  }
  auto by_path = [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; };
  std::sort(train.entries.begin(), train.entries.end(), by_path);
  std::sort(val.entries.begin(), val.entries.end(), by_path);
  return {std::move(train), std::move(val)};
}

const std::vector<std::string>& synthetic_class_names() {
  static const std::vector<std::string> names{"glioma", "meningioma", "notumor", "pituitary"};
  return names;
}

namespace {

double smoothstep(double edge0, double edge1, double x) {
  const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

GrayImage synth_image(std::size_t cls, std::size_t size, Rng& rng) {
  const double s = static_cast<double>(size);
  const double cx = s / 2.0 + rng.uniform(-s / 16.0, s / 16.0);
  const double cy = s / 2.0 + rng.uniform(-s / 16.0, s / 16.0);
  const double rx = s * rng.uniform(0.34, 0.42);
  const double ry = s * rng.uniform(0.36, 0.44);
  const double base = rng.uniform(55.0, 75.0);

  // Feature center, kept well inside the head.
  const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double rad = rng.uniform(0.0, 0.3);
  const double fx = cx + rad * rx * std::cos(ang);
  const double fy = cy + rad * ry * std::sin(ang);

  const double blob_r = s * rng.uniform(0.10, 0.14);
  const double ring_r = s * rng.uniform(0.15, 0.19);
  const double ring_w = std::max(1.0, s * 0.035);
  const double stripe_theta = rng.uniform(0.0, std::numbers::pi);
  const double stripe_period = s * rng.uniform(0.14, 0.18);

  std::vector<std::uint8_t> px(size * size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double px_x = static_cast<double>(x) + 0.5;
      const double px_y = static_cast<double>(y) + 0.5;
      const double ex = (px_x - cx) / rx;
      const double ey = (px_y - cy) / ry;
      const double e = std::sqrt(ex * ex + ey * ey);
      const double noise = rng.uniform(-10.0, 10.0);
      if (e > 1.0) {
        px[y * size + x] = to_u8(rng.uniform(0.0, 4.0));
        continue;
      }
      double v = base + noise;
      const double d = std::hypot(px_x - fx, px_y - fy);
      switch (cls) {
        case 0:  // glioma
          v += 150.0 * (1.0 - smoothstep(blob_r - 1.0, blob_r + 1.0, d));
          break;
        case 1:  // meningioma
          v += 150.0 * (1.0 - smoothstep(ring_w * 0.5, ring_w, std::abs(d - ring_r)));
          break;
        case 3: {  // pituitary
          const double u = (px_x * std::cos(stripe_theta) + px_y * std::sin(stripe_theta)) / stripe_period;
          if (std::sin(2.0 * std::numbers::pi * u) > 0.2) v += 110.0;
          break;
        }
        default:  // notumor
          break;
      }
      px[y * size + x] = to_u8(v);
    }
  }
  return GrayImage(size, size, std::move(px));
}

}  // namespace

DatasetManifest generate_synthetic_dataset(const fs::path& root, std::size_t n_per_class, std::size_t image_size,
                                           std::uint64_t seed) {
  if (n_per_class < 2) throw ConfigError("n_per_class must be >= 2");
  if (image_size < 16) throw ConfigError("image_size must be >= 16");
  const auto& names = synthetic_class_names();
  Rng rng(seed);
  for (std::size_t k = 0; k < names.size(); ++k) {
    const fs::path dir = root / names[k];
    fs::create_directories(dir);
    for (std::size_t i = 0; i < n_per_class; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%04zu.pgm", names[k].c_str(), i);
      save_pgm(synth_image(k, image_size, rng), dir / name);
    }
  }
  return scan_dataset(root);
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

void write_manifest_csv(const DatasetManifest& manifest, const fs::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + csv_path.string());
  out << "path,class_index,class_name\n";
  for (const auto& e : manifest.entries)
    out << csv_field(e.path) << ',' << e.class_index << ',' << csv_field(manifest.class_names.at(e.class_index))
        << '\n';
  if (!out) throw DataError("write failed: " + csv_path.string());
}

DatasetManifest read_manifest_csv(const fs::path& csv_path, std::vector<std::string> class_names) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"path", "class_index", "class_name"})
    throw DataError(csv_path.string() + ": expected header path,class_index,class_name");

  DatasetManifest m;
  m.root = csv_path.parent_path();
  std::vector<std::string> seen_names;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw DataError(csv_path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    std::size_t idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoul(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(csv_path.string() + ":" + std::to_string(lineno) + ": bad class_index '" + f[1] + "'");
    }
    if (seen_names.size() <= idx) seen_names.resize(idx + 1);
    if (seen_names[idx].empty()) seen_names[idx] = f[2];
    else if (seen_names[idx] != f[2])
      throw DataError(csv_path.string() + ":" + std::to_string(lineno) + ": class name mismatch for index " + f[1]);
    m.entries.push_back({f[0], idx});
  }
  if (class_names.empty()) {
    m.class_names = std::move(seen_names);
  } else {
    for (std::size_t k = 0; k < seen_names.size(); ++k)
      if (!seen_names[k].empty() && (k >= class_names.size() || class_names[k] != seen_names[k]))
        throw DataError(csv_path.string() + ": class names disagree with expected list");
    m.class_names = std::move(class_names);
  }
  m.validate();
  return m;
}

}  // namespace dbn::dataio
