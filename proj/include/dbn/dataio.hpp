#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dbn/error.hpp"
#include "dbn/image.hpp"

namespace dbn::dataio {

enum class PgmErrorKind {
  io,
  bad_magic,
  malformed_header,
  zero_dimension,
  maxval_too_large,
  truncated_payload,
  bad_ascii_sample,
};

/// PGM decode failure. `offset` is the byte offset in the file where the
/// problem was detected.
class PgmError : public DataError {
 public:
  PgmError(PgmErrorKind kind, std::size_t offset, const std::string& what);
  PgmErrorKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  PgmErrorKind kind_;
  std::size_t offset_;
};

/// Decodes a PGM (P5 binary or P2 ASCII, maxval <= 255) held in memory.
/// Samples are returned as stored; no rescaling for maxval < 255.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage load_pgm(const std::filesystem::path& path);

/// Encodes as P5 with maxval 255: "P5\n<w> <h>\n255\n" followed by the raster.
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

RgbImage stack_to_rgb(const GrayImage& image);

struct ManifestEntry {
  std::string path;  ///< relative to DatasetManifest::root, '/' separated
  std::size_t class_index = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Labelled image list. Paths are stored relative to `root` so manifests
/// (and anything derived from them) do not depend on where a run lives.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;

  std::size_t num_classes() const { return class_names.size(); }
  std::filesystem::path resolve(const ManifestEntry& e) const { return root / e.path; }
  std::size_t count_of(std::size_t class_index) const;

  /// Throws DataError if K < 2, a class index is out of range or a path
  /// repeats.
  void validate() const;
};

/// Scans root/<class>/<*.pgm>. Classes and entries are sorted by byte-wise
/// comparison of names, independent of locale.
DatasetManifest scan_dataset(const std::filesystem::path& root);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Stratified split. Each class is shuffled (Fisher-Yates with Rng(seed),
/// classes visited in index order) and its first round(f * n) entries,
/// clamped to [1, n - 1], go to train. Both halves come back sorted by path.
std::pair<DatasetManifest, DatasetManifest> split_manifest(const DatasetManifest& manifest,
                                                           const SplitSpec& spec);

/// Class names used by the synthetic generator, in index order.
const std::vector<std::string>& synthetic_class_names();

/// Writes n_per_class procedurally generated images for each of four
/// classes under root/<class>/ and returns the scanned manifest.
///   glioma      bright solid blob inside the head ellipse
///   meningioma  thin bright ring
///   notumor     head ellipse with noise only
///   pituitary   bright stripe pattern
DatasetManifest generate_synthetic_dataset(const std::filesystem::path& root,
                                           std::size_t n_per_class, std::size_t image_size,
                                           std::uint64_t seed);

/// CSV with header `path,class_index,class_name`, LF line endings.
void write_manifest_csv(const DatasetManifest& manifest, const std::filesystem::path& csv_path);

/// Reads a manifest CSV. Paths resolve against the CSV's directory; class
/// names are taken from `class_names` when given, otherwise rebuilt from the
/// rows (index order).
DatasetManifest read_manifest_csv(const std::filesystem::path& csv_path,
                                  std::vector<std::string> class_names = {});

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);
/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(const std::string& field);

}  // namespace dbn::dataio
