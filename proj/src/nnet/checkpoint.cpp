#include "dbn/nnet/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dbn/error.hpp"

namespace dbn::nnet {

namespace {

constexpr char magic[8] = {'D', 'B', 'N', 'M', 'I', 'N', 'I', '\0'};

std::uint32_t section_code(const std::string& s) {
  if (s == "branch_a") return 0;
  if (s == "branch_b") return 1;
  return 2;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  std::uint64_t uint(int width, const char* what) {
    if (bytes_.size() - pos_ < static_cast<std::size_t>(width))
      throw DataError("checkpoint: truncated reading " + std::string(what) + " at byte " + std::to_string(pos_));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(uint(4, what)); }
  std::uint64_t u64(const char* what) { return uint(8, what); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(Network& net) {
  Writer w;
  w.out.insert(w.out.end(), std::begin(magic), std::end(magic));
  w.u32(checkpoint_version);
  const NetConfig& c = net.config();
  for (std::size_t v : {c.input_size, c.input_channels, c.classes, c.width, c.kernel})
    w.u32(static_cast<std::uint32_t>(v));
  w.f64(c.dropout_rate);
  const auto table = net.layer_table();
  w.u32(static_cast<std::uint32_t>(table.size()));
  for (const auto& e : table) {
    w.u32(section_code(e.section));
    w.u32(static_cast<std::uint32_t>(e.spec.kind));
    w.u32(static_cast<std::uint32_t>(e.spec.in_channels));
    w.u32(static_cast<std::uint32_t>(e.spec.out_channels));
    w.u32(static_cast<std::uint32_t>(e.spec.kernel));
    w.u32(static_cast<std::uint32_t>(e.spec.stride));
    w.u64(param_count(e.spec));
  }
  w.u64(net.parameter_count());
  for (const Param* p : net.parameters())
    for (double v : p->value) w.f32(static_cast<float>(v));
  return std::move(w.out);
}

Network decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof magic || std::memcmp(bytes.data(), magic, sizeof magic) != 0)
    throw DataError("checkpoint: bad magic at byte 0");
  Reader r(bytes.subspan(sizeof magic));
  const auto version = r.u32("version");
  if (version != checkpoint_version)
    throw DataError("checkpoint: unsupported version " + std::to_string(version));

  NetConfig cfg;
  cfg.input_size = r.u32("input_size");
  cfg.input_channels = r.u32("input_channels");
  cfg.classes = r.u32("classes");
  cfg.width = r.u32("width");
  cfg.kernel = r.u32("kernel");
  cfg.dropout_rate = r.f64("dropout_rate");
  Network net = [&] {
    try {
      return Network(cfg);
    } catch (const ConfigError& e) {
      throw DataError(std::string("checkpoint: invalid header: ") + e.what());
    }
  }();

  const auto table = net.layer_table();
  const auto count = r.u32("layer count");
  if (count != table.size())
    throw DataError("checkpoint: layer count " + std::to_string(count) + ", expected " + std::to_string(table.size()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const LayerSpec& s = table[i].spec;
    const std::uint64_t expect[] = {section_code(table[i].section), static_cast<std::uint32_t>(s.kind),
                                    s.in_channels, s.out_channels, s.kernel, s.stride};
    for (std::uint64_t e : expect)
      if (r.u32("layer table") != e)
        throw DataError("checkpoint: layer " + std::to_string(i) + " does not match the architecture (byte " +
                        std::to_string(r.pos() + sizeof magic - 4) + ")");
    if (r.u64("layer params") != param_count(s))
      throw DataError("checkpoint: layer " + std::to_string(i) + " parameter count mismatch");
  }
  const auto total = r.u64("parameter total");
  if (total != net.parameter_count()) throw DataError("checkpoint: parameter total mismatch");
  if (r.remaining() != total * 4)
    throw DataError("checkpoint: payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                    std::to_string(total * 4));
  for (Param* p : net.parameters())
    for (double& v : p->value) v = static_cast<double>(r.f32("parameters"));
  return net;
}

void save_checkpoint(const std::filesystem::path& path, Network& net) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed: " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string layer_table_csv(const Network& net) {
  std::string out = "index,section,kind,in_channels,out_channels,kernel,stride,params\n";
  const auto table = net.layer_table();
  char line[256];
  for (std::size_t i = 0; i < table.size(); ++i) {
    const LayerSpec& s = table[i].spec;
    std::snprintf(line, sizeof line, "%zu,%s,%s,%zu,%zu,%zu,%zu,%zu\n", i, table[i].section.c_str(),
                  std::string(kind_name(s.kind)).c_str(), s.in_channels, s.out_channels, s.kernel, s.stride,
                  param_count(s));
    out += line;
  }
  return out;
}

}  // namespace dbn::nnet
