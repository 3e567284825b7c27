#include "junction/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace junction::nn {

namespace {

constexpr char kMagic[8] = {'J', 'N', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  for (std::size_t k = 0; k < sizeof(T); ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) {
      v |= static_cast<T>(static_cast<unsigned char>(s_[pos_ + k])) << (8 * k);
    }
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw std::runtime_error("checkpoint truncated");
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_checkpoint(const Checkpoint& c) {
  c.params.check();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.mode));
  put<std::uint64_t>(out, c.params.version);
  put<std::uint64_t>(out, c.config_hash);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.params.layout.size()));
  put<std::uint32_t>(out, 0);
  for (const auto& d : c.params.layout) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d.in));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d.out));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d.role));
  }
  put<std::uint64_t>(out, c.params.values.size());
  for (float f : c.params.values) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  put<std::uint64_t>(out, fnv1a64(out.data(), out.size()));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint (bad magic)");
  }
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  for (std::size_t k = 0; k < 8; ++k) stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[body + k])) << (8 * k);
  if (stored != fnv1a64(bytes.data(), body)) throw std::runtime_error("checkpoint checksum mismatch");

  Reader r(bytes);
  r.need(sizeof(kMagic));
  for (std::size_t k = 0; k < sizeof(kMagic); ++k) r.get<std::uint8_t>();
  Checkpoint c;
  if (r.get<std::uint32_t>() != kFormatVersion) throw std::runtime_error("unsupported checkpoint format version");
  const std::uint32_t mode = r.get<std::uint32_t>();
  if (mode > 1) throw std::runtime_error("checkpoint has an unknown mode");
  c.mode = static_cast<Mode>(mode);
  c.params.version = r.get<std::uint64_t>();
  c.config_hash = r.get<std::uint64_t>();
  const std::uint32_t layers = r.get<std::uint32_t>();
  r.get<std::uint32_t>();
  std::size_t offset = 0;
  for (std::uint32_t i = 0; i < layers; ++i) {
    LayerDesc d;
    d.in = static_cast<int>(r.get<std::uint32_t>());
    d.out = static_cast<int>(r.get<std::uint32_t>());
    const std::uint32_t role = r.get<std::uint32_t>();
    if (role > 3) throw std::runtime_error("checkpoint has an unknown layer role");
    d.role = static_cast<LayerRole>(role);
    d.offset = offset;
    offset += d.size();
    c.params.layout.push_back(d);
  }
  const std::uint64_t count = r.get<std::uint64_t>();
  if (count != offset) throw std::runtime_error("checkpoint value count does not match its layout");
  if (r.pos() + count * 4 != body) throw std::runtime_error("checkpoint size does not match its value count");
  c.params.values.resize(count);
  for (auto& v : c.params.values) v = std::bit_cast<float>(r.get<std::uint32_t>());
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace junction::nn
