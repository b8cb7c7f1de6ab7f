#include "aidetect/embedding_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_map>
#include <unordered_set>

#include "aidetect/error.hpp"

namespace aidetect {

namespace {

static_assert(std::endian::native == std::endian::little, "EMBX encoding assumes a little-endian host");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void bytes(void* p, std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw Error(ErrorKind::Truncated, std::string("EMBX truncated while reading ") + what + " at byte " +
                                            std::to_string(pos_));
    }
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  std::uint64_t u64(const char* what) {
    std::uint64_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

void validate(const EmbeddingSet& set) {
  if (set.dim == 0) throw Error(ErrorKind::ShapeMismatch, "embedding dim must be positive");
  if (set.vectors.size() != set.ids.size() * set.dim) {
    throw Error(ErrorKind::ShapeMismatch, "embedding vector count does not match ids x dim");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : set.ids) {
    if (!seen.insert(id).second) throw Error(ErrorKind::DuplicateId, "duplicate embedding id '" + id + "'");
  }
  for (std::size_t i = 0; i < set.vectors.size(); ++i) {
    if (!std::isfinite(set.vectors[i])) {
      throw Error(ErrorKind::NonFiniteVector, "non-finite value in vector of '" + set.ids[i / set.dim] + "'");
    }
  }
}

std::vector<std::uint8_t> encode_embx(const EmbeddingSet& set) {
  validate(set);
  Writer w;
  w.bytes("EMBX", 4);
  w.u32(kEmbxVersion);
  w.str(set.model_id);
  w.u32(set.dim);
  w.u64(set.ids.size());
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    w.str(set.ids[i]);
    w.bytes(set.vectors.data() + i * set.dim, set.dim * sizeof(float));
  }
  const std::uint32_t crc = crc32_of(w.buffer());
  w.u32(crc);
  return std::move(w.buffer());
}

EmbeddingSet decode_embx(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, "EMBX", 4) != 0) throw Error(ErrorKind::BadMagic, "not an EMBX file (bad magic)");
  const std::uint32_t version = r.u32("version");
  if (version != kEmbxVersion) {
    throw Error(ErrorKind::VersionUnsupported, "EMBX version " + std::to_string(version) + " is not supported");
  }
  EmbeddingSet set;
  set.model_id = r.str("model_id");
  set.dim = r.u32("dim");
  const std::uint64_t count = r.u64("count");
  if (set.dim == 0) throw Error(ErrorKind::ShapeMismatch, "EMBX dim is zero");
  // Each record needs at least 4 + 4*dim bytes; reject impossible counts
  // before allocating.
  if (count > r.remaining() / (4 + 4ull * set.dim)) {
    throw Error(ErrorKind::Truncated, "EMBX count " + std::to_string(count) + " exceeds file size");
  }
  set.ids.reserve(count);
  set.vectors.resize(count * set.dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    set.ids.push_back(r.str("record id"));
    r.bytes(set.vectors.data() + i * set.dim, set.dim * sizeof(float), "vector");
  }
  const std::size_t body = r.pos();
  const std::uint32_t stored = r.u32("checksum");
  if (r.remaining() != 0) {
    throw Error(ErrorKind::TrailingBytes, std::to_string(r.remaining()) + " trailing bytes after EMBX checksum");
  }
  const std::uint32_t actual = crc32_of(bytes.first(body));
  if (stored != actual) throw Error(ErrorKind::ChecksumMismatch, "EMBX checksum mismatch");
  validate(set);
  return set;
}

EmbeddingSet read_embx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_embx(bytes);
}

void write_embx(const EmbeddingSet& set, const std::filesystem::path& path) {
  const auto bytes = encode_embx(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Tensor2 align(std::span<const std::string> doc_ids, const EmbeddingSet& set) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(set.ids.size());
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    if (!index.emplace(set.ids[i], i).second) {
      throw Error(ErrorKind::DuplicateId, "duplicate embedding id '" + set.ids[i] + "'");
    }
  }
  Tensor2 out(doc_ids.size(), set.dim);
  for (std::size_t d = 0; d < doc_ids.size(); ++d) {
    const auto it = index.find(doc_ids[d]);
    if (it == index.end()) throw Error(ErrorKind::MissingId, "no embedding for document '" + doc_ids[d] + "'");
    const auto v = set.vector(it->second);
    auto row = out.row(d);
    for (std::size_t k = 0; k < set.dim; ++k) row[k] = static_cast<double>(v[k]);
  }
  return out;
}

Tensor2 align(const Corpus& corpus, const EmbeddingSet& set) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& doc : corpus) ids.push_back(doc.id);
  return align(ids, set);
}

}  // namespace aidetect
