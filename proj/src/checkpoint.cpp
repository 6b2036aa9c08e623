#include "mem2seq/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>

namespace m2s {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr std::string_view kMagic{"M2SCKPT\0", 8};

class Writer {
 public:
  void bytes(std::string_view b) { buf_.append(b); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    bytes(s);
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

  std::string_view bytes(std::size_t n) {
    if (n > data_.size() - pos_) throw CheckpointError(source_ + ": truncated checkpoint");
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    std::string_view b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint64_t u64() {
    std::string_view b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    return std::string(bytes(static_cast<std::size_t>(std::min<std::uint64_t>(n, data_.size()))));
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string source_;
};

std::string encode(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  TrainConfig config = ckpt.config;
  config.model = ckpt.model.config();
  w.str(config.to_text());
  const auto& words = ckpt.model.vocab().words();
  w.u64(words.size());
  for (const auto& word : words) w.str(word);
  const ParameterStore& params = ckpt.model.params();
  w.u64(params.size());
  for (const Parameter& p : params) {
    w.str(p.name);
    w.u64(p.value.rank());
    for (std::size_t dim : p.value.shape()) w.u64(dim);
    for (double v : p.value.values()) w.f64(v);
  }
  w.u64(ckpt.epoch);
  w.f64(ckpt.best_score);
  w.u64(ckpt.rng.seed);
  w.u64(ckpt.rng.counter);
  Writer trailer;
  trailer.u64(fnv1a64(w.data()));
  return w.data() + trailer.data();
}

}  // namespace

std::uint64_t parameter_checksum(const ParameterStore& params) {
  Writer w;
  for (const Parameter& p : params) {
    w.str(p.name);
    for (std::size_t dim : p.value.shape()) w.u64(dim);
    for (double v : p.value.values()) w.f64(v);
  }
  return fnv1a64(w.data());
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const std::string data = encode(ckpt);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw CheckpointError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  Reader r(data, source);
  if (data.size() < kMagic.size() + 4) {
    const std::size_t n = std::min(data.size(), kMagic.size());
    if (std::string_view(data).substr(0, n) != kMagic.substr(0, n)) {
      throw CheckpointVersionError(source + ": not a checkpoint (bad magic)");
    }
    throw CheckpointError(source + ": truncated checkpoint");
  }
  if (r.bytes(kMagic.size()) != kMagic) throw CheckpointVersionError(source + ": not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError(source + ": checkpoint version " + std::to_string(version) + ", expected " +
                                 std::to_string(kCheckpointVersion));
  }

  TrainConfig config;
  try {
    config.apply_text(r.str());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(source + ": bad config block: " + e.what());
  }

  const std::uint64_t word_count = r.u64();
  if (word_count > r.remaining()) throw CheckpointError(source + ": truncated checkpoint");
  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(word_count));
  for (std::uint64_t i = 0; i < word_count; ++i) words.push_back(r.str());

  const std::uint64_t param_count = r.u64();
  if (param_count > r.remaining()) throw CheckpointError(source + ": truncated checkpoint");
  ParameterStore params;
  for (std::uint64_t i = 0; i < param_count; ++i) {
    std::string name = r.str();
    const std::uint64_t rank = r.u64();
    if (rank > 2) throw CheckpointError(source + ": parameter " + name + " has rank " + std::to_string(rank));
    std::vector<std::size_t> shape;
    std::uint64_t count = 1;
    for (std::uint64_t k = 0; k < rank; ++k) {
      shape.push_back(static_cast<std::size_t>(r.u64()));
      count *= shape.back();
    }
    if (count > r.remaining() / 8) throw CheckpointError(source + ": truncated checkpoint");
    std::vector<double> values(static_cast<std::size_t>(count));
    for (double& v : values) v = r.f64();
    params.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }

  const std::size_t epoch = static_cast<std::size_t>(r.u64());
  const double best = r.f64();
  Rng::State rng;
  rng.seed = r.u64();
  rng.counter = r.u64();
  const std::size_t body_end = r.position();
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) throw CheckpointError(source + ": trailing bytes after checkpoint");
  if (stored != fnv1a64(std::string_view(data).substr(0, body_end))) {
    throw CheckpointError(source + ": checksum mismatch");
  }

  try {
    Vocab vocab = Vocab::from_words(std::move(words));
    return Checkpoint{Mem2Seq(std::move(vocab), config.model, std::move(params)), config, epoch, best, rng};
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(source + ": " + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + tmp.string() + " for writing");
    write_checkpoint(out, ckpt);
    out.flush();
    if (!out) throw CheckpointError("failed to write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace m2s
