#include "mick/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mick/config.hpp"
#include "mick/error.hpp"

namespace mick {

namespace {

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { little(v, 4); }
  void u64(std::uint64_t v) { little(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  std::string take() { return std::move(out_); }
  std::string_view view() const { return out_; }

 private:
  void little(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::string_view bytes(std::size_t n) {
    if (n > in_.size() - pos_) throw CorruptionError("checkpoint truncated");
    const auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little(4)); }
  std::uint64_t u64() { return little(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() { return std::string(bytes(u32())); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::uint64_t little(int n) {
    const auto b = bytes(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = n; i-- > 0;) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

const Parameter& find_block(const Checkpoint& ckpt, std::string_view name) {
  for (const auto& b : ckpt.blocks) {
    if (b.name == name) return b;
  }
  throw CorruptionError("checkpoint has no parameter block '" + std::string(name) + "'");
}

Parameter expect_block(const Checkpoint& ckpt, std::string_view name, const Shape& shape) {
  const Parameter& b = find_block(ckpt, name);
  if (b.value.shape() != shape) {
    throw CorruptionError("checkpoint block '" + std::string(name) + "' has shape " +
                          to_string(b.value.shape()) + ", expected " + to_string(shape));
  }
  return b;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kCheckpointMagic);
  w.u8(kCheckpointVersion);
  w.str(format_config(ckpt.config));
  w.u8(static_cast<std::uint8_t>(ckpt.vocab.mode()));
  w.u32(static_cast<std::uint32_t>(ckpt.vocab.corpus_tokens().size()));
  for (const auto& tok : ckpt.vocab.corpus_tokens()) w.str(tok);
  w.u32(static_cast<std::uint32_t>(ckpt.blocks.size()));
  for (const auto& b : ckpt.blocks) {
    w.str(b.name);
    w.u32(static_cast<std::uint32_t>(b.value.rank()));
    for (std::size_t d : b.value.shape()) w.u64(d);
    for (double v : b.value.values()) w.f64(v);
  }
  const std::uint64_t sum = fnv1a64(w.view());
  w.u64(sum);
  return w.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < kCheckpointMagic.size() + 1 + 8 ||
      bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CorruptionError("not a checkpoint (bad magic)");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  Reader tail(bytes.substr(bytes.size() - 8));
  if (tail.u64() != fnv1a64(body)) throw CorruptionError("checkpoint checksum mismatch");

  Reader r(body);
  r.bytes(kCheckpointMagic.size());
  if (const auto v = r.u8(); v != kCheckpointVersion) {
    throw CorruptionError("unsupported checkpoint version " + std::to_string(v));
  }
  Checkpoint ckpt;
  try {
    ckpt.config = config_from_key_values(parse_key_values(r.str()));
  } catch (const ValidationError& e) {
    throw CorruptionError(std::string("checkpoint config: ") + e.what());
  }
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw CorruptionError("checkpoint vocabulary mode " + std::to_string(mode));
  std::vector<std::string> tokens(r.u32());
  for (auto& t : tokens) t = r.str();
  try {
    ckpt.vocab = Vocab(static_cast<VocabMode>(mode), std::move(tokens));
  } catch (const ValidationError& e) {
    throw CorruptionError(std::string("checkpoint vocabulary: ") + e.what());
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Parameter p;
    p.name = r.str();
    Shape shape(r.u32());
    std::size_t elements = 1;
    for (auto& d : shape) {
      d = r.u64();
      if (d == 0 || elements > r.remaining() / 8 / d) {
        throw CorruptionError("checkpoint block '" + p.name + "' has an invalid shape");
      }
      elements *= d;
    }
    if (shape.empty()) throw CorruptionError("checkpoint block '" + p.name + "' has rank 0");
    std::vector<double> data(elements);
    for (double& v : data) v = r.f64();
    p.value = Tensor(std::move(shape), std::move(data));
    ckpt.blocks.push_back(std::move(p));
  }
  if (r.remaining() != 0) throw CorruptionError("trailing bytes in checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_checkpoint(buf.str());
  } catch (const CorruptionError& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  }
}

Checkpoint make_checkpoint(const Model& model, const TrainConfig& cfg, const Vocab& vocab) {
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.vocab = vocab;
  for (const Parameter* p : model.all_parameters()) ckpt.blocks.push_back(*p);
  return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  const TrainConfig& cfg = ckpt.config;
  const EncoderDims& d = cfg.dims;
  Model m;
  m.encoder.window = d.window;
  m.encoder.word_table = expect_block(ckpt, "word_table", {ckpt.vocab.size(), d.word_dim});
  m.encoder.pos_head_table = expect_block(ckpt, "pos_head_table", {d.position_buckets(), d.pos_dim});
  m.encoder.pos_tail_table = expect_block(ckpt, "pos_tail_table", {d.position_buckets(), d.pos_dim});
  m.encoder.conv_filters =
      expect_block(ckpt, "conv_filters", {d.hidden_dim, d.window * d.input_depth()});
  m.encoder.conv_bias = expect_block(ckpt, "conv_bias", {d.hidden_dim});
  m.classifier.weight = expect_block(ckpt, "classifier_weight", {cfg.n_train, d.hidden_dim});
  m.classifier.bias = expect_block(ckpt, "classifier_bias", {cfg.n_train});
  return m;
}

}  // namespace mick
