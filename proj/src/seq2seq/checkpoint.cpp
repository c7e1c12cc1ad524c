#include "apiseq/seq2seq/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "apiseq/error.hpp"

namespace apiseq::seq2seq {

namespace {

constexpr char kMagic[] = "APISEQ1";
constexpr std::size_t kMagicLen = 7;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CorruptFile("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::uint32_t crc_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

nlohmann::json config_json(const ModelConfig& c) {
  return {{"arch", std::string(to_string(c.arch))}, {"d_model", c.d_model}, {"layers", c.layers},
          {"heads", c.heads}, {"ff_dim", c.ff_dim}, {"max_len", c.max_len},
          {"dropout", c.dropout}, {"seed", c.seed}, {"rnn_hidden", c.rnn_hidden}};
}

ModelConfig config_from(const nlohmann::json& j) {
  ModelConfig c;
  const auto arch = parse_arch(j.at("arch").get<std::string>());
  if (!arch) throw CorruptFile("checkpoint names unknown architecture");
  c.arch = *arch;
  c.d_model = j.at("d_model").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.ff_dim = j.at("ff_dim").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.rnn_hidden = j.at("rnn_hidden").get<int>();
  return c;
}

}  // namespace

std::string serialize_checkpoint(const Seq2SeqModel& model) {
  nlohmann::json header;
  header["config"] = config_json(model.config);
  header["tokenizer_fingerprint"] = model.tokenizer_fingerprint;
  header["plan_fingerprint"] = model.plan_fingerprint;
  header["epoch"] = model.epoch;
  auto& tensors = header["tensors"] = nlohmann::json::array();
  for (const auto& p : model.params()) {
    tensors.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()},
                       {"frozen", p.frozen}, {"decay", p.decay}, {"encoder_layer", p.encoder_layer},
                       {"encoder_embedding", p.encoder_embedding}});
  }
  const std::string text = header.dump();

  std::string out(kMagic, kMagicLen);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& p : model.params()) {
    out.append(reinterpret_cast<const char*>(p.value.data()), static_cast<std::size_t>(p.value.size()) * sizeof(double));
  }
  put<std::uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

Seq2SeqModel deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kMagic) != 0) {
    throw FormatError("not an apiseq checkpoint (bad magic)");
  }
  std::size_t pos = kMagicLen;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw VersionMismatch("checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < pos + sizeof(std::uint32_t)) throw CorruptFile("checkpoint truncated");
  const std::size_t body = bytes.size() - sizeof(std::uint32_t);
  std::size_t crc_pos = body;
  if (get<std::uint32_t>(bytes, crc_pos) != crc_of(bytes.data(), body)) {
    throw CorruptFile("checkpoint checksum mismatch (truncated or damaged)");
  }

  const auto header_len = get<std::uint64_t>(bytes, pos);
  if (header_len > body - pos) throw CorruptFile("checkpoint header overruns file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("checkpoint header: ") + e.what());
  }
  pos += header_len;

  Seq2SeqModel m;
  try {
    m.config = config_from(header.at("config"));
    m.tokenizer_fingerprint = header.at("tokenizer_fingerprint").get<std::uint64_t>();
    m.plan_fingerprint = header.at("plan_fingerprint").get<std::uint64_t>();
    m.epoch = header.at("epoch").get<std::uint64_t>();
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw CorruptFile("negative tensor shape");
      const std::size_t n = static_cast<std::size_t>(rows * cols) * sizeof(double);
      if (n > body - pos) throw CorruptFile("tensor data overruns file");
      Matrix value(rows, cols);
      std::memcpy(value.data(), bytes.data() + pos, n);
      pos += n;
      Parameter& p = m.add(t.at("name").get<std::string>(), std::move(value), t.at("decay").get<bool>(),
                           t.at("encoder_layer").get<int>());
      p.frozen = t.at("frozen").get<bool>();
      p.encoder_embedding = t.at("encoder_embedding").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("checkpoint header: ") + e.what());
  }
  if (pos != body) throw CorruptFile("trailing bytes after tensors");
  return m;
}

void save_checkpoint(const Seq2SeqModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Seq2SeqModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace apiseq::seq2seq
