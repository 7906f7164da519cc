#include "xlsent/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "xlsent/errors.hpp"

namespace xlsent {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'X', 'L', 'S', 'C', 'K', 'P', 'T', '1'};

void write_u32_le(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

void write_f64_le(std::ostream& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

double read_f64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParameters& params,
                     const std::optional<Vocabulary>& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint \"" + path + "\"");

  json header;
  header["config"] = json::parse(params.config.to_json());
  json tensors = json::array();
  params.for_each_tensor([&](const std::string& name, const Matrix& m) {
    tensors.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  header["tensors"] = tensors;
  if (vocab) {
    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(vocab->size()));
    for (int id = 0; id < vocab->size(); ++id) tokens.push_back(vocab->token_of(id));
    header["vocab"] = tokens;
  }
  const std::string header_text = header.dump();

  out.write(kMagic, sizeof(kMagic));
  write_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  params.for_each_tensor([&](const std::string&, const Matrix& m) {
    for (double v : m.data()) write_f64_le(out, v);
  });
  if (!out) throw DataError("write failure on checkpoint \"" + path + "\"");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint \"" + path + "\"");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint \"" + path + "\": bad magic (not a checkpoint or unsupported version)");
  }
  const std::uint32_t header_len = read_u32_le(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (!in) throw DataError("checkpoint \"" + path + "\": truncated header");

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint header: malformed JSON: ") + e.what());
  }

  Checkpoint ckpt;
  const EncoderConfig config = EncoderConfig::from_json(header.at("config").dump());
  ckpt.params = init_parameters(config);  // establishes shapes; data overwritten below

  std::size_t idx = 0;
  const json& tensors = header.at("tensors");
  ckpt.params.for_each_tensor([&](const std::string& name, Matrix& m) {
    if (idx >= tensors.size()) throw DataError("checkpoint: missing tensor " + name);
    const json& entry = tensors[idx++];
    if (entry.at("name").get<std::string>() != name || entry.at("rows").get<std::size_t>() != m.rows() ||
        entry.at("cols").get<std::size_t>() != m.cols()) {
      throw DataError("checkpoint: tensor directory mismatch at " + name);
    }
    for (double& v : m.data()) v = read_f64_le(in);
  });
  if (idx != tensors.size()) throw DataError("checkpoint: extra tensors in directory");
  if (!in) throw DataError("checkpoint \"" + path + "\": truncated tensor data");

  if (header.contains("vocab")) {
    ckpt.vocab = Vocabulary::from_tokens(header.at("vocab").get<std::vector<std::string>>());
  }
  return ckpt;
}

}  // namespace xlsent
