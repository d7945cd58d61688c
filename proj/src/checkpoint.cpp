#include "eadgen/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "eadgen/errors.hpp"

namespace eadgen {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'E', 'A', 'D', 'G'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw DataError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

std::string get_bytes(std::istream& in, std::size_t n) {
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw DataError("checkpoint: truncated file");
  return s;
}

json vocab_to_json(const Vocab& v) { return json(v.tokens); }

Vocab vocab_from_json(const json& j) {
  Vocab v;
  for (const auto& tok : j) v.add(tok.get<std::string>());
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const GeneratorModel& model,
                     const std::string& config_echo) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open for writing: " + path);

  json header;
  header["seed"] = model.params.rng_seed;
  header["model"] = {{"embed_dim", model.cfg.embed_dim},
                     {"act_dim", model.cfg.act_dim},
                     {"hidden_dim", model.cfg.hidden_dim},
                     {"refiner", refiner_name(model.cfg.refiner)},
                     {"init_range", model.cfg.init_range},
                     {"max_len", model.cfg.max_len}};
  header["vocabs"] = {{"words", vocab_to_json(model.vocabs.words)},
                      {"slots", vocab_to_json(model.vocabs.slots)},
                      {"values", vocab_to_json(model.vocabs.values)},
                      {"acts", vocab_to_json(model.vocabs.acts)}};
  header["config_echo"] = config_echo;
  const std::string header_text = header.dump();

  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

  put_u64(out, model.params.count());
  for (const Param& p : model.params.all()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(out, static_cast<std::uint32_t>(p.value.shape.size()));
    for (std::size_t dim : p.value.shape) put_u64(out, dim);
    for (double v : p.value.data) put_f64(out, v);
  }
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw DataError("checkpoint: unsupported format version " +
                    std::to_string(version));
  }

  const std::uint64_t header_len = get_u64(in);
  json header;
  try {
    header = json::parse(get_bytes(in, header_len));
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: bad header JSON: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.config_echo = header.value("config_echo", std::string());

    ModelConfig cfg;
    const json& m = header.at("model");
    cfg.embed_dim = m.at("embed_dim").get<std::size_t>();
    cfg.act_dim = m.at("act_dim").get<std::size_t>();
    cfg.hidden_dim = m.at("hidden_dim").get<std::size_t>();
    cfg.refiner = refiner_from_name(m.at("refiner").get<std::string>());
    cfg.init_range = m.at("init_range").get<double>();
    cfg.max_len = m.at("max_len").get<std::size_t>();

    const json& v = header.at("vocabs");
    CorpusVocabs vocabs;
    vocabs.words = vocab_from_json(v.at("words"));
    vocabs.slots = vocab_from_json(v.at("slots"));
    vocabs.values = vocab_from_json(v.at("values"));
    vocabs.acts = vocab_from_json(v.at("acts"));

    ckpt.model = std::make_unique<GeneratorModel>(cfg, std::move(vocabs),
                                                  ckpt.seed, /*zero_init=*/true);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: incomplete header: ") + e.what());
  }

  const std::uint64_t count = get_u64(in);
  if (count != ckpt.model->params.count()) {
    throw DataError("checkpoint: expected " +
                    std::to_string(ckpt.model->params.count()) +
                    " parameters, file has " + std::to_string(count));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(in);
    const std::string name = get_bytes(in, name_len);
    if (!ckpt.model->params.has(name)) {
      throw DataError("checkpoint: unexpected parameter " + name);
    }
    Param& p = ckpt.model->params.at(name);
    const std::uint32_t rank = get_u32(in);
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<std::size_t>(get_u64(in));
    }
    if (shape != p.value.shape) {
      throw DataError("checkpoint: shape mismatch for " + name);
    }
    for (double& v : p.value.data) v = get_f64(in);
  }
  return ckpt;
}

}  // namespace eadgen
