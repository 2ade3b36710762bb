#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "ciq/embed.hpp"

namespace ciq {

namespace {

std::string render_shortest(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void write_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw Error("binary model: truncated stream");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw Error("binary model: truncated stream");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

float read_f32(std::istream& in) {
  std::uint32_t bits = read_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

void save_text_vectors(const EmbeddingModel& model, std::ostream& out) {
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  for (std::size_t i = 0; i < model.vocab_size(); ++i) {
    out << model.token(i);
    for (double x : model.input(i)) out << ' ' << render_shortest(x);
    out << '\n';
  }
}

EmbeddingModel load_text_vectors(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw Error("text vectors: missing header line");
  std::istringstream hs(header);
  long long vocabSize = -1, dim = -1;
  if (!(hs >> vocabSize >> dim) || vocabSize < 0 || dim < 1)
    throw Error("text vectors: malformed header \"" + header + "\"");
  std::string extra;
  if (hs >> extra) throw Error("text vectors: malformed header");

  EmbeddingModel model(static_cast<int>(dim));
  std::string line;
  long long seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    if (model.contains(token))
      throw Error("text vectors: duplicate token \"" + token + "\"");
    std::size_t idx = model.add_token(token);
    auto v = model.input(idx);
    for (long long d = 0; d < dim; ++d) {
      if (!(ls >> v[static_cast<std::size_t>(d)]))
        throw Error("text vectors: token \"" + token + "\" has fewer than " +
                    std::to_string(dim) + " coordinates");
    }
    double junk;
    if (ls >> junk)
      throw Error("text vectors: token \"" + token + "\" has more than " +
                  std::to_string(dim) + " coordinates");
    ++seen;
  }
  if (seen != vocabSize)
    throw Error("text vectors: header declares " + std::to_string(vocabSize) +
                " tokens, found " + std::to_string(seen));
  return model;
}

void save_binary_model(const EmbeddingModel& model, std::ostream& out) {
  out.write("CIV1", 4);
  write_u32(out, static_cast<std::uint32_t>(model.vocab_size()));
  write_u32(out, static_cast<std::uint32_t>(model.dim()));
  for (std::size_t i = 0; i < model.vocab_size(); ++i) {
    const std::string& tok = model.token(i);
    if (tok.size() > 0xffff) throw Error("binary model: token too long");
    write_u16(out, static_cast<std::uint16_t>(tok.size()));
    out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
    for (double x : model.input(i)) write_f32(out, static_cast<float>(x));
    for (double x : model.output(i)) write_f32(out, static_cast<float>(x));
  }
}

EmbeddingModel load_binary_model(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CIV1", 4) != 0)
    throw Error("binary model: bad magic (expected CIV1)");
  std::uint32_t vocabSize = read_u32(in);
  std::uint32_t dim = read_u32(in);
  if (dim == 0) throw Error("binary model: zero dimension");
  EmbeddingModel model(static_cast<int>(dim));
  std::string tok;
  for (std::uint32_t i = 0; i < vocabSize; ++i) {
    std::uint16_t len = read_u16(in);
    tok.resize(len);
    in.read(tok.data(), len);
    if (!in) throw Error("binary model: truncated stream");
    std::size_t idx = model.add_token(tok);
    for (auto& x : model.input(idx)) x = read_f32(in);
    for (auto& x : model.output(idx)) x = read_f32(in);
  }
  return model;
}

}  // namespace ciq
