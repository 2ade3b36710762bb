#include "ciq/vecstore.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ciq/kernels.hpp"

namespace ciq {

const std::set<std::string>& default_stoplist() {
  static const std::set<std::string> list = {
      "on", "up",  "down", "a",  "the", "their", "its", "if", "his",
      "her", "and", "or",  "not", "of",  "in",   "for", "using"};
  return list;
}

VectorStore VectorStore::from_model(const EmbeddingModel& model,
                                    std::string sourceTag) {
  VectorStore store(model.dim());
  store.sourceTag_ = std::move(sourceTag);
  for (std::size_t i = 0; i < model.vocab_size(); ++i)
    store.put(model.token(i), model.input(i));
  return store;
}

void VectorStore::put(const std::string& token, std::span<const double> vector) {
  if (dim_ == 0) dim_ = static_cast<int>(vector.size());
  if (static_cast<int>(vector.size()) != dim_)
    throw Error("vector store: dimension mismatch for token \"" + token + "\"");
  auto it = index_.find(token);
  if (it != index_.end()) {
    std::copy(vector.begin(), vector.end(),
              data_.begin() + static_cast<long>(it->second) * dim_);
    return;
  }
  index_[token] = tokens_.size();
  tokens_.push_back(token);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::span<const double>> VectorStore::get(
    const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(data_.data() + it->second * dim_,
                                 static_cast<std::size_t>(dim_));
}

std::vector<Neighbor> VectorStore::nearest_k(
    std::span<const double> probe, std::size_t k,
    const std::set<std::string>& exclude) const {
  if (static_cast<int>(probe.size()) != dim_)
    throw Error("nearest_k: probe dimension mismatch");
  double probeNorm = std::sqrt(kernels::norm_sq(probe));
  if (!(probeNorm > 0)) throw Error("nearest_k: zero-norm probe");
  std::vector<Neighbor> all;
  all.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const std::string& tok = tokens_[i];
    if (stoplist_.count(tok) || exclude.count(tok)) continue;
    std::span<const double> v(data_.data() + i * dim_,
                              static_cast<std::size_t>(dim_));
    double norm = std::sqrt(kernels::norm_sq(v));
    if (!(norm > 0)) continue;
    double cosv = kernels::dot(probe, v) / (probeNorm * norm);
    all.push_back(Neighbor{tok, std::clamp(cosv, -1.0, 1.0)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_token(std::ostream& out, const std::string& tok) {
  unsigned char b[2] = {static_cast<unsigned char>(tok.size() & 0xff),
                        static_cast<unsigned char>((tok.size() >> 8) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 2);
  out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw Error("vector store: truncated stream");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string read_token(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw Error("vector store: truncated stream");
  std::size_t len = static_cast<std::size_t>(b[0] | (b[1] << 8));
  std::string tok(len, '\0');
  in.read(tok.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error("vector store: truncated stream");
  return tok;
}

}  // namespace

void VectorStore::save(std::ostream& out) const {
  out.write("CIS1", 4);
  write_u32(out, static_cast<std::uint32_t>(tokens_.size()));
  write_u32(out, static_cast<std::uint32_t>(dim_));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    write_token(out, tokens_[i]);
    for (int d = 0; d < dim_; ++d) {
      float f = static_cast<float>(data_[i * dim_ + d]);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      write_u32(out, bits);
    }
  }
  write_u32(out, static_cast<std::uint32_t>(stoplist_.size()));
  for (const auto& t : stoplist_) write_token(out, t);
  write_u32(out, static_cast<std::uint32_t>(sourceTag_.size()));
  out.write(sourceTag_.data(), static_cast<std::streamsize>(sourceTag_.size()));
}

void VectorStore::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write vector store: " + path);
  save(os);
}

VectorStore VectorStore::load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CIS1", 4) != 0)
    throw Error("vector store: bad magic (expected CIS1)");
  std::uint32_t count = read_u32(in);
  std::uint32_t dim = read_u32(in);
  VectorStore store(static_cast<int>(dim));
  std::vector<double> v(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string tok = read_token(in);
    for (std::uint32_t d = 0; d < dim; ++d) {
      std::uint32_t bits = read_u32(in);
      float f;
      std::memcpy(&f, &bits, 4);
      v[d] = f;
    }
    store.put(tok, v);
  }
  std::set<std::string> stoplist;
  std::uint32_t nStop = read_u32(in);
  for (std::uint32_t i = 0; i < nStop; ++i) stoplist.insert(read_token(in));
  store.set_stoplist(std::move(stoplist));
  std::uint32_t tagLen = read_u32(in);
  std::string tag(tagLen, '\0');
  in.read(tag.data(), static_cast<std::streamsize>(tagLen));
  if (!in) throw Error("vector store: truncated stream");
  store.sourceTag_ = std::move(tag);
  return store;
}

VectorStore VectorStore::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read vector store: " + path);
  return load(is);
}

}  // namespace ciq
