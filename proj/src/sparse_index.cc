#include "ear/sparse_index.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <queue>
#include <stdexcept>
#include <thread>

namespace ear {

void Bm25Params::validate() const {
  if (!(k1 > 0.0)) throw std::invalid_argument("BM25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("BM25 b must lie in [0, 1]");
}

Index Index::build(const PassageStore& store, const Bm25Params& params) {
  params.validate();
  if (store.empty()) throw std::invalid_argument("cannot build an index over an empty store");

  std::vector<size_t> order(store.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return store.at(a).id < store.at(b).id; });

  Index index;
  index.params_ = params;
  index.pids_.reserve(order.size());
  index.doc_lengths_.reserve(order.size());

  std::map<std::string, std::vector<Posting>> postings;
  for (uint32_t doc = 0; doc < order.size(); ++doc) {
    const Passage& p = store.at(order[doc]);
    std::vector<std::string> terms;
    if (params.index_titles && !p.title.empty()) {
      terms = analyze(p.title, params.analyzer);
      auto body = analyze_tokens(store.tokens(order[doc]), params.analyzer);
      terms.insert(terms.end(), body.begin(), body.end());
    } else {
      terms = analyze_tokens(store.tokens(order[doc]), params.analyzer);
    }
    index.pids_.push_back(p.id);
    index.doc_lengths_.push_back(static_cast<uint32_t>(terms.size()));

    std::sort(terms.begin(), terms.end());
    for (size_t i = 0; i < terms.size();) {
      size_t j = i;
      while (j < terms.size() && terms[j] == terms[i]) ++j;
      postings[terms[i]].push_back({doc, static_cast<uint32_t>(j - i)});
      i = j;
    }
  }

  index.terms_.reserve(postings.size());
  index.offsets_.reserve(postings.size() + 1);
  index.offsets_.push_back(0);
  for (auto& [term, list] : postings) {
    index.terms_.push_back(term);
    index.postings_.insert(index.postings_.end(), list.begin(), list.end());
    index.offsets_.push_back(index.postings_.size());
  }
  index.finalize();
  return index;
}

void Index::finalize() {
  double total = 0.0;
  for (uint32_t len : doc_lengths_) total += len;
  avg_doc_length_ = pids_.empty() ? 0.0 : total / static_cast<double>(pids_.size());

  term_ids_.clear();
  term_ids_.reserve(terms_.size());
  for (uint32_t t = 0; t < terms_.size(); ++t) term_ids_.emplace(terms_[t], t);
  doc_ids_.clear();
  doc_ids_.reserve(pids_.size());
  for (uint32_t d = 0; d < pids_.size(); ++d) doc_ids_.emplace(pids_[d], d);

  length_norm_.resize(pids_.size());
  for (size_t d = 0; d < pids_.size(); ++d) {
    const double ratio = avg_doc_length_ > 0.0 ? doc_lengths_[d] / avg_doc_length_ : 0.0;
    length_norm_[d] = params_.k1 * (1.0 - params_.b + params_.b * ratio);
  }
}

std::optional<uint32_t> Index::doc_of(std::string_view pid) const {
  auto it = doc_ids_.find(std::string(pid));
  if (it == doc_ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const Posting> Index::postings(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return {};
  return std::span<const Posting>(postings_).subspan(offsets_[it->second],
                                                     offsets_[it->second + 1] - offsets_[it->second]);
}

double Index::idf(std::string_view term) const {
  size_t n = df(term);
  if (n == 0) return 0.0;
  return bm25_idf(static_cast<double>(doc_count()), static_cast<double>(n));
}

std::vector<std::string> Index::analyze_query(std::string_view text) const {
  return analyze(text, params_.analyzer);
}

double Index::bm25_score(const NormalizedText& query, std::string_view pid) const {
  auto doc = doc_of(pid);
  if (!doc) throw std::out_of_range("unknown passage id " + std::string(pid));
  double score = 0.0;
  for (const auto& term : analyze_tokens(query.tokens, params_.analyzer)) {
    auto list = postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), *doc,
                               [](const Posting& p, uint32_t d) { return p.doc < d; });
    if (it == list.end() || it->doc != *doc) continue;
    const double w = bm25_idf(static_cast<double>(doc_count()), static_cast<double>(list.size()));
    score += w * it->tf * (params_.k1 + 1.0) / (it->tf + length_norm_[*doc]);
  }
  return round_score(score);
}

namespace {

struct Candidate {
  double score;
  uint32_t doc;
};

// Heap order: the worst candidate (lowest score, then highest doc) on top.
struct WorseOnTop {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.score != b.score) return a.score > b.score;
    return a.doc < b.doc;
  }
};

}  // namespace

RankedList Index::search_terms(std::span<const std::string> analyzed_terms, size_t k,
                               std::string qid) const {
  if (k == 0) throw std::invalid_argument("search depth k must be at least 1");
  RankedList out;
  out.qid = std::move(qid);
  out.tag = "bm25";

  std::vector<double> acc(doc_count(), 0.0);
  std::vector<uint32_t> touched;
  const double n = static_cast<double>(doc_count());
  for (const auto& term : analyzed_terms) {
    auto list = postings(term);
    if (list.empty()) continue;
    const double w = bm25_idf(n, static_cast<double>(list.size()));
    for (const Posting& p : list) {
      if (acc[p.doc] == 0.0) touched.push_back(p.doc);
      acc[p.doc] += w * p.tf * (params_.k1 + 1.0) / (p.tf + length_norm_[p.doc]);
    }
  }

  std::priority_queue<Candidate, std::vector<Candidate>, WorseOnTop> heap;
  for (uint32_t doc : touched) {
    Candidate c{round_score(acc[doc]), doc};
    if (!(c.score > 0.0)) continue;
    if (heap.size() < k) {
      heap.push(c);
    } else if (WorseOnTop()(c, heap.top())) {
      heap.pop();
      heap.push(c);
    }
  }
  out.entries.resize(heap.size());
  for (size_t i = heap.size(); i-- > 0;) {
    out.entries[i] = {pids_[heap.top().doc], heap.top().score};
    heap.pop();
  }
  return out;
}

RankedList Index::search(std::string_view query_text, size_t k, std::string qid) const {
  auto terms = analyze_query(query_text);
  return search_terms(terms, k, std::move(qid));
}

std::vector<RankedList> Index::batch_search(std::span<const std::string> queries, size_t k,
                                            unsigned workers) const {
  if (k == 0) throw std::invalid_argument("search depth k must be at least 1");
  std::vector<RankedList> out(queries.size());
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(queries.size())));
  if (workers <= 1) {
    for (size_t i = 0; i < queries.size(); ++i) out[i] = search(queries[i], k);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < queries.size(); i += workers) out[i] = search(queries[i], k);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

// On-disk layout, all integers little-endian:
//   "EARBM25\0" u32 version
//   f64 k1, f64 b, u8 stemming, u8 stopwords, u8 index_titles
//   u32 docs, then per doc: str pid, u32 length
//   u32 terms, then per term: str term, u32 n, n x (u32 doc, u32 tf)
// where str is u32 byte length followed by the bytes.
namespace {

constexpr char kMagic[8] = {'E', 'A', 'R', 'B', 'M', '2', '5', '\0'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out_.put(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}
  uint8_t u8() {
    char c;
    need(static_cast<bool>(in_.get(c)));
    return static_cast<uint8_t>(c);
  }
  uint32_t u32() {
    unsigned char b[4];
    need(static_cast<bool>(in_.read(reinterpret_cast<char*>(b), 4)));
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
  }
  double f64() {
    unsigned char b[8];
    need(static_cast<bool>(in_.read(reinterpret_cast<char*>(b), 8)));
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = bits << 8 | b[i];
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    std::string s(u32(), '\0');
    need(static_cast<bool>(in_.read(s.data(), static_cast<std::streamsize>(s.size()))));
    return s;
  }

 private:
  void need(bool ok) {
    if (!ok) throw InputError(path_ + ": truncated index file");
  }
  std::istream& in_;
  std::string path_;
};

}  // namespace

void Index::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.f64(params_.k1);
  w.f64(params_.b);
  w.u8(params_.analyzer.stemming);
  w.u8(params_.analyzer.stopwords);
  w.u8(params_.index_titles);
  w.u32(static_cast<uint32_t>(pids_.size()));
  for (size_t d = 0; d < pids_.size(); ++d) {
    w.str(pids_[d]);
    w.u32(doc_lengths_[d]);
  }
  w.u32(static_cast<uint32_t>(terms_.size()));
  for (size_t t = 0; t < terms_.size(); ++t) {
    w.str(terms_[t]);
    w.u32(static_cast<uint32_t>(offsets_[t + 1] - offsets_[t]));
    for (uint64_t i = offsets_[t]; i < offsets_[t + 1]; ++i) {
      w.u32(postings_[i].doc);
      w.u32(postings_[i].tf);
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

Index Index::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw InputError(path + ": not an index file");
  Reader r(in, path);
  uint32_t version = r.u32();
  if (version != kVersion)
    throw InputError(path + ": unsupported index version " + std::to_string(version));

  Index index;
  index.params_.k1 = r.f64();
  index.params_.b = r.f64();
  index.params_.analyzer.stemming = r.u8() != 0;
  index.params_.analyzer.stopwords = r.u8() != 0;
  index.params_.index_titles = r.u8() != 0;
  index.params_.validate();

  uint32_t docs = r.u32();
  index.pids_.reserve(docs);
  index.doc_lengths_.reserve(docs);
  for (uint32_t d = 0; d < docs; ++d) {
    index.pids_.push_back(r.str());
    index.doc_lengths_.push_back(r.u32());
  }
  uint32_t terms = r.u32();
  index.terms_.reserve(terms);
  index.offsets_.push_back(0);
  for (uint32_t t = 0; t < terms; ++t) {
    index.terms_.push_back(r.str());
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
      Posting p{r.u32(), 0};
      p.tf = r.u32();
      if (p.doc >= docs) throw InputError(path + ": posting references a missing document");
      index.postings_.push_back(p);
    }
    index.offsets_.push_back(index.postings_.size());
  }
  index.finalize();
  return index;
}

}  // namespace ear
