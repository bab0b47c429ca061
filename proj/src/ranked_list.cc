#include "ear/ranked_list.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "ear/corpus.h"

namespace ear {

void RankedList::validate() const {
  std::unordered_set<std::string_view> seen;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && entries[i].score > entries[i - 1].score)
      throw std::logic_error("ranked list " + qid + ": score increases at rank " + std::to_string(i + 1));
    if (!seen.insert(entries[i].pid).second)
      throw std::logic_error("ranked list " + qid + ": duplicate passage " + entries[i].pid);
  }
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_run(const Run& run) {
  std::string out;
  for (const auto& [qid, list] : run) {
    const std::string tag = list.tag.empty() ? "ear" : list.tag;
    for (size_t i = 0; i < list.entries.size(); ++i) {
      const auto& e = list.entries[i];
      out += qid;
      out += " Q0 ";
      out += e.pid;
      out += ' ';
      out += std::to_string(i + 1);
      out += ' ';
      out += format_double(e.score);
      out += ' ';
      out += tag;
      out += '\n';
    }
  }
  return out;
}

void write_run(const std::string& path, const Run& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << format_run(run);
}

Run read_run(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  Run run;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string qid, q0, pid, rank_s, score_s, tag;
    if (!(fields >> qid >> q0 >> pid >> rank_s >> score_s >> tag))
      throw InputError(path + ": line " + std::to_string(lineno) + " does not have 6 fields", lineno);
    long rank = 0;
    double score = 0;
    auto r1 = std::from_chars(rank_s.data(), rank_s.data() + rank_s.size(), rank);
    auto r2 = std::from_chars(score_s.data(), score_s.data() + score_s.size(), score);
    if (r1.ec != std::errc() || r1.ptr != rank_s.data() + rank_s.size() || r2.ec != std::errc() ||
        r2.ptr != score_s.data() + score_s.size())
      throw InputError(path + ": line " + std::to_string(lineno) + " has a malformed rank or score", lineno);
    auto& list = run[qid];
    if (list.entries.empty()) {
      list.qid = qid;
      list.tag = tag;
    }
    if (rank != static_cast<long>(list.entries.size()) + 1)
      throw InputError(path + ": line " + std::to_string(lineno) + ": rank " + rank_s + " for " + qid +
                           " is not contiguous (expected " + std::to_string(list.entries.size() + 1) + ")",
                       lineno);
    list.entries.push_back({pid, score});
  }
  return run;
}

}  // namespace ear
