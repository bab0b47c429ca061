#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "support.h"

using testing::TempDir;
using testing::read_text;
using testing::write_text;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run_ear(const TempDir& dir, const std::string& args) {
  const std::string out = dir.file("stdout.txt");
  const std::string err = dir.file("stderr.txt");
  const std::string cmd = std::string(EAR_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out);
  r.err = read_text(err);
  return r;
}

// eval --format csv → {run: {k: accuracy}}
std::map<std::string, std::map<size_t, double>> parse_csv(const std::string& csv) {
  std::map<std::string, std::map<size_t, double>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    out[line.substr(0, a)][std::stoul(line.substr(a + 1, b - a - 1))] = std::stod(line.substr(b + 1));
  }
  return out;
}

const std::string kCorpus =
    "{\"id\":\"a\",\"title\":\"\",\"text\":\"the red river bank\"}\n"
    "{\"id\":\"b\",\"title\":\"\",\"text\":\"an old stone bridge\"}\n"
    "{\"id\":\"c\",\"title\":\"\",\"text\":\"gold ships of the north\"}\n";

const std::string kQuestions =
    "{\"qid\":\"q1\",\"question\":\"which river?\",\"answers\":[\"red river\"]}\n"
    "{\"qid\":\"q2\",\"question\":\"what bridge?\",\"answers\":[\"stone bridge\"]}\n"
    "{\"qid\":\"q3\",\"question\":\"whose ships?\",\"answers\":[\"north\"]}\n";

}  // namespace

TEST_CASE("help exits 0 and lists defaults") {
  TempDir dir("cli-help");
  auto top = run_ear(dir, "--help");
  CHECK(top.code == 0);
  CHECK(top.out.find("make-train") != std::string::npos);
  auto sub = run_ear(dir, "make-train --help");
  CHECK(sub.code == 0);
  CHECK(sub.out.find("--n-samples UINT [50]") != std::string::npos);
  CHECK(sub.out.find("--max-rank INT [101]") != std::string::npos);
  CHECK(sub.out.find("--workers UINT [1]") != std::string::npos);
  auto r = run_ear(dir, "retrieve --help");
  CHECK(r.code == 0);
  CHECK(r.out.find("--k UINT [100]") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  TempDir dir("cli-usage");
  CHECK(run_ear(dir, "").code == 2);
  CHECK(run_ear(dir, "no-such-command").code == 2);
  CHECK(run_ear(dir, "index --corpus x.jsonl").code == 2);  // --out missing
  CHECK(run_ear(dir, "index --corpus x.jsonl --out i --bogus").code == 2);

  auto missing = run_ear(dir, "index --corpus " + dir.file("absent.jsonl") + " --out " + dir.file("i.bin"));
  CHECK(missing.code == 2);
  CHECK(missing.err.find(dir.file("absent.jsonl")) != std::string::npos);

  write_text(dir.file("bad.jsonl"), "{\"id\":\"a\"}\n");
  auto bad = run_ear(dir, "index --corpus " + dir.file("bad.jsonl") + " --out " + dir.file("i.bin"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 1") != std::string::npos);
}

TEST_CASE("index, make-train and retrieve validation") {
  TempDir dir("cli-small");
  write_text(dir.file("c.jsonl"), kCorpus);
  write_text(dir.file("q.jsonl"), kQuestions);
  write_text(dir.file("bare.jsonl"), "{\"qid\":\"q1\",\"question\":\"which river?\"}\n");
  write_text(dir.file("e.jsonl"), "{\"qid\":\"q1\",\"text\":\"red\",\"generator_tag\":\"answer\"}\n");
  const std::string c = " --corpus " + dir.file("c.jsonl");
  const std::string i = " --index " + dir.file("i.bin");

  auto built = run_ear(dir, "index" + c + " --out " + dir.file("i.bin"));
  REQUIRE(built.code == 0);
  CHECK(built.out.find("documents   3") != std::string::npos);
  CHECK(built.err.find("k1=0.9") != std::string::npos);  // effective configuration
  const std::string first = read_text(dir.file("i.bin"));
  REQUIRE(run_ear(dir, "index" + c + " --out " + dir.file("i.bin")).code == 0);
  CHECK(read_text(dir.file("i.bin")) == first);

  const std::string mt = "make-train" + i + c + " --questions " + dir.file("q.jsonl") + " --out " + dir.file("t.jsonl");
  CHECK(run_ear(dir, mt + " --folds 5").code == 2);
  CHECK(run_ear(dir, mt + " --folds 3 --k 100 --max-rank 100").code == 2);
  auto ok = run_ear(dir, mt + " --folds 3 --n-samples 4");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("questions   3") != std::string::npos);
  const std::string train = read_text(dir.file("t.jsonl"));
  REQUIRE(run_ear(dir, mt + " --folds 3 --n-samples 4").code == 0);
  CHECK(read_text(dir.file("t.jsonl")) == train);

  const std::string rt = "retrieve" + i + c + " --out " + dir.file("r.run");
  CHECK(run_ear(dir, rt + " --questions " + dir.file("bare.jsonl")).code == 0);
  auto oracle = run_ear(dir, rt + " --questions " + dir.file("bare.jsonl") + " --strategy oracle --expansions " +
                             dir.file("e.jsonl"));
  CHECK(oracle.code == 2);
  CHECK(oracle.err.find("answers") != std::string::npos);
  CHECK(run_ear(dir, rt + " --questions " + dir.file("q.jsonl") + " --strategy greedy").code == 2);  // no expansions
  CHECK(run_ear(dir, rt + " --questions " + dir.file("q.jsonl") + " --strategy ear_rd --expansions " +
                     dir.file("e.jsonl")).code == 2);  // no models
  CHECK(run_ear(dir, rt + " --questions " + dir.file("q.jsonl") + " --strategy nope").code == 2);
  CHECK(run_ear(dir, rt + " --questions " + dir.file("q.jsonl") + " --k 200").code == 2);

  REQUIRE(run_ear(dir, rt + " --questions " + dir.file("q.jsonl") + " --k 3 --max-rank 4").code == 0);
  auto ev = run_ear(dir, "eval --run " + dir.file("r.run") + " --questions " + dir.file("q.jsonl") + c + " --ks 1,3 --format csv");
  REQUIRE(ev.code == 0);
  auto acc = parse_csv(ev.out).at("bm25");
  CHECK(acc.at(1) <= acc.at(3));
  CHECK(acc.at(3) == doctest::Approx(1.0));
  CHECK(run_ear(dir, "eval --run " + dir.file("r.run") + " --questions " + dir.file("q.jsonl") + c + " --ks 0").code == 2);
}

TEST_CASE("planted pipeline: ear_rd beats greedy at top-5") {
  TempDir dir("cli-planted");
  const std::string fx = dir.file("fx");
  REQUIRE(run_ear(dir, "gen-fixture --out " + fx + " --train-questions 120 --test-questions 120 --junk-passages 500").code == 0);
  const std::string c = " --corpus " + fx + "/corpus.jsonl";
  const std::string i = " --index " + dir.file("i.bin");
  REQUIRE(run_ear(dir, "index" + c + " --out " + dir.file("i.bin")).code == 0);
  REQUIRE(run_ear(dir, "make-train" + i + c + " --questions " + fx + "/train.jsonl --expansions " + fx +
                       "/train_expansions.jsonl --out " + dir.file("t.jsonl")).code == 0);
  auto tr = run_ear(dir, "train --variant rd --train " + dir.file("t.jsonl") + i + c + " --out " + dir.file("rd.json"));
  REQUIRE(tr.code == 0);
  CHECK(tr.out.find("model *") != std::string::npos);

  const std::string rt = "retrieve" + i + c + " --questions " + fx + "/test.jsonl --expansions " + fx + "/test_expansions.jsonl";
  REQUIRE(run_ear(dir, rt + " --strategy greedy --out " + dir.file("greedy.run")).code == 0);
  REQUIRE(run_ear(dir, rt + " --strategy ear_rd --models " + dir.file("rd.json") + " --out " + dir.file("rd.run")).code == 0);
  auto ev = run_ear(dir, "eval --run " + dir.file("greedy.run") + " --run " + dir.file("rd.run") + " --questions " + fx +
                         "/test.jsonl" + c + " --format csv");
  REQUIRE(ev.code == 0);
  auto acc = parse_csv(ev.out);
  CHECK(acc.at("ear_rd").at(5) > acc.at("greedy").at(5));
  for (const auto& [run, by_k] : acc) {
    double prev = 0.0;
    for (const auto& [k, a] : by_k) {
      CHECK(a >= prev);
      prev = a;
    }
  }
}
