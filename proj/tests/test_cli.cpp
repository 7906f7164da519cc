#include <doctest.h>

#include "testutil.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "xlsent/corpus.hpp"
#include "xlsent/synth.hpp"

using namespace xlsent;
namespace fs = std::filesystem;

namespace {

const std::string kCli = XLSENT_CLI_PATH;

int run(const std::string& args) {
  const std::string command = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("xlsent_cli_" + std::to_string(std::rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("synth + ingest + stats + split round-trip deterministically") {
  TempDir dir;
  const std::string a = dir / "a.jsonl";
  const std::string b = dir / "b.jsonl";
  REQUIRE(run("synth --out-a " + a + " --out-b " + b +
              " --train-docs 40 --target-docs 20 --seed 5") == 0);

  // rerunning synth reproduces the corpora byte-identically
  const std::string a2 = dir / "a2.jsonl";
  const std::string b2 = dir / "b2.jsonl";
  REQUIRE(run("synth --out-a " + a2 + " --out-b " + b2 +
              " --train-docs 40 --target-docs 20 --seed 5") == 0);
  CHECK(read_file(a) == read_file(a2));
  CHECK(read_file(b) == read_file(b2));

  REQUIRE(run("ingest --in " + a + " --out " + (dir / "canon.jsonl") + " --language aa") == 0);
  CHECK(read_file(a) == read_file(dir / "canon.jsonl"));

  REQUIRE(run("stats --corpus " + a + " --out " + (dir / "stats.csv")) == 0);
  const std::string stats = read_file(dir / "stats.csv");
  CHECK(stats.rfind("language,# Doc.,", 0) == 0);
  CHECK(stats.find("aa,40,") != std::string::npos);

  REQUIRE(run("split --corpus " + a + " --k 5 --seed 3 --out-dir " + (dir / "folds")) == 0);
  REQUIRE(run("split --corpus " + a + " --k 5 --seed 3 --out-dir " + (dir / "folds2")) == 0);
  for (int f = 0; f < 5; ++f) {
    const std::string name = "fold_" + std::to_string(f) + ".json";
    CHECK(read_file(dir.path / "folds" / name) == read_file(dir.path / "folds2" / name));
  }
  const FoldPlan plan = FoldPlan::from_json(read_file(dir.path / "folds" / "fold_0.json"));
  CHECK(plan.test_ids.size() == 8);
}

TEST_CASE("exit codes: usage, data error, success") {
  TempDir dir;
  CHECK(run("no-such-subcommand") == 1);
  CHECK(run("split --corpus " + (dir / "missing.jsonl")) == 2);
  CHECK(run("correlate --x 1,2,3 --y 1,2,3 --method bogus") == 2);
  // constant input is a numerical failure
  CHECK(run("correlate --x 1,1,1 --y 1,2,3") == 3);
  CHECK(run("--help") == 0);
}

TEST_CASE("correlate reproduces the frozen reference value") {
  TempDir dir;
  const std::string out = dir / "corr.csv";
  REQUIRE(run("correlate --x 0.30,0.47,0.51,0.75,0.83 --y 70.75,63.12,66.92,64.39,57.32 --out " + out) ==
          0);
  CHECK(read_file(out) == "pearson,-0.836092\n");
}

TEST_CASE("icl subcommand with gold-echo stub") {
  TempDir dir;
  const std::string a = dir / "a.jsonl";
  const std::string b = dir / "b.jsonl";
  REQUIRE(run("synth --out-a " + a + " --out-b " + b +
              " --train-docs 40 --target-docs 24 --seed 6") == 0);
  const std::string out = dir / "icl.csv";
  REQUIRE(run("icl --target " + b + " --pool " + a + " --shots 1 --folds 4 --gold-echo --out " + out) == 0);
  const std::string csv = read_file(out);
  CHECK(csv.find("icl-1shot,no,bb,100.00,0.00") != std::string::npos);
}

TEST_CASE("shift subcommand produces the documented columns") {
  TempDir dir;
  {
    std::ofstream src(dir / "src.csv");
    src << "doc_id,topic_id\n";
    for (int i = 0; i < 60; ++i) src << "s" << i << ',' << (i % 3) << '\n';
    std::ofstream tgt(dir / "tgt.csv");
    tgt << "doc_id,topic_id\n";
    for (int i = 0; i < 30; ++i) tgt << "t" << i << ',' << (i % 2) << '\n';
  }
  const std::string out = dir / "shift.csv";
  REQUIRE(run("shift --source sl=" + (dir / "src.csv") + " --targets xx=" + (dir / "tgt.csv") +
              " --seed 4 --out " + out) == 0);
  const std::string csv = read_file(out);
  CHECK(csv.rfind("Source,Target Language,Chi2 Statistic,p-value", 0) == 0);
  CHECK(csv.find("sl,xx,") != std::string::npos);

  // deterministic rerun
  const std::string out2 = dir / "shift2.csv";
  REQUIRE(run("shift --source sl=" + (dir / "src.csv") + " --targets xx=" + (dir / "tgt.csv") +
              " --seed 4 --out " + out2) == 0);
  CHECK(read_file(out) == read_file(out2));
}

TEST_CASE("otdd subcommand on embedding files") {
  TempDir dir;
  // two tiny labeled embedding sets
  {
    std::ofstream vec(dir / "src.emb");
    vec << "6 2\n";
    for (int i = 0; i < 6; ++i) vec << (i * 0.5) << ' ' << (i % 2) << '\n';
    std::ofstream lab(dir / "src.labels");
    for (int i = 0; i < 6; ++i) lab << (i % 2 == 0 ? "negative" : "positive") << '\n';
    std::ofstream vec2(dir / "tgt.emb");
    vec2 << "6 2\n";
    for (int i = 0; i < 6; ++i) vec2 << (i * 0.5 + 1.0) << ' ' << (i % 2) << '\n';
    std::ofstream lab2(dir / "tgt.labels");
    for (int i = 0; i < 6; ++i) lab2 << (i % 2 == 0 ? "negative" : "positive") << '\n';
  }
  const std::string out = dir / "otdd.csv";
  REQUIRE(run("otdd --source " + (dir / "src.emb") + " --targets " + (dir / "tgt.emb") + "," +
              (dir / "src.emb") + " --solver exact --max-points 10 --out " + out) == 0);
  const std::string csv = read_file(out);
  CHECK(csv.rfind("source,target,raw,normalized", 0) == 0);
  CHECK(csv.find("src,src,0.000000,0.000000") != std::string::npos);  // self-distance 0
  CHECK(csv.find("src,tgt,") != std::string::npos);
}

TEST_CASE("report subcommand merges eval CSVs") {
  TempDir dir;
  {
    std::ofstream csv(dir / "eval1.csv");
    csv << "regime,translation,language,mean_f1,std_f1,fold_0,fold_1\n";
    csv << "base,no,sr,70.00,1.00,69.00,71.00\n";
    csv << "base,no,mk,60.00,2.00,58.00,62.00\n";
    std::ofstream csv2(dir / "eval2.csv");
    csv2 << "regime,translation,language,mean_f1,std_f1,fold_0,fold_1\n";
    csv2 << "poa,no,sr,75.00,1.50,73.50,76.50\n";
    csv2 << "poa,no,mk,65.00,2.50,62.50,67.50\n";
  }
  const std::string table = dir / "table.csv";
  const std::string plot = dir / "plot.csv";
  REQUIRE(run("report --inputs " + (dir / "eval1.csv") + "," + (dir / "eval2.csv") + " --out-table " +
              table + " --out-plot " + plot) == 0);
  const std::string table_text = read_file(table);
  CHECK(table_text.find("method,translation,sr,mk") != std::string::npos);
  CHECK(table_text.find("base,No,70.00 ± 1.00,60.00 ± 2.00") != std::string::npos);
  const std::string plot_text = read_file(plot);
  CHECK(plot_text.rfind("language,method,mean,std", 0) == 0);
  // one plot row per (regime x translation) x language
  CHECK(std::count(plot_text.begin(), plot_text.end(), '\n') == 5);
}
