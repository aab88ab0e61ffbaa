#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include <json.hpp>

#include "support.hpp"

using namespace testing;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run cli(const std::string& args, const TempDir& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(APT_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string tiny_pretrain_flags(const TempDir& dir) {
  return (dir / "a.txt").string() + " " + (dir / "b.txt").string() +
         " --set batch_size=8 --set selection.M=16 --set selection.pool_size=16 --set selection.F=1"
         " --set selection.stop_threshold=0 --set encoder.hidden=8 --set encoder.layers=2 --set encoder.d_emb=4"
         " --set sampler.d_feat=6 --set sampler.max_nodes=8 --set fisher_batches=1 --iterations 3";
}

void write_pool(const TempDir& dir) {
  write_file(dir / "a.txt", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n3 4\n4 5\n5 6\n6 4\n");
  write_file(dir / "b.txt", "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n0 3\n");
}

}  // namespace

TEST_CASE("help lists every config key with its default") {
  TempDir dir("cli");
  const auto r = cli("pretrain --help", dir);
  CHECK(r.code == 0);
  for (const char* key : {"selection.T_s = 3.0", "selection.T_g = 2.0", "selection.F = 6", "sampler.restart_prob = 0.8",
                          "optimizer.lr", "variant = \"apt\"", "lambda = null"})
    CHECK_MESSAGE(r.out.find(key) != std::string::npos, key);
  CHECK(cli("--help", dir).code == 0);
  CHECK(cli("", dir).code == 1);
  CHECK(cli("pretrain --no-such-flag", dir).code == 1);
}

TEST_CASE("props prints one JSON line per graph") {
  TempDir dir("cli");
  write_file(dir / "tri.txt", "0 1\n1 2\n2 0\n");
  write_file(dir / "k4.txt", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
  const auto r = cli("props " + (dir / "tri.txt").string() + " " + (dir / "k4.txt").string(), dir);
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(lines, line))
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].at("entropy").get<double>() == doctest::Approx(std::log(2.0)));
  CHECK(rows[1].at("entropy").get<double>() == doctest::Approx(std::log(3.0)));
  CHECK(rows[1].at("density") == 1.0);
  CHECK(r.err.find("resolved config") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir dir("cli");
  CHECK(cli("props " + (dir / "missing.txt").string(), dir).code == 2);
  CHECK(cli("report --out " + (dir / "rep").string(), dir).code == 1);
  CHECK(cli("pretrain --set selection.bogus=1", dir).code == 1);
  write_pool(dir);
  CHECK(cli("pretrain " + tiny_pretrain_flags(dir) + " --set divergence_limit=0.01 --out " + (dir / "d").string(), dir)
            .code == 3);
  const auto missing = cli("pretrain " + (dir / "nope.txt").string() + " --out " + (dir / "m").string(), dir);
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.txt") != std::string::npos);
}

TEST_CASE("pretrain is reproducible and report counts rows") {
  TempDir dir("cli");
  write_pool(dir);
  const auto a = cli("pretrain " + tiny_pretrain_flags(dir) + " --seed 3 --out " + (dir / "ra").string(), dir);
  REQUIRE(a.code == 0);
  const auto first_log = read_file(dir / "ra" / "runlog.jsonl");
  const auto first_ckpt = read_file(dir / "ra" / "final.ckpt");
  const auto first_manifest = read_file(dir / "ra" / "manifest.json");
  // Same command into the same directory: every artifact is byte-identical.
  const auto b = cli("pretrain " + tiny_pretrain_flags(dir) + " --seed 3 --out " + (dir / "ra").string(), dir);
  REQUIRE(b.code == 0);
  CHECK(read_file(dir / "ra" / "runlog.jsonl") == first_log);
  CHECK(read_file(dir / "ra" / "final.ckpt") == first_ckpt);
  CHECK(read_file(dir / "ra" / "manifest.json") == first_manifest);
  const auto c = cli("pretrain " + tiny_pretrain_flags(dir) + " --seed 4 --out " + (dir / "rc").string(), dir);
  REQUIRE(c.code == 0);
  CHECK(read_file(dir / "rc" / "final.ckpt") != first_ckpt);
  CHECK(std::filesystem::exists(dir / "ra" / "config.resolved.json"));
  CHECK(std::filesystem::exists(dir / "ra" / "checkpoints" / "iter_000000.ckpt"));

  const auto rep = cli("report " + (dir / "ra" / "runlog.jsonl").string() + " --out " + (dir / "rep").string(), dir);
  REQUIRE(rep.code == 0);
  const auto csv = read_file(dir / "rep" / "loss_curves.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);
  const auto sel = read_file(dir / "rep" / "selection_order.csv");
  CHECK(std::count(sel.begin(), sel.end(), '\n') == 1 + 2);
}

TEST_CASE("gen writes named graphs and probe scores a checkpoint") {
  TempDir dir("cli");
  const auto g = cli("gen --n 60 --alpha 2.5 3.0 --seeds 1 --d-max 10 --lcc --out " + (dir / "g").string(), dir);
  REQUIRE(g.code == 0);
  CHECK(std::filesystem::exists(dir / "g" / "pl_n60_a2.5_s1.txt"));
  CHECK(std::filesystem::exists(dir / "g" / "pl_n60_a3_s1.txt"));
  CHECK(std::filesystem::exists(dir / "g" / "manifest.json"));

  write_pool(dir);
  REQUIRE(cli("pretrain " + tiny_pretrain_flags(dir) + " --out " + (dir / "r").string(), dir).code == 0);
  write_file(dir / "labels.txt", "0 x\n1 y\n2 x\n3 y\n4 x\n5 y\n");
  const auto p = cli("probe --checkpoint " + (dir / "r" / "final.ckpt").string() + " --graph " +
                         (dir / "b.txt").string() + " --labels " + (dir / "labels.txt").string() +
                         " --splits 3 --test-frac 0.34",
                     dir);
  REQUIRE(p.code == 0);
  const auto j = nlohmann::json::parse(p.out);
  CHECK(j.at("n_splits") == 3);
  CHECK(j.at("classes").size() == 2);
  CHECK(j.at("micro_f1_mean").get<double>() >= 0.0);
  CHECK(j.at("micro_f1_mean").get<double>() <= 1.0);
}
