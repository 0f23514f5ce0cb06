#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Run {
  int status = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

// Runs bi with the given arguments; stderr is discarded.
Run bi(const std::string& args) {
  Run r;
  std::string cmd = quote(BI_EXE) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& n) const { return (path / n).string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("prove: exit statuses and deterministic JSON") {
    CHECK(bi("prove " + quote("p ; @a ; p -> q |- q")).status == 0);
    CHECK(bi("prove --depth 4 " + quote("@m |- p \\/ (p -> F)")).status == 1);
    Run a = bi("prove --json " + quote("p , q |- q * p"));
    Run b = bi("prove --json --jobs 2 " + quote("p , q |- q * p"));
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    auto j = nlohmann::json::parse(a.out);
    CHECK(j["status"] == "proved");
    CHECK(bi("prove --system vbi " + quote("p , q |- p * q")).status == 0);
  }

  TEST_CASE("errors exit 2") {
    CHECK(bi("prove " + quote("p |-")).status == 2);
    CHECK(bi("prove --depth nope " + quote("p |- p")).status == 2);
    CHECK(bi("no-such-command").status == 2);
    CHECK(bi("eval --model /nonexistent/model.json " + quote("p |- p")).status == 2);
    CHECK(bi("check-proof /nonexistent/proof.json").status == 2);
  }

  TEST_CASE("proof emission and checking") {
    TempDir t;
    const std::string pf = t.file("proof.json");
    REQUIRE(bi("prove --emit " + quote(pf) + " " + quote("(p -* q) , p |- q")).status == 0);
    CHECK(bi("check-proof " + quote(pf)).status == 0);

    // A proof whose conclusion was tampered with no longer checks.
    auto j = nlohmann::json::parse(std::ifstream(pf));
    j["sequent"] = "(p -* q) , p |- p";
    std::ofstream(t.file("bad.json")) << j.dump();
    CHECK(bi("check-proof " + quote(t.file("bad.json"))).status == 1);

    const std::string cert = t.file("cert.json");
    REQUIRE(bi("prove --system vbi --emit " + quote(cert) + " " + quote("p /\\ q |- q /\\ p")).status == 0);
    Run m = bi("meta-check --json " + quote(cert));
    CHECK(m.status == 0);
    auto mj = nlohmann::json::parse(m.out);
    CHECK(mj["valid"] == true);
    CHECK(mj["world_conservative"] == true);
  }

  TEST_CASE("countermodel and eval round-trip") {
    TempDir t;
    const std::string mf = t.file("model.json");
    REQUIRE(bi("countermodel --emit " + quote(mf) + " " + quote("p /\\ q |- p * q")).status == 0);
    CHECK(bi("eval --model " + quote(mf) + " " + quote("p /\\ q |- p * q")).status == 1);
    CHECK(bi("eval --model " + quote(mf) + " " + quote("p /\\ q |- q")).status == 0);
    CHECK(bi("countermodel " + quote("p |- p")).status == 1);
    Run a = bi("countermodel --json " + quote("p * q |- p /\\ q"));
    CHECK(a.out == bi("countermodel --json " + quote("p * q |- p /\\ q")).out);
  }

  TEST_CASE("space and bisim") {
    TempDir t;
    CHECK(bi("space --depth 3 --dot " + quote(t.file("g.dot")) + " " + quote("p |- p /\\ p")).status == 0);
    std::ifstream dot(t.file("g.dot"));
    std::string first;
    std::getline(dot, first);
    CHECK(first.rfind("digraph", 0) == 0);
    Run s1 = bi("space --depth 3 --json " + quote("p ; p -> q |- q"));
    CHECK(s1.out == bi("space --depth 3 --json --jobs 2 " + quote("p ; p -> q |- q")).out);

    Run b = bi("bisim --depth 3 --json " + quote("p /\\ q |- q /\\ p"));
    CHECK(b.status == 0);
    CHECK(b.out == bi("bisim --depth 3 --json " + quote("p /\\ q |- q /\\ p")).out);
  }
}
