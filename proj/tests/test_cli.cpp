#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tauber/channels.hpp"
#include "tauber/cli.hpp"
#include "tauber/numerics.hpp"

using test::rel_err;

namespace {

struct Output {
  int code = 0;
  std::string out;
  std::string err;
};

Output run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Output r;
  r.code = tauber::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct Row {
  double db;
  double value;
  std::string method;
};

struct Csv {
  std::map<std::string, std::string> meta;
  std::vector<Row> rows;

  std::vector<Row> method(const std::string& m) const {
    std::vector<Row> r;
    for (const auto& row : rows)
      if (row.method == m) r.push_back(row);
    return r;
  }
  double num(const std::string& key) const { return std::stod(meta.at(key)); }
};

Csv parse(const std::string& text) {
  Csv c;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon != std::string::npos) c.meta[line.substr(2, colon - 2)] = line.substr(colon + 2);
      continue;
    }
    if (!header) {
      REQUIRE(line == "snr_db,value,method,ci_halfwidth");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string a, b, m;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, m, ',');
    c.rows.push_back({std::stod(a), std::stod(b), m});
  }
  return c;
}

Csv parse_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return parse(s.str());
}

double slope(const std::vector<Row>& rows) {
  std::vector<tauber::Point> pts;
  for (const auto& r : rows) pts.push_back({tauber::db_to_linear(r.db), r.value});
  return tauber::loglog_slope(pts).slope;
}

std::string line_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  return {};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tauber_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("parse_grid") {
  CHECK(tauber::cli::parse_grid("0:40:2").size() == 21);
  CHECK(tauber::cli::parse_grid("5").size() == 1);
  CHECK(tauber::cli::parse_grid("0:1:0.25").back() == 1.0);
  for (const char* bad : {"0:40", "a:b:c", "10:0:1", "0:10:0", "0:10:-1", "", "1::2"})
    CHECK_THROWS_AS(tauber::cli::parse_grid(bad), tauber::SpecError);
}

TEST_CASE("asymptote over Rayleigh with DPSK") {
  const auto r = run({"asymptote", "--channel", "rayleigh", "--mod", "dpsk"});
  REQUIRE(r.code == 0);
  const auto c = parse(r.out);
  CHECK(c.rows.size() == 21);
  CHECK(c.meta.at("tauber") == tauber::cli::kVersion);
  CHECK(c.meta.at("command") == "asymptote");
  CHECK(c.meta.at("class") == "AS1b");
  CHECK(c.num("d") == 1.0);
  CHECK(c.num("A") == 0.5);
  const auto& last = c.rows.back();
  CHECK(last.db == 40.0);
  CHECK(rel_err(last.value, 4.99975e-5) < 1e-5);
}

TEST_CASE("rapidly varying channel is reported as an error") {
  const auto r = run({"asymptote", "--channel", "lognormal:sigma_db=8", "--mod", "bpsk"});
  CHECK(r.code != 0);
  CHECK(r.err.find("rapidly varying") != std::string::npos);
  CHECK(r.err.rfind("error: ", 0) == 0);
  CHECK(r.out.empty());
}

TEST_CASE("signed combination asymptote has slope minus two") {
  const auto r =
      run({"asymptote", "--channel", "nakagami:m=2", "--mod", "mqam:M=16", "--snr", "20:60:5"});
  REQUIRE(r.code == 0);
  const auto c = parse(r.out);
  CHECK(c.meta.at("class") == "linear-combination");
  CHECK(std::abs(slope(c.method("asymptote")) + 2.0) < 0.01);
}

TEST_CASE("exact and mc subcommands") {
  const auto e = run({"exact", "--channel", "rayleigh", "--mod", "dpsk", "--snr", "20"});
  REQUIRE(e.code == 0);
  const auto ce = parse(e.out);
  REQUIRE(ce.rows.size() == 1);
  CHECK(rel_err(ce.rows[0].value, 0.5 / 101.0) < 1e-9);

  const auto m = run({"--draws", "200000", "--seed", "3", "mc", "--channel", "rayleigh", "--mod", "dpsk",
                      "--snr", "20"});
  REQUIRE(m.code == 0);
  const auto cm = parse(m.out);
  CHECK(cm.meta.at("seed") == "3");
  REQUIRE(cm.rows.size() == 1);
  CHECK(rel_err(cm.rows[0].value, 0.5 / 101.0) < 0.05);

  const auto again = run({"mc", "--channel", "rayleigh", "--mod", "dpsk", "--snr", "20", "--draws", "200000",
                          "--seed", "3", "--threads", "1"});
  CHECK(again.out == m.out);
}

TEST_CASE("exponent and tauberian reports") {
  const auto g = run({"exponent", "--channel", "gk:m=2,k=1"});
  REQUIRE(g.code == 0);
  CHECK(std::abs(std::stod(line_value(g.out, "estimate")) - 1.0) < 0.01);
  CHECK(line_value(g.out, "tauberian").rfind("pass", 0) == 0);

  const auto w = run({"exponent", "--channel", "weibull:k=0.5"});
  REQUIRE(w.code == 0);
  CHECK(std::abs(std::stod(line_value(w.out, "estimate")) - 0.5) < 0.01);

  const auto d = run({"exponent", "--channel", "gk:m=2,k=2"});
  REQUIRE(d.code == 0);
  CHECK(std::abs(std::stod(line_value(d.out, "estimate")) - 2.0) < 0.1);
  CHECK(line_value(d.out, "tauberian").rfind("pass", 0) == 0);

  const auto l = run({"exponent", "--channel", "lognormal:sigma_db=8"});
  REQUIRE(l.code == 0);
  CHECK(line_value(l.out, "estimate").find("rapidly varying") != std::string::npos);

  const auto t = run({"tauberian", "--channel", "nakagami:m=2"});
  REQUIRE(t.code == 0);
  CHECK(line_value(t.out, "result") == "pass");
  const auto tl = run({"tauberian", "--channel", "lognormal:sigma_db=8"});
  CHECK(tl.code != 0);
  CHECK(tl.err.find("rapidly varying") != std::string::npos);
}

TEST_CASE("offset between DPSK and BPSK") {
  const auto r = run({"offset", "--channel", "rayleigh", "--mod1", "dpsk", "--mod2", "bpsk"});
  REQUIRE(r.code == 0);
  const double off = std::stod(line_value(r.out, "offset_db"));
  CHECK(std::abs(off - 10.0 * std::log10(2.0)) < 1e-4);
  CHECK(std::abs(std::stod(line_value(r.out, "empirical_gap_db_at_1e-6")) - off) < 0.05);

  const auto n = run({"offset", "--channel", "nakagami:m=2", "--mod1", "dpsk", "--mod2", "bpsk"});
  REQUIRE(n.code == 0);
  // (A_dpsk / A_bpsk)^{1/d}: A_dpsk = Gamma(3) / 2 = 1, A_bpsk = Gamma(2.5) / (2 sqrt(pi)) = 3/8.
  const double want = 10.0 / 2.0 * std::log10(1.0 / (3.0 / 8.0));
  CHECK(std::abs(std::stod(line_value(n.out, "offset_db")) - want) < 1e-4);
  CHECK(std::abs(std::stod(line_value(n.out, "empirical_gap_db_at_1e-6")) - want) < 0.05);
}

TEST_CASE("combine reports the MRC constant") {
  const auto r = run({"combine", "--scheme", "mrc", "--branches", "rayleigh,rayleigh", "--mod", "bpsk",
                      "--snr", "30:60:10"});
  REQUIRE(r.code == 0);
  const auto c = parse(r.out);
  CHECK(rel_err(c.num("rho_coefficient"), 3.0 / 16.0) < 1e-9);
  CHECK(c.num("d") == 2.0);
  CHECK(rel_err(c.rows.back().value * 1e12, 3.0 / 16.0) < 1e-5);

  const auto three = run({"combine", "--scheme", "mrc", "--branches", "nakagami:m=0.5,nakagami:m=1,nakagami:m=1.5",
                          "--mod", "bpsk", "--snr", "30:60:2"});
  REQUIRE(three.code == 0);
  CHECK(std::abs(slope(parse(three.out).method("asymptote")) + 3.0) < 0.01);
}

TEST_CASE("selection over one branch equals the single channel") {
  const auto sc = run({"combine", "--scheme", "sc", "--branches", "nakagami:m=2", "--mod", "bpsk"});
  const auto single = run({"asymptote", "--channel", "nakagami:m=2", "--mod", "bpsk"});
  REQUIRE(sc.code == 0);
  REQUIRE(single.code == 0);
  const auto a = parse(sc.out).rows;
  const auto b = parse(single.out).rows;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(rel_err(a[i].value, b[i].value) < 1e-12);
}

TEST_CASE("combine with Monte Carlo rows") {
  const auto r = run({"--draws", "100000", "combine", "--scheme", "egc", "--branches", "rayleigh,rayleigh",
                      "--mod", "dpsk", "--snr", "0:10:5", "--with-mc"});
  REQUIRE(r.code == 0);
  const auto c = parse(r.out);
  CHECK(c.method("montecarlo").size() == 3);
  CHECK(c.meta.count("seed") == 1);
}

TEST_CASE("figure 1 files") {
  const auto dir = temp_dir("fig1");
  const auto r = run({"--out", dir.string(), "--draws", "100000", "figure", "1", "--snr", "0:40:4"});
  REQUIRE(r.code == 0);
  for (const char* name : {"fig1_dpsk.csv", "fig1_bpsk.csv"}) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(dir / name));
    const auto c = parse_file(dir / name);
    CHECK(c.method("exact").size() == 11);
    CHECK(c.method("asymptote").size() == 11);
    CHECK(c.method("wang").size() == 11);
    CHECK(c.method("montecarlo").size() == 11);
    CHECK(std::abs(c.num("gap_db_at_1e-6")) <= 0.1);
    CHECK(c.meta.count("seed") == 1);
  }
  CHECK(r.out.find("gap") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("figure 3 files without Monte Carlo") {
  const auto dir = temp_dir("fig3");
  const auto r = run({"--out", dir.string(), "figure", "3", "--no-mc", "--snr", "0:30:5"});
  REQUIRE(r.code == 0);
  for (const char* name : {"fig3_mrc.csv", "fig3_sc.csv"}) {
    CAPTURE(name);
    const auto c = parse_file(dir / name);
    CHECK(c.method("montecarlo").empty());
    CHECK(c.method("wang").empty());
    CHECK(c.method("exact").size() == 7);
    CHECK(std::abs(c.num("gap_db_at_1e-6")) <= 0.2);
    CHECK(c.num("d_c") == 3.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("figure output is deterministic for a fixed seed") {
  const auto d1 = temp_dir("det1");
  const auto d2 = temp_dir("det2");
  REQUIRE(run({"--out", d1.string(), "--draws", "50000", "--seed", "9", "figure", "2", "--snr", "0:20:10"}).code == 0);
  REQUIRE(run({"--out", d2.string(), "--draws", "50000", "--seed", "9", "--threads", "1", "figure", "2", "--snr",
               "0:20:10"})
              .code == 0);
  for (const char* name : {"fig2_dpsk.csv", "fig2_bpsk.csv"}) {
    std::ifstream a(d1 / name), b(d2 / name);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("bad input exits nonzero with one error line") {
  const std::vector<std::vector<std::string>> cases = {
      {"asymptote", "--channel", "rayleigh", "--mod", "dpsk", "--snr", "10:0:1"},
      {"asymptote", "--channel", "nakagami:m=-1", "--mod", "dpsk"},
      {"asymptote", "--channel", "rayleigh", "--mod", "qam"},
      {"combine", "--scheme", "xyz", "--branches", "rayleigh", "--mod", "dpsk"},
      {"combine", "--scheme", "mrc", "--branches", "rayleigh,lognormal:sigma_db=6", "--mod", "dpsk"},
      {"figure", "7"},
      {"asymptote", "--channel", "rayleigh"},
      {"nonsense"},
      {},
  };
  for (const auto& args : cases) {
    const auto r = run(args);
    CAPTURE(r.err);
    CHECK(r.code != 0);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
}

TEST_CASE("version and help") {
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(tauber::cli::kVersion) != std::string::npos);
  const auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("combine") != std::string::npos);
}
