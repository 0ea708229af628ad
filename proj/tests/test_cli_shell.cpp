#include "rank1/cli_shell.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

using namespace rank1;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("rank1_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Shell {
  int code;
  std::string out;
};

Shell sh(const std::string& args) {
  std::string cmd = std::string(RANK1_CLI) + " " + args + " 2>&1";
  FILE* f = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  int st = pclose(f);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string drop_timestamp(const std::string& s) {
  std::stringstream in(s);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# timestamp:", 0) != 0) out += line + "\n";
  return out;
}

ExperimentConfig random_config(std::mt19937_64& g) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(g); };
  auto unit = [&] { return std::uniform_real_distribution<double>(0, 1)(g); };
  ExperimentConfig c;
  c.name = "cfg" + std::to_string(pick(0, 99999));
  c.system = static_cast<SystemKind>(pick(0, 4));
  if (c.system == SystemKind::spec) c.system = SystemKind::random;
  c.katok_p = pick(1, 9);
  c.iet_bits = pick(64, 2048);
  c.iet_letter = static_cast<char>('1' + pick(0, 2));
  c.random_density = unit();
  c.schedule.clear();
  std::int64_t n = pick(1, 50);
  for (int k = 0, m = static_cast<int>(pick(1, 5)); k < m; ++k) c.schedule.push_back(n += pick(1, 100000));
  c.statistics.clear();
  for (const auto& s : statistic_names())
    if (pick(0, 1)) c.statistics.push_back(s);
  c.prime_pairs.clear();
  for (int k = 0, m = static_cast<int>(pick(0, 3)); k < m; ++k) c.prime_pairs.push_back({pick(2, 50), pick(2, 50)});
  c.tau = 0.001 + unit() * 0.33;
  c.Q0 = pick(0, 1000);
  c.oversample = pick(2, 64);
  c.pnt_q = pick(1, 12);
  c.pnt_offset = pick(0, 12);
  c.residue_q = pick(1, 12);
  c.residue_a = pick(0, c.residue_q - 1);
  c.seed = static_cast<std::uint64_t>(pick(0, 1LL << 40));
  c.output_dir = "out/dir" + std::to_string(pick(0, 9));
  c.svg = pick(0, 1);
  for (const auto& s : c.statistics)
    if (pick(0, 2) == 0) c.assert_decay.push_back(s);
  c.decay_factor = 1 + unit() * 3;
  return c;
}

}  // namespace

TEST(ConfigText, EmptyGivesDefaults) {
  EXPECT_EQ(parse_config_text(""), ExperimentConfig{});
  EXPECT_EQ(parse_config_text("# nothing here\n\n"), ExperimentConfig{});
  auto m = RunManifest::for_config(ExperimentConfig{});
  // every key is echoed, even the ones left at their defaults
  for (const auto& k : experiment_keys()) EXPECT_NE(m.csv_header().find("# param " + k + " = "), std::string::npos) << k;
}

TEST(ConfigText, TauOutsideRangeNamesTheLine) {
  try {
    parse_config_text("name = x\n\ntau = 0.5\n");
    FAIL() << "tau = 0.5 accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line, 3);
    EXPECT_NE(std::string(e.what()).find("tau"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("tau = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_text("tau = 0.3333334\n"), ConfigError);
  EXPECT_NO_THROW(parse_config_text("tau = 0.3333\n"));
}

TEST(ConfigText, UnknownKeysSuggestTheNearest) {
  try {
    parse_config_text("schedule = 10, 20\nstatistcs = moebius\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line, 2);
    EXPECT_NE(std::string(e.what()).find("statistics"), std::string::npos) << e.what();
  }
  try {
    parse_config_text("system = chacn\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'chacon'"), std::string::npos) << e.what();
  }
  try {
    parse_config_text("statistics = moebuis\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("moebius"), std::string::npos) << e.what();
  }
}

TEST(ConfigText, TypeMismatchesReported) {
  EXPECT_THROW(parse_config_text("seed = many\n"), ConfigError);
  EXPECT_THROW(parse_config_text("tau = quarter\n"), ConfigError);
  EXPECT_THROW(parse_config_text("svg = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config_text("prime_pairs = 7-13\n"), ConfigError);
  EXPECT_THROW(parse_config_text("schedule = 100, 10\n"), ConfigError);
  EXPECT_THROW(parse_config_text("iet_letter = 12\n"), ConfigError);
  EXPECT_THROW(parse_config_text("seed = -3\n"), ConfigError);
  try {
    parse_config_text("name = a\nsvg = maybe\n");
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(ConfigText, RoundTripRandomConfigs) {
  std::mt19937_64 g(20261018);
  for (int t = 0; t < 100; ++t) {
    auto c = random_config(g);
    auto text = emit_config(c);
    auto back = parse_config_text(text);
    ASSERT_EQ(back, c) << text;
    EXPECT_EQ(emit_config(back), text);
  }
}

TEST(Manifest, HeaderAndHash) {
  auto m = RunManifest::make("demo", {{"a", "1"}, {"b", "x y"}}, 7);
  auto h = m.csv_header();
  for (const char* k : {"# tool: rank1 ", "# command: demo", "# config_hash: ", "# seed: 7", "# timestamp: ", "# param a = 1",
                        "# param b = x y"})
    EXPECT_NE(h.find(k), std::string::npos) << k;
  EXPECT_EQ(m.config_hash, RunManifest::make("demo", {{"a", "1"}, {"b", "x y"}}, 7).config_hash);
  EXPECT_NE(m.config_hash, RunManifest::make("demo", {{"a", "2"}, {"b", "x y"}}, 7).config_hash);
  auto j = m.json();
  EXPECT_EQ(j["command"], "demo");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["params"]["b"], "x y");
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Manifest, TimestampHonoursSourceDateEpoch) {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  EXPECT_EQ(utc_timestamp(), "1970-01-01T00:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST(Outputs, TableCsvAndJson) {
  Table t{{"N", "value"}, {}};
  t.add({"10", "0.5"});
  t.add({"100", "0.25"});
  EXPECT_THROW(t.add({"1"}), DomainError);
  auto m = RunManifest::make("t", {});
  auto csv = t.csv(m);
  EXPECT_EQ(csv.substr(0, 7), "# tool:");
  EXPECT_NE(csv.find("N,value\n10,0.5\n100,0.25\n"), std::string::npos);
  auto j = t.json(m);
  EXPECT_TRUE(j.contains("manifest"));
  EXPECT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][1]["value"], "0.25");
}

TEST(Outputs, SvgIsWellFormed) {
  auto svg = svg_plot("decay", {{"a", {10, 100, 1000}, {1, 0.5, 0.25}}, {"b", {10, 100}, {0.1, 0.2}}}, "note");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("<!--\nnote\n-->"), std::string::npos);
  EXPECT_NE(svg_plot("a<b", {}).find("a&lt;b"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '<') , std::count(svg.begin(), svg.end(), '>'));
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 2u);
}

TEST(Outputs, RunIsDeterministicUpToTimestamp) {
  auto d = scratch("det");
  ExperimentConfig c;
  c.name = "det";
  c.system = SystemKind::random;
  c.schedule = {1000, 4000};
  c.statistics = {"moebius", "residue"};
  c.output_dir = d.string();
  auto a = write_outputs(c, run_experiment(c));
  auto first = slurp(d / "det.csv");
  auto b = write_outputs(c, run_experiment(c));
  EXPECT_EQ(a.files, b.files);
  EXPECT_EQ(drop_timestamp(first), drop_timestamp(slurp(d / "det.csv")));
  EXPECT_NE(first.find("# param statistics = moebius, residue"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "det.svg"));
  EXPECT_TRUE(fs::exists(d / "det_verdicts.csv"));
}

TEST(Binary, EverySubcommandHasHelp) {
  for (const char* s : {"build-word", "spectrum", "riesz-correlation", "sieve", "expsum", "arc-l1", "certificate",
                        "wordsys", "wordsys check", "iet", "iet expand", "iet code", "run"}) {
    auto r = sh(std::string(s) + " --help");
    EXPECT_EQ(r.code, 0) << s;
    EXPECT_NE(r.out.find("--"), std::string::npos) << s;
  }
  auto j = nlohmann::json::parse(sh("--help-json").out);
  std::size_t n = 0;
  std::function<void(const nlohmann::json&)> walk = [&](const nlohmann::json& a) {
    for (const auto& o : a["options"]) {
      EXPECT_FALSE(o["description"].get<std::string>().empty()) << a["name"] << " " << o["name"];
      ++n;
    }
    if (a.contains("subcommands"))
      for (const auto& s : a["subcommands"]) walk(s);
  };
  walk(j);
  EXPECT_GT(n, 40u);
}

TEST(Binary, BuildWordMatchesLibrary) {
  auto r = sh("build-word --level 3 --range 2..20");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("# command: build-word"), std::string::npos);
  auto w = bits_to_string(word_of(make_classical_chacon(), 3));
  EXPECT_NE(r.out.find("\n" + w.substr(2, 18) + "\n"), std::string::npos) << r.out;
}

TEST(Binary, IETExpandJson) {
  auto r = sh("iet expand --alpha '(sqrt(5)-1)/8' --beta 'sqrt(2)/10' --depth 4");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["steps"].size(), 4u);
  EXPECT_EQ(j["lengths"].size(), 5u);
  EXPECT_EQ(j["manifest"]["command"], "iet expand");
  auto again = nlohmann::json::parse(sh("iet expand --alpha '(sqrt(5)-1)/8' --beta 'sqrt(2)/10' --depth 4").out);
  EXPECT_EQ(j["steps"], again["steps"]);
  EXPECT_EQ(sh("iet expand --alpha 0.6 --beta 0.6").code, 1);
}

TEST(Binary, RunExitCodes) {
  auto d = scratch("run");
  auto good = d / "good.cfg";
  write_file(good.string(), "name = ok\nsystem = chacon\nschedule = 10000, 100000\nstatistics = moebius\n"
                            "assert_decay = moebius\ndecay_factor = 1.2\noutput_dir = " + d.string() + "\n");
  auto r = sh("run --config " + good.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(d / "ok.csv"));

  auto strict = d / "strict.cfg";
  write_file(strict.string(), "name = strict\nsystem = random\nschedule = 1000, 2000\nstatistics = moebius\n"
                              "assert_decay = moebius\ndecay_factor = 1000\noutput_dir = " + d.string() + "\n");
  EXPECT_EQ(sh("run --config " + strict.string()).code, 1);

  auto bad = d / "bad.cfg";
  write_file(bad.string(), "tau = 0.5\n");
  r = sh("run --config " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 1"), std::string::npos) << r.out;
}
