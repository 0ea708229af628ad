#pragma once

// Experiment config files, the run manifest, and CSV / JSON / SVG output.

#include "rank1/config.hpp"
#include "rank1/experiments.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>

namespace rank1 {

inline constexpr const char* kToolVersion = "1.0.0";

// %.17g round-trips every double
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- config text ----

inline const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> k{
      "name",       "system",     "spec_file", "katok_p",   "iet_alpha",    "iet_beta",  "iet_bits",
      "iet_letter", "random_density", "schedule", "statistics", "prime_pairs", "tau",     "Q0",
      "oversample", "pnt_q",      "pnt_offset", "residue_q", "residue_a",    "seed",      "output_dir",
      "svg",        "assert_decay", "decay_factor"};
  return k;
}

inline std::string join(const std::vector<std::string>& v, const std::string& sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

inline std::string emit_config(const ExperimentConfig& c) {
  std::vector<std::string> sched, pairs;
  for (auto n : c.schedule) sched.push_back(std::to_string(n));
  for (auto [p, q] : c.prime_pairs) pairs.push_back(std::to_string(p) + ":" + std::to_string(q));
  KVConfig kv;
  kv.set("name", c.name);
  kv.set("system", to_string(c.system));
  kv.set("spec_file", c.spec_file);
  kv.set("katok_p", std::to_string(c.katok_p));
  kv.set("iet_alpha", c.iet_alpha);
  kv.set("iet_beta", c.iet_beta);
  kv.set("iet_bits", std::to_string(c.iet_bits));
  kv.set("iet_letter", std::string(1, c.iet_letter));
  kv.set("random_density", fmt_double(c.random_density));
  kv.set("schedule", join(sched));
  kv.set("statistics", join(c.statistics));
  kv.set("prime_pairs", join(pairs));
  kv.set("tau", fmt_double(c.tau));
  kv.set("Q0", std::to_string(c.Q0));
  kv.set("oversample", std::to_string(c.oversample));
  kv.set("pnt_q", std::to_string(c.pnt_q));
  kv.set("pnt_offset", std::to_string(c.pnt_offset));
  kv.set("residue_q", std::to_string(c.residue_q));
  kv.set("residue_a", std::to_string(c.residue_a));
  kv.set("seed", std::to_string(c.seed));
  kv.set("output_dir", c.output_dir);
  kv.set("svg", c.svg ? "true" : "false");
  kv.set("assert_decay", join(c.assert_decay));
  kv.set("decay_factor", fmt_double(c.decay_factor));
  return kv.serialize();
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  auto kv = KVConfig::parse(text, experiment_keys());
  ExperimentConfig c;
  auto words = [&](const std::string& k, std::vector<std::string> def) {
    if (!kv.has(k)) return def;
    std::vector<std::string> out;
    for (const auto& t : split(kv.get(k), ','))
      if (!t.empty()) out.push_back(t);
    return out;
  };
  auto boolean = [&](const std::string& k, bool def) {
    if (!kv.has(k)) return def;
    std::string v = kv.get(k);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + k + "' expects true or false, got '" + v + "'", kv.line_of(k));
  };
  c.name = kv.get("name", c.name);
  if (kv.has("system")) {
    std::string s = kv.get("system");
    const std::vector<std::string> kinds{"chacon", "katok", "spec", "iet", "random"};
    auto it = std::find(kinds.begin(), kinds.end(), s);
    if (it == kinds.end())
      throw ConfigError("system '" + s + "' unknown (did you mean '" + nearest_key(s, kinds) + "'?)",
                        kv.line_of("system"));
    c.system = static_cast<SystemKind>(it - kinds.begin());
  }
  c.spec_file = kv.get("spec_file", c.spec_file);
  c.katok_p = kv.get_int("katok_p", c.katok_p);
  c.iet_alpha = kv.get("iet_alpha", c.iet_alpha);
  c.iet_beta = kv.get("iet_beta", c.iet_beta);
  c.iet_bits = kv.get_int("iet_bits", c.iet_bits);
  if (kv.has("iet_letter")) {
    std::string v = kv.get("iet_letter");
    if (v.size() != 1) throw ConfigError("key 'iet_letter' expects one of 1, 2, 3", kv.line_of("iet_letter"));
    c.iet_letter = v[0];
  }
  c.random_density = kv.get_double("random_density", c.random_density);
  if (kv.has("schedule")) c.schedule = kv.get_int_list("schedule");
  c.statistics = words("statistics", c.statistics);
  if (kv.has("prime_pairs")) {
    c.prime_pairs.clear();
    for (const auto& t : words("prime_pairs", {})) {
      auto pq = split(t, ':');
      try {
        if (pq.size() != 2) throw std::invalid_argument("shape");
        c.prime_pairs.push_back({std::stoll(pq[0]), std::stoll(pq[1])});
      } catch (const std::exception&) {
        throw ConfigError("key 'prime_pairs' expects p:q pairs, got '" + t + "'", kv.line_of("prime_pairs"));
      }
    }
  }
  c.tau = kv.get_double("tau", c.tau);
  if (!(c.tau > 0 && c.tau < 1.0 / 3))
    throw ConfigError("tau = " + kv.get("tau") + " outside 0 < tau < 1/3", kv.line_of("tau"));
  c.Q0 = kv.get_int("Q0", c.Q0);
  c.oversample = kv.get_int("oversample", c.oversample);
  c.pnt_q = kv.get_int("pnt_q", c.pnt_q);
  c.pnt_offset = kv.get_int("pnt_offset", c.pnt_offset);
  c.residue_q = kv.get_int("residue_q", c.residue_q);
  c.residue_a = kv.get_int("residue_a", c.residue_a);
  std::int64_t seed = kv.get_int("seed", static_cast<std::int64_t>(c.seed));
  if (seed < 0) throw ConfigError("seed must be >= 0", kv.line_of("seed"));
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = kv.get("output_dir", c.output_dir);
  c.svg = boolean("svg", c.svg);
  c.assert_decay = words("assert_decay", c.assert_decay);
  c.decay_factor = kv.get_double("decay_factor", c.decay_factor);
  try {
    validate(c);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), 0);
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---- manifest ----

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// UTC; SOURCE_DATE_EPOCH pins it for reproducible builds
inline std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(e));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::vector<std::pair<std::string, std::string>> params;

  static RunManifest make(const std::string& command, std::vector<std::pair<std::string, std::string>> params,
                          std::uint64_t seed = 0) {
    RunManifest m;
    m.command = command;
    m.params = std::move(params);
    m.seed = seed;
    std::string canon = command + "\n";
    for (const auto& [k, v] : m.params) canon += k + " = " + v + "\n";
    m.config_hash = fnv1a_hex(canon);
    m.timestamp = utc_timestamp();
    return m;
  }

  static RunManifest for_config(const ExperimentConfig& c) {
    std::vector<std::pair<std::string, std::string>> ps;
    auto kv = KVConfig::parse(emit_config(c), {});
    for (const auto& e : kv.entries()) ps.push_back({e.key, e.value});
    return make("run", ps, c.seed);
  }

  // CSV comment block; the timestamp sits on its own line
  std::string csv_header() const {
    std::string s = "# tool: rank1 " + tool_version + "\n# command: " + command + "\n# config_hash: " +
                    config_hash + "\n# seed: " + std::to_string(seed) + "\n# timestamp: " + timestamp + "\n";
    for (const auto& [k, v] : params) s += "# param " + k + " = " + v + "\n";
    return s;
  }

  nlohmann::ordered_json json() const {
    nlohmann::ordered_json j;
    j["tool"] = "rank1";
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["timestamp"] = timestamp;
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params) p[k] = v;
    j["params"] = p;
    return j;
  }
};

// ---- tables ----

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) {
    if (r.size() != columns.size()) throw DomainError("row width does not match the columns");
    rows.push_back(std::move(r));
  }

  std::string csv(const RunManifest& m) const {
    std::string s = m.csv_header() + join(columns, ",") + "\n";
    for (const auto& r : rows) s += join(r, ",") + "\n";
    return s;
  }

  nlohmann::ordered_json json(const RunManifest& m) const {
    nlohmann::ordered_json j;
    j["manifest"] = m.json();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json o;
      for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i]] = r[i];
      arr.push_back(o);
    }
    j["rows"] = arr;
    return j;
  }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'", 0);
  out << text;
}

// ---- SVG ----

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Log-log polyline plot; non-positive points are skipped.
inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else if (c == '"') o += "&quot;";
    else o += c;
  }
  return o;
}

inline std::string svg_plot(const std::string& title, const std::vector<Series>& series, const std::string& comment = "") {
  const double W = 640, H = 420, L = 70, R = 180, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0) {
        x0 = std::min(x0, std::log10(s.x[i]));
        x1 = std::max(x1, std::log10(s.x[i]));
        y0 = std::min(y0, std::log10(s.y[i]));
        y1 = std::max(y1, std::log10(s.y[i]));
      }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (std::log10(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (std::log10(v) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::ostringstream o;
  o << std::setprecision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  if (!comment.empty()) o << "<!--\n" << comment << "\n-->\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(x0)); e <= static_cast<int>(std::floor(x1)); ++e)
    o << "<text x=\"" << px(std::pow(10.0, e)) << "\" y=\"" << H - B + 18
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e" << e << "</text>\n";
  for (int e = static_cast<int>(std::ceil(y0)); e <= static_cast<int>(std::floor(y1)); ++e)
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(std::pow(10.0, e)) + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 7];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0) o << px(s.x[i]) << "," << py(s.y[i]) << " ";
    o << "\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
      << col << "\">" << xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// ---- experiment output ----

inline Table result_table(const ExperimentResult& r) {
  Table t{{"N", "used", "statistic", "variant", "value"}, {}};
  for (const auto& row : r.rows)
    t.add({std::to_string(row.N), std::to_string(row.used), row.statistic, row.variant, fmt_double(row.value)});
  return t;
}

inline Table verdict_table(const ExperimentResult& r) {
  Table t{{"statistic", "variant", "first", "last", "monotone", "decays", "asserted"}, {}};
  for (const auto& v : r.verdicts)
    t.add({v.statistic, v.variant, fmt_double(v.first), fmt_double(v.last), v.monotone ? "1" : "0",
           v.decays ? "1" : "0", v.asserted ? "1" : "0"});
  return t;
}

struct RunOutputs {
  std::vector<std::string> files;
  bool passed = true;
};

inline RunOutputs write_outputs(const ExperimentConfig& c, const ExperimentResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(c.output_dir);
  auto m = RunManifest::for_config(c);
  RunOutputs out;
  out.passed = r.passed();
  auto base = (fs::path(c.output_dir) / c.name).string();
  write_file(base + ".csv", result_table(r).csv(m));
  write_file(base + "_verdicts.csv", verdict_table(r).csv(m));
  out.files = {base + ".csv", base + "_verdicts.csv"};
  if (c.svg) {
    std::vector<Series> ss;
    for (const auto& v : r.verdicts) {
      Series s{v.statistic + " " + v.variant, {}, {}};
      for (const auto& row : r.rows)
        if (row.statistic == v.statistic && row.variant == v.variant) {
          s.x.push_back(static_cast<double>(row.used));
          s.y.push_back(row.value);
        }
      ss.push_back(s);
    }
    write_file(base + ".svg", svg_plot(c.name, ss, m.csv_header()));
    out.files.push_back(base + ".svg");
  }
  return out;
}

}  // namespace rank1
