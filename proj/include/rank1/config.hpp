#pragma once

// Key-value text configuration: one "key = value" per line, '#' starts a
// comment. Unknown keys are rejected with the closest valid key suggested.

#include "rank1/common.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rank1 {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string nearest_key(const std::string& key, const std::vector<std::string>& valid) {
  std::string best;
  std::size_t bd = static_cast<std::size_t>(-1);
  for (const auto& v : valid) {
    std::size_t d = edit_distance(key, v);
    if (d < bd) { bd = d; best = v; }
  }
  return best;
}

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

class KVConfig {
 public:
  KVConfig() = default;

  static KVConfig parse(const std::string& text, const std::vector<std::string>& valid_keys) {
    KVConfig cfg;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
      ++line_no;
      auto hash = raw.find('#');
      std::string ln = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (ln.empty()) continue;
      auto eq = ln.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + ln + "'", line_no);
      std::string k = trim(ln.substr(0, eq));
      std::string v = trim(ln.substr(eq + 1));
      if (k.empty()) throw ConfigError("empty key", line_no);
      if (!valid_keys.empty() &&
          std::find(valid_keys.begin(), valid_keys.end(), k) == valid_keys.end())
        throw ConfigError("unknown key '" + k + "' (did you mean '" + nearest_key(k, valid_keys) + "'?)",
                          line_no);
      if (cfg.index_.count(k)) throw ConfigError("duplicate key '" + k + "'", line_no);
      cfg.index_[k] = cfg.entries_.size();
      cfg.entries_.push_back({k, v, line_no});
    }
    return cfg;
  }

  static KVConfig load(const std::string& path, const std::vector<std::string>& valid_keys) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), valid_keys);
  }

  bool has(const std::string& k) const { return index_.count(k) != 0; }

  const ConfigEntry* entry(const std::string& k) const {
    auto it = index_.find(k);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  std::string get(const std::string& k, const std::string& def = "") const {
    auto e = entry(k);
    return e ? e->value : def;
  }

  int line_of(const std::string& k) const {
    auto e = entry(k);
    return e ? e->line : 0;
  }

  double get_double(const std::string& k, double def) const {
    auto e = entry(k);
    if (!e) return def;
    try {
      std::size_t used = 0;
      double v = std::stod(e->value, &used);
      if (trim(e->value.substr(used)).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + k + "' expects a number, got '" + e->value + "'", e->line);
    }
  }

  std::int64_t get_int(const std::string& k, std::int64_t def) const {
    auto e = entry(k);
    if (!e) return def;
    try {
      std::size_t used = 0;
      long long v = std::stoll(e->value, &used);
      if (trim(e->value.substr(used)).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + k + "' expects an integer, got '" + e->value + "'", e->line);
    }
  }

  std::vector<std::int64_t> get_int_list(const std::string& k) const {
    std::vector<std::int64_t> out;
    auto e = entry(k);
    if (!e) return out;
    for (const auto& tok : split(e->value, ',')) {
      try {
        out.push_back(std::stoll(tok));
      } catch (const std::exception&) {
        throw ConfigError("key '" + k + "' expects integers, got '" + tok + "'", e->line);
      }
    }
    return out;
  }

  std::vector<double> get_double_list(const std::string& k) const {
    std::vector<double> out;
    auto e = entry(k);
    if (!e) return out;
    for (const auto& tok : split(e->value, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("key '" + k + "' expects numbers, got '" + tok + "'", e->line);
      }
    }
    return out;
  }

  void set(const std::string& k, const std::string& v) {
    auto it = index_.find(k);
    if (it != index_.end()) {
      entries_[it->second].value = v;
      return;
    }
    index_[k] = entries_.size();
    entries_.push_back({k, v, 0});
  }

  const std::vector<ConfigEntry>& entries() const { return entries_; }

  // Canonical text form: keys sorted, one per line.
  std::string serialize() const {
    std::map<std::string, std::string> sorted;
    for (const auto& e : entries_) sorted[e.key] = e.value;
    std::string out;
    for (const auto& [k, v] : sorted) out += k + " = " + v + "\n";
    return out;
  }

 private:
  std::vector<ConfigEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

// Integer expression in one variable n: literals, n, + - * / ^ and parens.
class IntExpr {
 public:
  IntExpr() = default;
  explicit IntExpr(std::string src) : src_(std::move(src)) {
    std::size_t pos = 0;
    root_ = parse_sum(pos);
    skip(pos);
    if (pos != src_.size()) throw DomainError("bad expression '" + src_ + "'");
  }

  std::int64_t operator()(std::int64_t n) const { return eval(root_, n); }
  const std::string& source() const { return src_; }

 private:
  struct Node {
    char op = 0;  // 0 literal, 'n' variable, else binary operator
    std::int64_t val = 0;
    int lhs = -1, rhs = -1;
  };
  std::string src_;
  std::vector<Node> nodes_;
  int root_ = -1;

  void skip(std::size_t& p) const {
    while (p < src_.size() && std::isspace(static_cast<unsigned char>(src_[p]))) ++p;
  }
  int add(Node nd) {
    nodes_.push_back(nd);
    return static_cast<int>(nodes_.size()) - 1;
  }
  int parse_sum(std::size_t& p) {
    int l = parse_prod(p);
    for (;;) {
      skip(p);
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) {
        char op = src_[p++];
        int r = parse_prod(p);
        l = add({op, 0, l, r});
      } else {
        return l;
      }
    }
  }
  int parse_prod(std::size_t& p) {
    int l = parse_pow(p);
    for (;;) {
      skip(p);
      if (p < src_.size() && (src_[p] == '*' || src_[p] == '/')) {
        char op = src_[p++];
        int r = parse_pow(p);
        l = add({op, 0, l, r});
      } else {
        return l;
      }
    }
  }
  int parse_pow(std::size_t& p) {
    int l = parse_atom(p);
    skip(p);
    if (p < src_.size() && src_[p] == '^') {
      ++p;
      int r = parse_pow(p);
      return add({'^', 0, l, r});
    }
    return l;
  }
  int parse_atom(std::size_t& p) {
    skip(p);
    if (p >= src_.size()) throw DomainError("bad expression '" + src_ + "'");
    char c = src_[p];
    if (c == '(') {
      ++p;
      int v = parse_sum(p);
      skip(p);
      if (p >= src_.size() || src_[p] != ')') throw DomainError("missing ')' in '" + src_ + "'");
      ++p;
      return v;
    }
    if (c == 'n') {
      ++p;
      return add({'n', 0, -1, -1});
    }
    if (c == '-') {
      ++p;
      int v = parse_atom(p);
      int z = add({0, 0, -1, -1});
      return add({'-', 0, z, v});
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p])))
        v = checked_add(checked_mul(v, 10), src_[p++] - '0');
      return add({0, v, -1, -1});
    }
    throw DomainError("unexpected '" + std::string(1, c) + "' in '" + src_ + "'");
  }
  std::int64_t eval(int i, std::int64_t n) const {
    const Node& nd = nodes_[i];
    switch (nd.op) {
      case 0: return nd.val;
      case 'n': return n;
      case '+': return checked_add(eval(nd.lhs, n), eval(nd.rhs, n));
      case '-': return checked_add(eval(nd.lhs, n), -eval(nd.rhs, n));
      case '*': return checked_mul(eval(nd.lhs, n), eval(nd.rhs, n));
      case '/': {
        auto d = eval(nd.rhs, n);
        if (d == 0) throw DomainError("division by zero in '" + src_ + "'");
        return eval(nd.lhs, n) / d;
      }
      case '^': {
        auto b = eval(nd.lhs, n), e = eval(nd.rhs, n);
        if (e < 0) throw DomainError("negative exponent in '" + src_ + "'");
        std::int64_t r = 1;
        for (std::int64_t k = 0; k < e; ++k) r = checked_mul(r, b);
        return r;
      }
    }
    return 0;
  }
};

}  // namespace rank1
