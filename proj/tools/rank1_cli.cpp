// rank1: command-line front end.

#include "rank1/arcs.hpp"
#include "rank1/certificate.hpp"
#include "rank1/cli_shell.hpp"
#include "rank1/experiments.hpp"
#include "rank1/iet.hpp"
#include "rank1/symbolic_class.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace rank1;
using Params = std::vector<std::pair<std::string, std::string>>;

namespace {

void emit(const std::string& path, const std::string& text) {
  if (path == "-" || path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(path, text);
  }
}

std::string manifest_comment(const RunManifest& m) { return m.csv_header(); }

// system selection shared by the word-based subcommands
struct SystemOpts {
  std::string spec_file, family = "chacon", p = "2", q = "1";

  void add(CLI::App* sc) {
    sc->add_option("--spec", spec_file, "rank-one spec file (overrides --family)");
    sc->add_option("--family", family, "chacon or katok when no spec file is given")->check(CLI::IsMember({"chacon", "katok"}));
    sc->add_option("--family-p", p, "Chacon/Katok parameter p (integer or expression in n)");
    sc->add_option("--family-q", q, "Chacon parameter q (integer or expression in n)");
  }
  RankOneSpec spec() const {
    if (!spec_file.empty()) return load_spec(spec_file);
    if (family == "katok") return make_katok(IntSeq::parse(p));
    return make_chacon(IntSeq::parse(p), IntSeq::parse(q));
  }
  Params echo() const {
    if (!spec_file.empty()) return {{"spec", spec_file}};
    if (family == "katok") return {{"family", family}, {"p", p}};
    return {{"family", family}, {"p", p}, {"q", q}};
  }
};

template <class T>
std::string str(const T& v) {
  if constexpr (std::is_floating_point_v<T>) return fmt_double(v);
  else return std::to_string(v);
}

nlohmann::ordered_json describe(const CLI::App* app) {
  nlohmann::ordered_json j;
  j["name"] = app->get_name();
  j["description"] = app->get_description();
  auto opts = nlohmann::ordered_json::array();
  for (const auto* o : app->get_options()) {
    nlohmann::ordered_json oj;
    oj["name"] = o->get_name();
    oj["description"] = o->get_description();
    oj["required"] = o->get_required();
    oj["flag"] = o->get_type_size() == 0;
    if (!o->get_default_str().empty()) oj["default"] = o->get_default_str();
    opts.push_back(oj);
  }
  j["options"] = opts;
  auto subs = nlohmann::ordered_json::array();
  for (const auto* s : app->get_subcommands({})) subs.push_back(describe(s));
  if (!subs.empty()) j["subcommands"] = subs;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank1: rank-one words, spectral polynomials, Moebius correlations, arcs, certificates, 3-IETs"};
  app.set_version_flag("--version", std::string("rank1 ") + kToolVersion);
  bool help_json = false;
  app.add_flag("--help-json", help_json, "print every subcommand and flag as JSON and exit");
  std::string output = "-";

  // build-word
  auto* bw = app.add_subcommand("build-word", "materialize B_n or a slice of it");
  SystemOpts bw_sys;
  bw_sys.add(bw);
  std::size_t bw_level = 3;
  std::string bw_range, bw_out = "-";
  bw->add_option("--level", bw_level, "level n of B_n")->capture_default_str();
  bw->add_option("--range", bw_range, "slice S..E (0-based, end exclusive)");
  bw->add_option("--out", bw_out, "output file ('-' for stdout)")->capture_default_str();

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "Riesz product R_n on a grid");
  SystemOpts sp_sys;
  sp_sys.add(sp);
  std::size_t sp_level = 2, sp_grid = 0;
  std::string sp_out = "csv";
  sp->add_option("--level", sp_level, "level n")->capture_default_str();
  sp->add_option("--grid", sp_grid, "grid size M (0: next power of two above 16 x degree)");
  sp->add_option("--out", sp_out, "format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sp->add_option("-o,--output", output, "output file ('-' for stdout)");

  // riesz-correlation
  auto* rc = app.add_subcommand("riesz-correlation", "|prod P_j(p theta)| |prod P_j(q theta)| outside (-eps, eps)");
  SystemOpts rc_sys;
  rc_sys.add(rc);
  std::size_t rc_level = 2, rc_grid = 0;
  std::int64_t rc_p = 5, rc_q = 7;
  double rc_eps = 0.01;
  std::string rc_out = "csv";
  rc->add_option("--level", rc_level, "level n")->capture_default_str();
  rc->add_option("--p", rc_p, "dilation p")->capture_default_str();
  rc->add_option("--q", rc_q, "dilation q")->capture_default_str();
  rc->add_option("--exclude-near-zero", rc_eps, "half-width of the excluded neighbourhood of 0")->capture_default_str();
  rc->add_option("--grid", rc_grid, "grid size M (0: automatic)");
  rc->add_option("--out", rc_out, "format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  rc->add_option("-o,--output", output, "output file ('-' for stdout)");

  // sieve
  auto* sv = app.add_subcommand("sieve", "mu or Lambda table up to n");
  std::string sv_kind = "mu", sv_out = "bin";
  std::uint64_t sv_n = 1000;
  sv->add_option("--kind", sv_kind, "mu or lambda")->check(CLI::IsMember({"mu", "lambda"}))->capture_default_str();
  sv->add_option("--n", sv_n, "table size")->capture_default_str();
  sv->add_option("--out", sv_out, "bin (mu only) or csv")->check(CLI::IsMember({"bin", "csv"}))->capture_default_str();
  sv->add_option("-o,--output", output, "output file ('-' for stdout)");

  // expsum
  auto* es = app.add_subcommand("expsum", "sum_{n <= N} mu(n) e(n theta)");
  double es_theta = 0.5;
  std::uint64_t es_n = 1000;
  std::string es_out = "csv";
  es->add_option("--theta", es_theta, "frequency theta")->capture_default_str();
  es->add_option("--n", es_n, "length N")->capture_default_str();
  es->add_option("--out", es_out, "format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  es->add_option("-o,--output", output, "output file ('-' for stdout)");

  // arc-l1
  auto* al = app.add_subcommand("arc-l1", "per-family breakdown of int |P_W| |sum mu e|");
  SystemOpts al_sys;
  al_sys.add(al);
  std::size_t al_level = 6;
  BreakdownOptions al_opt;
  std::string al_out = "csv";
  al->add_option("--level", al_level, "level n, W = B_n")->capture_default_str();
  al->add_option("--Qmax", al_opt.Qmax, "largest dyadic Q (0: N^eps)");
  al->add_option("--Kmax", al_opt.Kmax, "largest dyadic K (0: N^eps)");
  al->add_option("--tau", al_opt.tau, "arc range exponent tau")->capture_default_str();
  al->add_option("--eps", al_opt.eps, "exponent for the default Q, K ranges")->capture_default_str();
  al->add_option("--A", al_opt.A, "exponent A in (log N)^{-A}")->capture_default_str();
  al->add_flag("--refined", al_opt.refined, "use (log K)^3 in place of (log N)^3");
  al->add_option("--out", al_out, "format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  al->add_option("-o,--output", output, "output file ('-' for stdout)");

  // certificate
  auto* ce = app.add_subcommand("certificate", "resultant certificate for a uniform-spacer pattern");
  std::int64_t ce_v = 3, ce_p = 7, ce_q = 13;
  std::string ce_spacers = "0,1", ce_rho;
  double ce_cap = 2e8;
  ce->add_option("--v", ce_v, "number of copies v")->capture_default_str();
  ce->add_option("--spacers", ce_spacers, "a_1,..,a_{v-1}")->capture_default_str();
  ce->add_option("--p", ce_p, "prime p")->capture_default_str();
  ce->add_option("--q", ce_q, "prime q > p")->capture_default_str();
  ce->add_option("--rho-grid", ce_rho, "T,E grid sizes for the rho statistics");
  ce->add_option("--work-cap", ce_cap, "full-resultant work cap in field operations")->capture_default_str();
  ce->add_option("-o,--output", output, "output file ('-' for stdout)");

  // wordsys
  auto* ws = app.add_subcommand("wordsys", "symbolic word systems");
  auto* wc = ws->add_subcommand("check", "growth condition and L1 exponent column");
  std::string wc_file;
  double wc_C0 = 1;
  std::size_t wc_l1_from = 0;
  wc->add_option("--file", wc_file, "system file")->required();
  wc->add_option("--C0", wc_C0, "constant C0 in beta(s) > C0 s")->capture_default_str();
  wc->add_option("--l1-from", wc_l1_from, "also print L1 rows from this level up (0: off)");
  wc->add_option("-o,--output", output, "output file ('-' for stdout)");
  ws->require_subcommand(1);

  // iet
  auto* it = app.add_subcommand("iet", "three-interval exchanges");
  auto* ie = it->add_subcommand("expand", "three-interval expansion by induction");
  auto* ic = it->add_subcommand("code", "orbit coding");
  std::string i_alpha = "(sqrt(5)-1)/8", i_beta = "sqrt(2)/10", i_out_e = "json", i_out_c = "txt", i_x0 = "0";
  unsigned i_bits = kDefaultIETBits;
  std::size_t i_depth = 10, i_len = 100;
  double i_C0 = 1;
  std::string i_letter;
  for (auto* s : {ie, ic}) {
    s->add_option("--alpha", i_alpha, "alpha (expression: numbers, p/q, sqrt, + - * / ^)")->capture_default_str();
    s->add_option("--beta", i_beta, "beta (same syntax)")->capture_default_str();
    s->add_option("--bits", i_bits, "working precision in bits")->capture_default_str();
    s->add_option("-o,--output", output, "output file ('-' for stdout)");
  }
  ie->add_option("--depth", i_depth, "number of induction steps")->capture_default_str();
  ie->add_option("--C0", i_C0, "constant C0 for min(n_k, m_k) > C0")->capture_default_str();
  ie->add_option("--out", i_out_e, "format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  ic->add_option("--x0", i_x0, "start point as i + j*alpha + k*beta, written i,j,k")->capture_default_str();
  ic->add_option("--len", i_len, "number of symbols")->capture_default_str();
  ic->add_option("--project", i_letter, "letter 1, 2 or 3 sent to 1 (output over {0,1})");
  ic->add_option("--out", i_out_c, "format")->check(CLI::IsMember({"txt", "json"}))->capture_default_str();
  it->require_subcommand(1);

  // run
  auto* rn = app.add_subcommand("run", "run an experiment config");
  std::string rn_config;
  rn->add_option("--config", rn_config, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (help_json) {
    std::cout << describe(&app).dump(2) << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*bw) {
      auto spec = bw_sys.spec();
      SymbolicWord w(spec, bw_level);
      BigInt s = 0, e = w.length();
      if (!bw_range.empty()) {
        auto dots = bw_range.find("..");
        if (dots == std::string::npos) throw ConfigError("--range expects S..E", 0);
        s = BigInt(trim(bw_range.substr(0, dots)));
        e = BigInt(trim(bw_range.substr(dots + 2)));
      }
      Params ps = bw_sys.echo();
      ps.push_back({"level", str(bw_level)});
      ps.push_back({"range", s.str() + ".." + e.str()});
      auto m = RunManifest::make("build-word", ps);
      emit(bw_out, manifest_comment(m) + bits_to_string(materialize(w, s, e)) + "\n");
    } else if (*sp) {
      auto spec = sp_sys.spec();
      auto deg = static_cast<std::size_t>(riesz_degree(spec, sp_level));
      std::size_t M = sp_grid ? sp_grid : next_pow2(16 * (deg + 1));
      auto g = riesz_product(spec, sp_level, M);
      Params ps = sp_sys.echo();
      ps.push_back({"level", str(sp_level)});
      ps.push_back({"grid", str(M)});
      auto m = RunManifest::make("spectrum", ps);
      Table t{{"theta", "value"}, {}};
      for (std::size_t i = 0; i < M; ++i) t.add({fmt_double(g.theta(i)), fmt_double(g.values[i])});
      emit(output, sp_out == "csv" ? t.csv(m) : t.json(m).dump(2) + "\n");
    } else if (*rc) {
      auto spec = rc_sys.spec();
      auto deg = static_cast<std::size_t>(riesz_degree(spec, rc_level));
      std::size_t M = rc_grid ? rc_grid : next_pow2(16 * (deg + 1) * static_cast<std::size_t>(std::max(rc_p, rc_q)));
      std::vector<double> val(M, 1.0);
      for (std::size_t j = 1; j <= rc_level; ++j) {
        auto P = build_Pj(spec, j);
        auto gp = eval_grid(P, M, rc_p), gq = eval_grid(P, M, rc_q);
        for (std::size_t t = 0; t < M; ++t) val[t] *= std::abs(gp.values[t]) * std::abs(gq.values[t]);
      }
      Params ps = rc_sys.echo();
      for (auto kv : Params{{"level", str(rc_level)}, {"p", str(rc_p)}, {"q", str(rc_q)},
                            {"exclude_near_zero", fmt_double(rc_eps)}, {"grid", str(M)}})
        ps.push_back(kv);
      auto m = RunManifest::make("riesz-correlation", ps);
      Table t{{"theta", "value"}, {}};
      double integral = 0;
      for (std::size_t i = 0; i < M; ++i) {
        double th = static_cast<double>(i) / static_cast<double>(M);
        if (std::min(th, 1 - th) < rc_eps) continue;
        integral += val[i] / static_cast<double>(M);
        t.add({fmt_double(th), fmt_double(val[i])});
      }
      if (rc_out == "csv") {
        emit(output, t.csv(m) + "# integral_outside: " + fmt_double(integral) + "\n");
      } else {
        auto j = t.json(m);
        j["integral_outside"] = integral;
        emit(output, j.dump(2) + "\n");
      }
    } else if (*sv) {
      auto m = RunManifest::make("sieve", {{"kind", sv_kind}, {"n", str(sv_n)}, {"out", sv_out}});
      if (sv_kind == "mu") {
        auto t = cached_mu(sv_n);
        if (sv_out == "bin") {
          if (output == "-") throw ConfigError("binary output needs -o FILE", 0);
          std::ofstream f(output, std::ios::binary);
          write_mu_table(t, f);
          std::ofstream(output + ".manifest.json") << m.json().dump(2) << "\n";
        } else {
          Table tb{{"n", "mu"}, {}};
          for (std::uint64_t n = 1; n <= sv_n; ++n) tb.add({str(n), str(t.mu(n))});
          emit(output, tb.csv(m));
        }
      } else {
        if (sv_out == "bin") throw ConfigError("binary format is defined for mu only", 0);
        auto t = sieve(TableKind::lambda, sv_n);
        Table tb{{"n", "lambda"}, {}};
        for (std::uint64_t n = 1; n <= sv_n; ++n) tb.add({str(n), fmt_double(t.lambda(n))});
        emit(output, tb.csv(m));
      }
    } else if (*es) {
      auto t = cached_mu(es_n);
      cplx s = mu_exp_sum(t, es_theta, es_n);
      auto m = RunManifest::make("expsum", {{"theta", fmt_double(es_theta)}, {"n", str(es_n)}});
      Table tb{{"theta", "N", "re", "im", "abs"}, {}};
      tb.add({fmt_double(es_theta), str(es_n), fmt_double(s.real()), fmt_double(s.imag()), fmt_double(std::abs(s))});
      emit(output, es_out == "csv" ? tb.csv(m) : tb.json(m).dump(2) + "\n");
    } else if (*al) {
      auto spec = al_sys.spec();
      auto w = word_of(spec, al_level);
      auto mu = cached_mu(w.size());
      auto r = per_family_breakdown(w, mu, al_opt);
      Params ps = al_sys.echo();
      for (auto kv : Params{{"level", str(al_level)}, {"Qmax", str(al_opt.Qmax)}, {"Kmax", str(al_opt.Kmax)},
                            {"tau", fmt_double(al_opt.tau)}, {"eps", fmt_double(al_opt.eps)}, {"A", fmt_double(al_opt.A)},
                            {"refined", al_opt.refined ? "1" : "0"}})
        ps.push_back(kv);
      auto m = RunManifest::make("arc-l1", ps);
      Table t{{"Q", "K", "arc_count", "integral", "bound_249", "bound_250"}, {}};
      for (const auto& c : r.cells)
        t.add({str(c.Q), str(c.K), str(c.arc_count), c.rejected ? "overlap" : fmt_double(c.integral),
               fmt_double(c.bound_249), fmt_double(c.bound_250)});
      std::string tail = "# N: " + str(r.N) + "\n# total_integral: " + fmt_double(r.integral) + "\n# complement: " +
                         fmt_double(r.complement) + "\n";
      if (al_out == "csv") {
        emit(output, t.csv(m) + tail);
      } else {
        auto j = t.json(m);
        j["N"] = r.N;
        j["total_integral"] = r.integral;
        j["complement"] = r.complement;
        emit(output, j.dump(2) + "\n");
      }
    } else if (*ce) {
      std::vector<std::int64_t> a;
      for (const auto& tok : split(ce_spacers, ',')) a.push_back(std::stoll(tok));
      SpacerPattern pat(ce_v, a);
      ResultantOptions ro;
      ro.full_work_cap = ce_cap;
      auto rep = resultant_test(pat, ce_p, ce_q, ro);
      Params ps{{"v", str(ce_v)}, {"spacers", ce_spacers}, {"p", str(ce_p)}, {"q", str(ce_q)}, {"work_cap", fmt_double(ce_cap)}};
      if (!ce_rho.empty()) ps.push_back({"rho_grid", ce_rho});
      auto m = RunManifest::make("certificate", ps);
      std::string out = manifest_comment(m);
      out += std::string(to_string(rep.verdict)) + "\n";
      out += "method: " + rep.method + (rep.exact ? "" : " (not exact)") + "\n";
      out += "degree: " + (rep.degree ? str(*rep.degree) : std::string("-")) + "\n";
      out += "leading: " + (rep.leading ? rep.leading->str() : std::string("-")) + "\n";
      out += "puiseux: " + std::string(to_string(puiseux_precheck(pat))) + "\n";
      if (!ce_rho.empty()) {
        auto te = split(ce_rho, ',');
        if (te.size() != 2) throw ConfigError("--rho-grid expects T,E", 0);
        RhoOptions rop;
        rop.theta_grid = std::stoull(te[0]);
        rop.eta_grid = std::stoull(te[1]);
        auto g = rho_defect(pat, ce_p, ce_q, rop);
        out += "theta,rho,min_minorant\n";
        for (std::size_t i = 0; i < g.T; ++i)
          out += fmt_double(static_cast<double>(i) / static_cast<double>(g.T)) + "," + fmt_double(g.rho[i]) + "," +
                 fmt_double(g.min_minorant[i]) + "\n";
      }
      emit(output, out);
    } else if (*wc) {
      auto sys = load_system(wc_file);
      auto rep = check_growth(sys, wc_C0);
      auto m = RunManifest::make("wordsys check", {{"file", wc_file}, {"C0", fmt_double(wc_C0)}});
      std::string out = manifest_comment(m) + "s,beta,C0_s\n";
      for (std::size_t s = 1; s < rep.beta.size(); ++s)
        out += str(s) + "," + fmt_double(rep.beta[s]) + "," + fmt_double(wc_C0 * static_cast<double>(s)) + "\n";
      out += "# growth: " + std::string(rep.passes() ? "pass s0=" + str(*rep.s0) : "fail") + "\n";
      if (wc_l1_from) {
        out += "level,index,length,l1,exponent,product_bound\n";
        for (const auto& r : l1_growth_check(sys, wc_l1_from, sys.num_levels()))
          out += str(r.ref.level) + "," + str(r.ref.index) + "," + r.length.str() + "," + fmt_double(r.l1) + "," +
                 fmt_double(r.exponent) + "," + fmt_double(r.product_bound) + "\n";
      }
      emit(output, out);
      return rep.passes() ? 0 : 1;
    } else if (*ie) {
      IETParams P(i_alpha, i_beta, i_bits);
      auto r = induce_expansion(P, i_depth);
      auto m = RunManifest::make("iet expand", {{"alpha", i_alpha}, {"beta", i_beta}, {"bits", str(i_bits)},
                                                {"depth", str(i_depth)}, {"C0", fmt_double(i_C0)}});
      auto cond = check_conditions(r.steps.empty() ? std::vector<ExpansionStep>{{1, 1, 1}} : r.steps, i_C0);
      if (i_out_e == "json") {
        nlohmann::ordered_json j;
        j["manifest"] = m.json();
        auto steps = nlohmann::ordered_json::array();
        for (const auto& s : r.steps) steps.push_back({{"n", s.n}, {"m", s.m}, {"eps", s.eps}});
        j["steps"] = steps;
        auto lens = nlohmann::ordered_json::array();
        for (const auto& L : r.levels) lens.push_back({{"a", L.lengths[0].str()}, {"b", L.lengths[1].str()}, {"c", L.lengths[2].str()}});
        j["lengths"] = lens;
        if (!r.steps.empty())
          j["conditions"] = {{"inf_ratio", cond.inf_ratio}, {"min_nm", cond.min_nm}, {"C0", i_C0},
                             {"balanced", cond.balanced}, {"large_steps", cond.large_steps}, {"both_hold", cond.both_hold()}};
        emit(output, j.dump(2) + "\n");
      } else {
        Table t{{"k", "n", "m", "eps", "a", "b", "c"}, {}};
        for (std::size_t k = 0; k < r.levels.size(); ++k) {
          const auto& L = r.levels[k];
          std::string n = "", mm = "", e = "";
          if (k < r.steps.size()) n = str(r.steps[k].n), mm = str(r.steps[k].m), e = str(r.steps[k].eps);
          t.add({str(k), n, mm, e, L.lengths[0].str(), L.lengths[1].str(), L.lengths[2].str()});
        }
        emit(output, t.csv(m));
      }
    } else if (*ic) {
      IETParams P(i_alpha, i_beta, i_bits);
      auto parts = split(i_x0, ',');
      Pt x0;
      if (parts.size() == 1) x0 = Pt{std::stoll(parts[0]), 0, 0};
      else if (parts.size() == 3) x0 = Pt{std::stoll(parts[0]), std::stoll(parts[1]), std::stoll(parts[2])};
      else throw ConfigError("--x0 expects i or i,j,k", 0);
      auto code = orbit_coding(P, x0, i_len);
      if (!i_letter.empty()) {
        if (i_letter.size() != 1) throw ConfigError("--project expects 1, 2 or 3", 0);
        code = bits_to_string(project01(code, i_letter[0]));
      }
      auto m = RunManifest::make("iet code", {{"alpha", i_alpha}, {"beta", i_beta}, {"bits", str(i_bits)}, {"x0", i_x0},
                                              {"len", str(i_len)}, {"project", i_letter}});
      if (i_out_c == "txt") {
        emit(output, manifest_comment(m) + code + "\n");
      } else {
        nlohmann::ordered_json j;
        j["manifest"] = m.json();
        j["coding"] = code;
        emit(output, j.dump(2) + "\n");
      }
    } else if (*rn) {
      auto cfg = parse_config(rn_config);
      auto res = run_experiment(cfg);
      auto outs = write_outputs(cfg, res);
      for (const auto& v : res.verdicts)
        std::cout << v.statistic << " [" << v.variant << "] " << fmt_double(v.first) << " -> " << fmt_double(v.last)
                  << (v.monotone ? " monotone" : "") << (v.decays ? " decays" : "")
                  << (v.asserted ? (v.decays ? " PASS" : " FAIL") : "") << "\n";
      for (const auto& f : outs.files) std::cout << "wrote " << f << "\n";
      return outs.passed ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
