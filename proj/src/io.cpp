#include "hypoco/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hypoco::io {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

real parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const real x = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || t.empty())
    throw std::invalid_argument("config: key '" + key + "' is not a number: '" + text + "'");
  return x;
}

std::string bool_str(bool v) { return v ? "1" : "0"; }

}  // namespace

std::string format_real(real x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " has empty key");
    if (!cfg.kv_.emplace(key, value).second)
      throw std::invalid_argument("config: duplicate key '" + key + "'");
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

bool ConfigFile::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string ConfigFile::get_string(const std::string& key) {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw std::invalid_argument("config: missing key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) {
  return has(key) ? get_string(key) : fallback;
}

real ConfigFile::get_real(const std::string& key) { return parse_real(key, get_string(key)); }

real ConfigFile::get_real(const std::string& key, real fallback) {
  return has(key) ? get_real(key) : fallback;
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const std::string t = trim(get_string(key));
  char* end = nullptr;
  const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || t.empty())
    throw std::invalid_argument("config: key '" + key + "' is not an unsigned integer");
  return x;
}

void ConfigFile::check_all_used() const {
  std::string unknown;
  for (const auto& [key, value] : kv_)
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw std::invalid_argument("config: unknown keys: " + unknown);
}

RateExpr parse_rate_expr(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw std::invalid_argument("rate expression: empty");

  RateExpr e;
  size_t pos = 0;
  while (pos <= s.size()) {
    const size_t plus = s.find('+', pos + 1);  // leading sign belongs to the term
    const std::string term = s.substr(pos, plus == std::string::npos ? plus : plus - pos);
    if (term.empty()) throw std::invalid_argument("rate expression: empty term in '" + text + "'");

    const size_t star = term.find('*');
    std::string coeff, symbol;
    if (star == std::string::npos) {
      if (term == "relu_dU") {
        symbol = term;
        coeff = "1";
      } else {
        coeff = term;
      }
    } else {
      coeff = term.substr(0, star);
      symbol = term.substr(star + 1);
    }

    char* end = nullptr;
    const real c = std::strtod(coeff.c_str(), &end);
    if (end != coeff.c_str() + coeff.size() || coeff.empty())
      throw std::invalid_argument("rate expression: bad coefficient in '" + text + "'");
    if (symbol.empty())
      e.c0 += c;
    else if (symbol == "relu_dU")
      e.c1 += c;
    else
      throw std::invalid_argument("rate expression: unknown symbol '" + symbol + "'");

    if (plus == std::string::npos) break;
    pos = plus + 1;
  }
  return e;
}

ScalarFn make_rate(const RateExpr& e, const PotentialSpec& pot, int y_sign) {
  if (e.c1 == 0.0) {
    const real c = e.c0;
    return [c](real) { return c; };
  }
  if (!pot.has_callables())
    throw std::invalid_argument("make_rate: relu_dU needs potential callables");
  const ScalarFn du = pot.du;
  const real c0 = e.c0, c1 = e.c1;
  const real sgn = y_sign >= 0 ? 1.0 : -1.0;
  return [du, c0, c1, sgn](real x) { return c0 + c1 * std::max(0.0, sgn * du(x)); };
}

PotentialSpec potential_from_config(ConfigFile& cfg) {
  const std::string name = cfg.get_string("potential");
  std::optional<real> cu;
  if (cfg.has("c_u")) cu = cfg.get_real("c_u");

  std::vector<real> params;
  if (name == "quadratic") {
    params = {cfg.get_real("omega")};
  } else if (name == "double_well") {
    params = {cfg.get_real("alpha"), cfg.get_real("gamma")};
  } else if (name == "cosine_torus") {
    params = {cfg.get_real("ell"), cfg.get_real("amplitude")};
  } else {
    throw std::invalid_argument("config: unknown potential '" + name + "'");
  }
  PotentialSpec pot = build_potential(name, params, cu);

  if (cfg.has("domain")) {
    const std::string dom = cfg.get_string("domain");
    const bool torus = pot.domain.kind == Domain::Kind::Torus;
    if (dom != (torus ? "torus" : "line"))
      throw std::invalid_argument("config: domain '" + dom + "' does not match potential '" +
                                  name + "'");
  }
  return pot;
}

TelegraphRateSpec telegraph_from_config(ConfigFile& cfg) {
  PotentialSpec pot = potential_from_config(cfg);
  const RateExpr ep = parse_rate_expr(cfg.get_string("rate_plus"));
  const RateExpr em = parse_rate_expr(cfg.get_string("rate_minus"));

  std::optional<real> a_star, s_max, ds_max;
  if (cfg.has("a_star")) a_star = cfg.get_real("a_star");
  if (cfg.has("s_max")) s_max = cfg.get_real("s_max");
  if (cfg.has("ds_max")) ds_max = cfg.get_real("ds_max");

  const PotentialSpec pot_copy = pot;  // window bound outlives the moved spec
  TelegraphRateSpec t = build_telegraph_spec(std::move(pot), make_rate(ep, pot_copy, +1),
                                             make_rate(em, pot_copy, -1), a_star, s_max, ds_max);
  t.d2s_max = cfg.get_real("d2s_max", 0.0);
  t.u3_max = cfg.get_real("u3_max", 0.0);
  t.smooth_rates = ep.smooth() && em.smooth();
  t.rate_window_bound = [pot_copy, ep, em](real lo, real hi) {
    const real du_sup =
        (ep.c1 == 0.0 && em.c1 == 0.0) ? 0.0 : sup_abs_du(pot_copy, lo, hi);
    const real bp = ep.c0 + std::max(0.0, ep.c1) * du_sup;
    const real bm = em.c0 + std::max(0.0, em.c1) * du_sup;
    return std::max(bp, bm);
  };
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string certificate_text(const RateCertificate& c) {
  std::ostringstream out;
  const auto kv = [&](const char* key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  const auto kvr = [&](const char* key, real value) { kv(key, format_real(value)); };

  kv("model", c.model);
  const bool kfp = c.model == "kfp";
  if (kfp) {
    kv("variant", c.variant);
    kvr("v", c.v);
    kvr("b", c.b);
  } else {
    kvr("a_star", c.a_star);
    kvr("alpha", c.alpha);
  }
  kvr("c_u", c.c_u);
  kvr("u2_min", c.u2_min);
  kvr("u2_max", c.u2_max);
  kvr("A", c.A);
  kvr("beta", c.beta);
  kvr("k", c.k);
  kvr("tau", c.tau);
  kvr("lambda", c.lambda);
  kvr("u", c.u);
  kvr("v_hat", c.v_hat);
  kvr("w", c.w);
  kvr("eta", c.eta);
  kvr("nu_star", c.nu_star);
  kvr("cu_div", c.cu_div);
  if (!kfp) {
    kvr("h_k", c.h_k);
    kvr("lambda_k", c.lambda_k);
    kvr("sup_h", c.sup_h);
  }
  kv("q1", c.q1.str());
  kv("q3", c.q3.str());
  kv("pi", c.pi.str());
  kvr("rate", c.rate);
  kv("feasible", bool_str(c.feasible));
  for (const auto& [name, value] : c.assumptions) kv(("assumption." + name).c_str(), format_real(value));
  return out.str();
}

std::string evals_csv(const std::vector<EvalRow>& rows, bool telegraph) {
  std::ostringstream out;
  if (telegraph)
    out << "A,beta,alpha,k,tau,lambda,eta,nu_star,h_k,lambda_k,sup_h,rate,feasible\n";
  else
    out << "A,beta,k,tau,lambda,eta,nu_star,rate,feasible\n";
  for (const EvalRow& r : rows) {
    out << format_real(r.A) << ',' << format_real(r.beta) << ',';
    if (telegraph) out << format_real(r.alpha) << ',';
    out << format_real(r.k) << ',' << format_real(r.tau) << ',' << format_real(r.lambda) << ','
        << format_real(r.eta) << ',' << format_real(r.nu_star) << ',';
    if (telegraph)
      out << format_real(r.h_k) << ',' << format_real(r.lambda_k) << ',' << format_real(r.sup_h)
          << ',';
    out << format_real(r.rate) << ',' << bool_str(r.feasible) << "\n";
  }
  return out.str();
}

std::string table_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << "v,b,rate_certified,rate_theoretical\n";
  for (const TableRow& r : rows)
    out << format_real(r.v) << ',' << format_real(r.b) << ',' << format_real(r.rate_certified)
        << ',' << format_real(r.rate_theoretical) << "\n";
  return out.str();
}

std::string estimates_csv(const std::vector<sim::FtEstimate>& rows) {
  std::ostringstream out;
  out << "t,F_hat,stderr,bias_correction\n";
  for (const sim::FtEstimate& r : rows)
    out << format_real(r.t) << ',' << format_real(r.F_hat) << ',' << format_real(r.std_err) << ','
        << format_real(r.bias_correction) << "\n";
  return out.str();
}

std::string snapshots_csv(const std::vector<sim::Histogram>& hists) {
  std::ostringstream out;
  out << "t,bin_center,density\n";
  for (const sim::Histogram& h : hists)
    for (size_t i = 0; i < h.centers.size(); ++i)
      out << format_real(h.t) << ',' << format_real(h.centers[i]) << ','
          << format_real(h.density[i]) << "\n";
  return out.str();
}

std::string domination_csv(const envelope::DominationReport& rep) {
  std::ostringstream out;
  out << "t,F,phi,corrected_bound,violation\n";
  for (size_t i = 0; i < rep.t.size(); ++i)
    out << format_real(rep.t[i]) << ',' << format_real(rep.F[i]) << ',' << format_real(rep.phi[i])
        << ',' << format_real(rep.corrected_bound[i]) << ',' << format_real(rep.violation[i])
        << "\n";
  out << "# max_violation = " << format_real(rep.max_violation) << "\n";
  out << "# tol = " << format_real(rep.tol) << "\n";
  out << "# dominated = " << bool_str(rep.dominated) << "\n";
  out << "# excursion_count = " << rep.excursions.size() << "\n";
  out << "# max_excursion_length = " << format_real(rep.max_excursion_length) << "\n";
  out << "# threshold_sqrt = " << format_real(rep.threshold_sqrt) << "\n";
  out << "# threshold_plain = " << format_real(rep.threshold_plain) << "\n";
  return out.str();
}

std::string validation_text(const std::vector<CheckLine>& checks) {
  std::ostringstream out;
  size_t failed = 0;
  for (const CheckLine& c : checks) {
    out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  value=" << format_real(c.value)
        << "  threshold=" << format_real(c.threshold) << "\n";
    if (!c.pass) ++failed;
  }
  out << (failed == 0 ? "ALL CHECKS PASSED" : std::to_string(failed) + " CHECK(S) FAILED") << "\n";
  return out.str();
}

}  // namespace hypoco::io
