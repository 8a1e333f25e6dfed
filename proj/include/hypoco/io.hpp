#pragma once

#include "hypoco/certificate.hpp"
#include "hypoco/envelope.hpp"
#include "hypoco/model.hpp"
#include "hypoco/simulate.hpp"
#include "hypoco/types.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace hypoco::io {

// %.17g with the C locale's '.' separator; round-trips doubles exactly.
std::string format_real(real x);

// `key = value` text config; '#' starts a comment. Keys are consumed by the
// getters; check_all_used throws on any key nothing asked for, so typos fail
// loudly instead of silently using defaults.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  real get_real(const std::string& key);
  real get_real(const std::string& key, real fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  void check_all_used() const;

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

// Jump-rate expression registry: "<c>", "relu_dU", "<c0> + <c1>*relu_dU" and
// sums of such terms. relu_dU is the positive part of y U'(x): (U')_+ for
// a(., +1), (-U')_+ for a(., -1).
struct RateExpr {
  real c0 = 0.0;
  real c1 = 0.0;  // coefficient on relu_dU

  bool smooth() const { return c1 == 0.0; }
};

RateExpr parse_rate_expr(const std::string& text);
ScalarFn make_rate(const RateExpr& e, const PotentialSpec& pot, int y_sign);

// Keys: potential (+ its parameters: omega | alpha, gamma | ell, amplitude),
// optional c_u and domain echo.
PotentialSpec potential_from_config(ConfigFile& cfg);

// Adds rate_plus / rate_minus expressions and optional a_star, s_max, ds_max,
// d2s_max, u3_max overrides; wires the thinning window bound for kinked rates
// and marks them non-certifiable.
TelegraphRateSpec telegraph_from_config(ConfigFile& cfg);

void write_text(const std::string& path, const std::string& text);

std::string certificate_text(const RateCertificate& c);
std::string evals_csv(const std::vector<EvalRow>& rows, bool telegraph);

struct TableRow {
  real v = 0.0, b = 0.0;
  real rate_certified = 0.0;
  real rate_theoretical = 0.0;
};

std::string table_csv(const std::vector<TableRow>& rows);
std::string estimates_csv(const std::vector<sim::FtEstimate>& rows);
std::string snapshots_csv(const std::vector<sim::Histogram>& hists);

// Data columns first, then a '#'-prefixed summary block.
std::string domination_csv(const envelope::DominationReport& rep);

struct CheckLine {
  std::string name;
  bool pass = false;
  real value = 0.0;
  real threshold = 0.0;
};

std::string validation_text(const std::vector<CheckLine>& checks);

}  // namespace hypoco::io
