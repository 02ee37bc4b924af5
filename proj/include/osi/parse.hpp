#ifndef OSI_PARSE_HPP
#define OSI_PARSE_HPP

// Text front ends: distribution and weight-scheme strings, the flat
// experiment config format, and single-column CSV extraction.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "distributions.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "mc_harness.hpp"
#include "weights.hpp"

namespace osi {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool try_double(std::string_view tok, double& out) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc{} && res.ptr == tok.data() + tok.size() && std::isfinite(out);
}

inline double to_double(std::string_view tok, std::string_view context) {
  double v = 0.0;
  if (!try_double(tok, v)) {
    std::ostringstream msg;
    msg << "invalid number '" << tok << "' in '" << context << "'";
    throw validation_error(msg.str());
  }
  return v;
}

inline long long to_integer(std::string_view tok, std::string_view context) {
  tok = trim(tok);
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    std::ostringstream msg;
    msg << "invalid integer '" << tok << "' in '" << context << "'";
    throw validation_error(msg.str());
  }
  return v;
}

inline int to_int(std::string_view tok, std::string_view context) {
  const long long v = to_integer(tok, context);
  if (v < -1000000000LL || v > 1000000000LL) {
    std::ostringstream msg;
    msg << "integer '" << tok << "' out of range in '" << context << "'";
    throw validation_error(msg.str());
  }
  return static_cast<int>(v);
}

inline void expect_count(const std::vector<std::string_view>& args, std::size_t want, std::string_view head,
                         std::string_view text) {
  if (args.size() != want) {
    std::ostringstream msg;
    msg << "'" << head << "' takes " << want << " parameter" << (want == 1 ? "" : "s") << ", got " << args.size()
        << " in '" << text << "'";
    throw validation_error(msg.str());
  }
}

} // namespace detail

/// "family:p1,p2", e.g. "gamma:2,1", "exponential:1", "degenerate:3".
inline Distribution parse_distribution(std::string_view text) {
  text = detail::trim(text);
  const auto colon = text.find(':');
  const std::string_view head = detail::trim(text.substr(0, colon));
  if (colon == std::string_view::npos) {
    std::ostringstream msg;
    msg << "distribution '" << text << "' needs the form family:p1,p2";
    throw validation_error(msg.str());
  }
  const auto args = detail::split(text.substr(colon + 1), ',');
  std::vector<double> p;
  for (auto a : args) p.push_back(detail::to_double(a, text));
  auto need = [&](std::size_t k) { detail::expect_count(args, k, head, text); };
  if (head == "gamma") return need(2), Distribution::gamma(p[0], p[1]);
  if (head == "lognormal") return need(2), Distribution::lognormal(p[0], p[1]);
  if (head == "weibull") return need(2), Distribution::weibull(p[0], p[1]);
  if (head == "lomax") return need(2), Distribution::lomax(p[0], p[1]);
  if (head == "exponential") return need(1), Distribution::exponential(p[0]);
  if (head == "uniform") return need(2), Distribution::uniform(p[0], p[1]);
  if (head == "degenerate") return need(1), Distribution::degenerate(p[0]);
  std::ostringstream msg;
  msg << "unknown distribution family '" << head << "'";
  throw validation_error(msg.str());
}

/// gini | mth:m | ext:m,j,k | sgini:m,nu | sginios:m,nu | lower:m,i |
/// upper:m,i | custom:a1,a2,...
inline WeightScheme parse_weights(std::string_view text) {
  text = detail::trim(text);
  if (text == "gini") return gini();
  const auto colon = text.find(':');
  const std::string_view head = detail::trim(text.substr(0, colon));
  if (colon == std::string_view::npos) {
    std::ostringstream msg;
    msg << "unknown weight scheme '" << text << "'";
    throw validation_error(msg.str());
  }
  const auto args = detail::split(text.substr(colon + 1), ',');
  auto need = [&](std::size_t k) { detail::expect_count(args, k, head, text); };
  auto i = [&](std::size_t k) { return detail::to_int(args[k], text); };
  if (head == "mth") return need(1), mth_gini(i(0));
  if (head == "ext") return need(3), extended_mth_gini(i(0), i(1), i(2));
  if (head == "sgini") return need(2), s_gini_table1(i(0), detail::to_double(args[1], text));
  if (head == "sginios") return need(2), s_gini_orderstat(i(0), i(1));
  if (head == "lower") return need(2), extended_lower_upper(i(0), i(1), GiniSide::lower);
  if (head == "upper") return need(2), extended_lower_upper(i(0), i(1), GiniSide::upper);
  if (head == "custom") {
    std::vector<double> a;
    for (auto tok : args) a.push_back(detail::to_double(tok, text));
    double s = 0.0;
    for (double v : a) s += v;
    return custom(std::move(a), std::abs(s) <= WeightScheme::zero_sum_tolerance);
  }
  std::ostringstream msg;
  msg << "unknown weight scheme '" << head << "'";
  throw validation_error(msg.str());
}

inline EstimatorMethod parse_estimator_method(std::string_view s) {
  if (s == "fast") return EstimatorMethod::fast;
  if (s == "enumerate") return EstimatorMethod::enumerate;
  if (s == "subsample") return EstimatorMethod::subsample;
  throw validation_error("unknown estimator method '" + std::string(s) + "'");
}

namespace detail {

struct ConfigValue {
  std::vector<std::string> items;  // one item for scalars
  bool array = false;
  int line = 0;
};

inline std::string unquote(std::string_view v, int line) {
  v = trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
    if (v.back() != v.front()) {
      std::ostringstream msg;
      msg << "config line " << line << ": unterminated string " << v;
      throw validation_error(msg.str());
    }
    return std::string(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

// Strips a '#' comment that is not inside a quoted string.
inline std::string_view strip_comment(std::string_view s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

// Splits an array body on commas outside quotes.
inline std::vector<std::string> split_items(std::string_view body, int line) {
  std::vector<std::string> out;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    const char c = i < body.size() ? body[i] : ',';
    if (quote) {
      if (c == quote) quote = 0;
      if (i == body.size()) {
        std::ostringstream msg;
        msg << "config line " << line << ": unterminated string";
        throw validation_error(msg.str());
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == ',') {
      const auto item = trim(body.substr(start, i - start));
      if (!item.empty()) out.push_back(unquote(item, line));
      start = i + 1;
    }
  }
  return out;
}

inline std::map<std::string, ConfigValue> read_key_values(std::istream& in) {
  std::map<std::string, ConfigValue> kv;
  std::string raw;
  int line = 0;
  std::string pending_key;
  std::string pending_body;
  int pending_line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(strip_comment(raw));
    if (!pending_key.empty()) {
      pending_body += ' ';
      pending_body += s;
      if (s.find(']') == std::string_view::npos) continue;
      const auto body = std::string_view(pending_body);
      kv[pending_key] = {split_items(body.substr(0, body.rfind(']')), pending_line), true, pending_line};
      pending_key.clear();
      continue;
    }
    if (s.empty()) continue;
    if (s.front() == '[') {
      std::ostringstream msg;
      msg << "config line " << line << ": sections are not supported (" << s << ")";
      throw validation_error(msg.str());
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      std::ostringstream msg;
      msg << "config line " << line << ": expected key = value, got '" << s << "'";
      throw validation_error(msg.str());
    }
    const std::string key(trim(s.substr(0, eq)));
    const auto value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream msg;
      msg << "config line " << line << ": empty key or value";
      throw validation_error(msg.str());
    }
    if (kv.count(key)) {
      std::ostringstream msg;
      msg << "config line " << line << ": duplicate key '" << key << "'";
      throw validation_error(msg.str());
    }
    if (value.front() == '[') {
      const auto close = value.rfind(']');
      if (close == std::string_view::npos) {
        pending_key = key;
        pending_body = std::string(value.substr(1));
        pending_line = line;
        continue;
      }
      kv[key] = {split_items(value.substr(1, close - 1), line), true, line};
    } else {
      kv[key] = {{unquote(value, line)}, false, line};
    }
  }
  if (!pending_key.empty()) {
    std::ostringstream msg;
    msg << "config line " << pending_line << ": unterminated array for key '" << pending_key << "'";
    throw validation_error(msg.str());
  }
  return kv;
}

} // namespace detail

/// Flat key = value experiment description. Recognized keys:
///   distributions     array of distribution strings (required)
///   n_values          array of sample sizes (required)
///   scheme            weight-scheme string (default "mth:3")
///   r_mc, b_combs, r_true, master_seed      integers
///   estimator_method  "fast" | "subsample"
///   benchmark         "quadrature" | "mc"
/// Unknown or duplicate keys are errors.
inline ExperimentConfig parse_config(std::istream& in) {
  static const std::set<std::string> known = {"distributions", "n_values", "scheme", "r_mc", "b_combs",
                                              "r_true", "estimator_method", "benchmark", "master_seed"};
  const auto kv = detail::read_key_values(in);
  for (const auto& [key, v] : kv)
    if (!known.count(key)) {
      std::ostringstream msg;
      msg << "config line " << v.line << ": unknown key '" << key << "'";
      throw validation_error(msg.str());
    }
  auto scalar = [&](const std::string& key) -> const std::string& {
    const auto& v = kv.at(key);
    if (v.array || v.items.size() != 1) {
      std::ostringstream msg;
      msg << "config line " << v.line << ": key '" << key << "' expects a single value";
      throw validation_error(msg.str());
    }
    return v.items.front();
  };
  auto list = [&](const std::string& key) -> const std::vector<std::string>& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw validation_error("config: missing required key '" + key + "'");
    return it->second.items;
  };
  auto count = [&](const std::string& key) {
    const long long v = detail::to_integer(scalar(key), key);
    if (v < 1) throw validation_error("config: key '" + key + "' must be >= 1");
    return static_cast<std::size_t>(v);
  };

  ExperimentConfig cfg;
  for (const auto& s : list("distributions")) cfg.distributions.push_back(parse_distribution(s));
  for (const auto& s : list("n_values")) cfg.n_values.push_back(detail::to_int(s, "n_values"));
  if (kv.count("scheme")) cfg.scheme = parse_weights(scalar("scheme"));
  if (kv.count("r_mc")) cfg.r_mc = count("r_mc");
  if (kv.count("b_combs")) cfg.b_combs = count("b_combs");
  if (kv.count("r_true")) cfg.r_true = count("r_true");
  if (kv.count("estimator_method")) cfg.estimator_method = parse_estimator_method(scalar("estimator_method"));
  if (kv.count("benchmark")) {
    const auto& b = scalar("benchmark");
    if (b == "quadrature")
      cfg.benchmark = Benchmark::quadrature;
    else if (b == "mc")
      cfg.benchmark = Benchmark::mc;
    else
      throw validation_error("config: unknown benchmark '" + b + "'");
  }
  if (kv.count("master_seed")) {
    const auto& s = scalar("master_seed");
    std::uint64_t seed = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw validation_error("config: invalid master_seed '" + s + "'");
    cfg.master_seed = seed;
  }
  validate(cfg);
  return cfg;
}

namespace detail {

// One CSV record, RFC 4180 quoting; records spanning lines are not supported.
inline std::vector<std::string> csv_record(std::string_view line, int line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) {
    std::ostringstream msg;
    msg << "line " << line_no << ": unterminated quoted field";
    throw validation_error(msg.str());
  }
  out.push_back(std::move(cur));
  return out;
}

} // namespace detail

/// Values of the named column. The first line is the header; blank lines
/// are skipped; non-numeric, empty or negative cells are errors.
inline std::vector<double> read_csv_column(std::istream& in, const std::string& column) {
  std::string raw;
  int line_no = 0;
  std::size_t col = 0;
  bool have_header = false;
  std::vector<double> out;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (detail::trim(raw).empty()) continue;
    const auto fields = detail::csv_record(raw, line_no);
    if (!have_header) {
      std::size_t i = 0;
      for (; i < fields.size(); ++i)
        if (detail::trim(fields[i]) == column) break;
      if (i == fields.size()) throw validation_error("csv: no column named '" + column + "'");
      col = i;
      have_header = true;
      continue;
    }
    if (col >= fields.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": missing value for column '" << column << "'";
      throw validation_error(msg.str());
    }
    double v = 0.0;
    if (!detail::try_double(fields[col], v)) {
      std::ostringstream msg;
      msg << "line " << line_no << ": non-numeric value '" << fields[col] << "' in column '" << column << "'";
      throw validation_error(msg.str());
    }
    if (v < 0) {
      std::ostringstream msg;
      msg << "line " << line_no << ": negative value " << fields[col] << " in column '" << column << "'";
      throw validation_error(msg.str());
    }
    out.push_back(v);
  }
  if (!have_header) throw validation_error("csv: empty input");
  if (out.empty()) throw validation_error("csv: column '" + column + "' has no data rows");
  return out;
}

} // namespace osi

#endif // OSI_PARSE_HPP
