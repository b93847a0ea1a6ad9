#include "dissip/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace dissip {

namespace {

constexpr double kPruneRelative = 1e-12;

std::string_view block_name(VarBlock b) {
  switch (b) {
    case VarBlock::x: return "x";
    case VarBlock::u: return "u";
    case VarBlock::y: return "y";
    case VarBlock::xs: return "xs";
    case VarBlock::us: return "us";
    case VarBlock::ys: return "ys";
  }
  return "?";
}

VariableTable merge_tables(const VariableTable& a, const VariableTable& b) {
  if (a.unspecified()) return b;
  if (b.unspecified() || a == b) return a;
  throw PolynomialError("variable table mismatch");
}

std::string format_coefficient(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

}  // namespace

std::string to_string(Var v) {
  return std::string(block_name(v.block)) + std::to_string(v.index + 1);
}

int VariableTable::size(VarBlock b) const {
  switch (b) {
    case VarBlock::x: return nx;
    case VarBlock::u: return nu;
    case VarBlock::y: return ny;
    case VarBlock::xs: return nxs;
    case VarBlock::us: return nus;
    case VarBlock::ys: return nys;
  }
  return 0;
}

bool VariableTable::contains(Var v) const {
  return unspecified() || (v.index >= 0 && v.index < size(v.block));
}

std::vector<Var> VariableTable::block(VarBlock b) const {
  std::vector<Var> out;
  for (int i = 0; i < size(b); ++i) out.push_back({b, i});
  return out;
}

// ---------------------------------------------------------------- Monomial

Monomial::Monomial(Var v, int power) {
  if (power < 0) throw PolynomialError("negative exponent");
  if (power > 0) powers_.emplace_back(v, power);
  degree_ = power;
}

Monomial::Monomial(std::vector<std::pair<Var, int>> powers) {
  std::sort(powers.begin(), powers.end());
  for (auto& [v, k] : powers) {
    if (k < 0) throw PolynomialError("negative exponent");
    if (k == 0) continue;
    if (!powers_.empty() && powers_.back().first == v) {
      powers_.back().second += k;
    } else {
      powers_.emplace_back(v, k);
    }
    degree_ += k;
  }
}

int Monomial::power(Var v) const {
  for (const auto& [w, k] : powers_) {
    if (w == v) return k;
  }
  return 0;
}

Monomial Monomial::operator*(const Monomial& other) const {
  std::vector<std::pair<Var, int>> merged;
  merged.reserve(powers_.size() + other.powers_.size());
  auto a = powers_.begin();
  auto b = other.powers_.begin();
  while (a != powers_.end() || b != other.powers_.end()) {
    if (b == other.powers_.end() || (a != powers_.end() && a->first < b->first)) {
      merged.push_back(*a++);
    } else if (a == powers_.end() || b->first < a->first) {
      merged.push_back(*b++);
    } else {
      merged.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  Monomial m;
  m.powers_ = std::move(merged);
  m.degree_ = degree_ + other.degree_;
  return m;
}

std::strong_ordering Monomial::operator<=>(const Monomial& other) const {
  if (degree_ != other.degree_) return degree_ <=> other.degree_;
  auto a = powers_.begin();
  auto b = other.powers_.begin();
  while (a != powers_.end() && b != other.powers_.end()) {
    if (a->first != b->first) {
      // The side holding the earlier variable has more weight there.
      return a->first < b->first ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (a->second != b->second) return b->second <=> a->second;
    ++a;
    ++b;
  }
  // Equal degrees force both ranges to end together once all else matches.
  return std::strong_ordering::equal;
}

std::string Monomial::str() const {
  if (powers_.empty()) return "1";
  std::string s;
  for (const auto& [v, k] : powers_) {
    if (!s.empty()) s += '*';
    s += to_string(v);
    if (k > 1) s += '^' + std::to_string(k);
  }
  return s;
}

// -------------------------------------------------------------- Polynomial

Polynomial::Polynomial(double c) {
  if (c != 0.0) terms_.emplace(Monomial{}, c);
}

Polynomial::Polynomial(Var v) { terms_.emplace(Monomial(v), 1.0); }

Polynomial::Polynomial(Terms terms, VariableTable table)
    : terms_(std::move(terms)), table_(table) {
  for (const auto& [m, c] : terms_) {
    for (const auto& [v, k] : m.powers()) {
      if (!table_.contains(v)) throw PolynomialError("unknown variable " + to_string(v));
    }
  }
  prune();
}

Polynomial Polynomial::monomial(const Monomial& m, double c, VariableTable table) {
  return Polynomial(Terms{{m, c}}, table);
}

Polynomial Polynomial::with_table(VariableTable table) const {
  return Polynomial(terms_, table);
}

void Polynomial::prune() {
  double cmax = 0.0;
  for (const auto& [m, c] : terms_) cmax = std::max(cmax, std::abs(c));
  const double cut = kPruneRelative * cmax;
  std::erase_if(terms_, [cut](const auto& t) { return t.second == 0.0 || std::abs(t.second) < cut; });
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

std::vector<Var> Polynomial::variables() const {
  std::vector<Var> vars;
  for (const auto& [m, c] : terms_) {
    for (const auto& [v, k] : m.powers()) vars.push_back(v);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

Polynomial operator+(const Polynomial& p, const Polynomial& q) {
  Polynomial r;
  r.table_ = merge_tables(p.table_, q.table_);
  r.terms_ = p.terms_;
  for (const auto& [m, c] : q.terms_) r.terms_[m] += c;
  r.prune();
  return r;
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Polynomial operator-(const Polynomial& p, const Polynomial& q) { return p + (-q); }

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  Polynomial r;
  r.table_ = merge_tables(p.table_, q.table_);
  for (const auto& [mp, cp] : p.terms_) {
    for (const auto& [mq, cq] : q.terms_) r.terms_[mp * mq] += cp * cq;
  }
  r.prune();
  return r;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw PolynomialError("negative power");
  Polynomial r = Polynomial(1.0).with_table(table_);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

Polynomial Polynomial::derivative(Var v) const {
  if (!table_.contains(v)) throw PolynomialError("unknown variable " + to_string(v));
  Terms out;
  for (const auto& [m, c] : terms_) {
    const int k = m.power(v);
    if (k == 0) continue;
    std::vector<std::pair<Var, int>> powers = m.powers();
    for (auto& [w, e] : powers) {
      if (w == v) --e;
    }
    out[Monomial(std::move(powers))] += c * k;
  }
  return Polynomial(std::move(out), table_);
}

double Polynomial::eval(const std::map<Var, double>& point) const {
  double total = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (const auto& [v, k] : m.powers()) {
      auto it = point.find(v);
      if (it == point.end()) throw PolynomialError("missing value for " + to_string(v));
      t *= std::pow(it->second, k);
    }
    total += t;
  }
  return total;
}

Polynomial Polynomial::substitute(Var v, const Polynomial& q) const {
  return dissip::substitute(*this, std::map<Var, Polynomial>{{v, q}});
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  // Highest order first reads naturally.
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    const double mag = std::abs(c);
    if (s.empty()) {
      if (c < 0) s += "-";
    } else {
      s += c < 0 ? " - " : " + ";
    }
    s += format_coefficient(mag);
    if (!m.is_constant()) s += "*" + m.str();
  }
  return s;
}

// ------------------------------------------------------------ free functions

Polynomial add(const Polynomial& p, const Polynomial& q) { return p + q; }
Polynomial mul(const Polynomial& p, const Polynomial& q) { return p * q; }

std::vector<Polynomial> grad(const Polynomial& p, const std::vector<Var>& vars) {
  std::vector<Polynomial> g;
  g.reserve(vars.size());
  for (Var v : vars) g.push_back(p.derivative(v));
  return g;
}

double eval(const Polynomial& p, const std::map<Var, double>& point) { return p.eval(point); }

Polynomial substitute(const Polynomial& p, Var v, const Polynomial& q) { return p.substitute(v, q); }

Polynomial substitute(const Polynomial& p, const std::map<Var, Polynomial>& subs) {
  for (const auto& [v, q] : subs) {
    if (!p.table().contains(v)) throw PolynomialError("unknown variable " + to_string(v));
  }
  Polynomial result = Polynomial(0.0).with_table(p.table());
  // Cache powers of substituted polynomials.
  std::map<std::pair<Var, int>, Polynomial> cache;
  auto power_of = [&](Var v, int k) -> const Polynomial& {
    auto key = std::make_pair(v, k);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, subs.at(v).pow(k)).first;
    return it->second;
  };
  for (const auto& [m, c] : p.terms()) {
    std::vector<std::pair<Var, int>> kept;
    Polynomial factor(c);
    for (const auto& [v, k] : m.powers()) {
      if (subs.count(v)) {
        factor = factor * power_of(v, k);
      } else {
        kept.emplace_back(v, k);
      }
    }
    result = result + factor * Polynomial::monomial(Monomial(std::move(kept)));
  }
  return result;
}

// ------------------------------------------------------------------ parsing

Var parse_var(std::string_view name) {
  static constexpr std::pair<std::string_view, VarBlock> kPrefixes[] = {
      {"xs", VarBlock::xs}, {"us", VarBlock::us}, {"ys", VarBlock::ys},
      {"x", VarBlock::x},   {"u", VarBlock::u},   {"y", VarBlock::y}};
  for (const auto& [prefix, block] : kPrefixes) {
    if (name.size() > prefix.size() && name.substr(0, prefix.size()) == prefix) {
      auto digits = name.substr(prefix.size());
      int idx = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && idx >= 1) {
        return {block, idx - 1};
      }
    }
  }
  throw PolynomialError("bad variable name '" + std::string(name) + "'");
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Polynomial parse(VariableTable table) {
    Polynomial::Terms terms;
    skip_ws();
    if (at_end()) throw error("empty polynomial");
    bool first = true;
    while (!at_end()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = get() == '-' ? -1.0 : 1.0;
        skip_ws();
      } else if (!first) {
        throw error("expected '+' or '-'");
      }
      auto [m, c] = term();
      terms[m] += sign * c;
      first = false;
      skip_ws();
    }
    return Polynomial(std::move(terms), table);
  }

 private:
  std::pair<Monomial, double> term() {
    double coef = 1.0;
    std::vector<std::pair<Var, int>> powers;
    bool need_factor = true;
    while (need_factor) {
      skip_ws();
      if (at_end()) throw error("unexpected end");
      if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
        coef *= number();
      } else if (std::isalpha(static_cast<unsigned char>(peek()))) {
        std::size_t start = pos_;
        while (!at_end() && std::isalnum(static_cast<unsigned char>(peek()))) ++pos_;
        Var v = parse_var(s_.substr(start, pos_ - start));
        int k = 1;
        skip_ws();
        if (!at_end() && peek() == '^') {
          ++pos_;
          skip_ws();
          k = static_cast<int>(number());
        }
        powers.emplace_back(v, k);
      } else {
        throw error("unexpected character");
      }
      skip_ws();
      need_factor = !at_end() && peek() == '*';
      if (need_factor) ++pos_;
    }
    return {Monomial(std::move(powers)), coef};
  }

  double number() {
    std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) ++pos_;
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      ++pos_;
      if (!at_end() && (peek() == '+' || peek() == '-')) ++pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, value);
    if (ec != std::errc{} || ptr != s_.data() + pos_) throw error("bad number");
    return value;
  }

  PolynomialError error(const std::string& what) const {
    return PolynomialError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  char get() { return s_[pos_++]; }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, VariableTable table) {
  return Parser(text).parse(table);
}

}  // namespace dissip
