#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dissip {

/// Variable blocks of a polynomial ring. `xs`, `us`, `ys` are the starred
/// (equilibrium) copies of x, u, y used by equilibrium-independent programs.
enum class VarBlock : std::uint8_t { x, u, y, xs, us, ys };

struct Var {
  VarBlock block = VarBlock::x;
  int index = 0;  // zero based; printed one based

  auto operator<=>(const Var&) const = default;
};

inline Var X(int i) { return {VarBlock::x, i}; }
inline Var U(int i) { return {VarBlock::u, i}; }
inline Var Y(int i) { return {VarBlock::y, i}; }
inline Var Xs(int i) { return {VarBlock::xs, i}; }
inline Var Us(int i) { return {VarBlock::us, i}; }

std::string to_string(Var v);

/// Declared sizes of each block. A default-constructed table is
/// "unspecified" and compatible with any other table.
struct VariableTable {
  int nx = 0, nu = 0, ny = 0, nxs = 0, nus = 0, nys = 0;

  bool operator==(const VariableTable&) const = default;
  bool unspecified() const { return *this == VariableTable{}; }
  bool contains(Var v) const;
  int size(VarBlock b) const;
  std::vector<Var> block(VarBlock b) const;
};

class PolynomialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Power product with strictly positive exponents, sorted by variable.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(Var v, int power = 1);
  explicit Monomial(std::vector<std::pair<Var, int>> powers);

  int degree() const { return degree_; }
  int power(Var v) const;
  bool is_constant() const { return powers_.empty(); }
  const std::vector<std::pair<Var, int>>& powers() const { return powers_; }

  Monomial operator*(const Monomial& other) const;
  bool operator==(const Monomial& other) const { return powers_ == other.powers_; }
  /// Graded lexicographic order with later variables ranked higher, so
  /// 1 < x1 < x2 < x1^2 < x1*x2 < x2^2.
  std::strong_ordering operator<=>(const Monomial& other) const;

  std::string str() const;

 private:
  std::vector<std::pair<Var, int>> powers_;
  int degree_ = 0;
};

/// Sparse multivariate polynomial with double coefficients.
class Polynomial {
 public:
  using Terms = std::map<Monomial, double>;

  Polynomial() = default;
  Polynomial(double c);  // NOLINT(google-explicit-constructor)
  Polynomial(Var v);     // NOLINT(google-explicit-constructor)
  Polynomial(Terms terms, VariableTable table = {});

  static Polynomial monomial(const Monomial& m, double c = 1.0, VariableTable table = {});

  const Terms& terms() const { return terms_; }
  const VariableTable& table() const { return table_; }
  Polynomial with_table(VariableTable table) const;

  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coefficient(const Monomial& m) const;
  std::vector<Var> variables() const;

  friend Polynomial operator+(const Polynomial& p, const Polynomial& q);
  friend Polynomial operator-(const Polynomial& p, const Polynomial& q);
  friend Polynomial operator*(const Polynomial& p, const Polynomial& q);
  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& q) { return *this = *this + q; }
  Polynomial& operator-=(const Polynomial& q) { return *this = *this - q; }
  Polynomial& operator*=(const Polynomial& q) { return *this = *this * q; }

  Polynomial pow(int k) const;
  Polynomial derivative(Var v) const;
  double eval(const std::map<Var, double>& point) const;
  Polynomial substitute(Var v, const Polynomial& q) const;

  /// Textual form `3.5*x1^2*u1 - 2*x2`; round-trips through parse().
  std::string str() const;

 private:
  void prune();

  Terms terms_;
  VariableTable table_;
};

Polynomial add(const Polynomial& p, const Polynomial& q);
Polynomial mul(const Polynomial& p, const Polynomial& q);
std::vector<Polynomial> grad(const Polynomial& p, const std::vector<Var>& vars);
double eval(const Polynomial& p, const std::map<Var, double>& point);
Polynomial substitute(const Polynomial& p, Var v, const Polynomial& q);

/// Substitutes several variables simultaneously.
Polynomial substitute(const Polynomial& p, const std::map<Var, Polynomial>& subs);

Var parse_var(std::string_view name);
Polynomial parse_polynomial(std::string_view text, VariableTable table = {});

}  // namespace dissip
