#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dissip/conic.hpp"

namespace dissip {

// --------------------------------------------------------------- AffineExpr

AffineExpr AffineExpr::variable(int var, double coeff) {
  AffineExpr e;
  if (coeff != 0.0) e.terms.emplace_back(var, coeff);
  return e;
}

double AffineExpr::coefficient(int var) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), std::make_pair(var, -HUGE_VAL));
  return (it != terms.end() && it->first == var) ? it->second : 0.0;
}

double AffineExpr::eval(const VectorXd& y) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * y(i);
  return v;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  constant += other.constant;
  if (other.terms.empty()) return *this;
  std::vector<std::pair<int, double>> merged;
  merged.reserve(terms.size() + other.terms.size());
  auto a = terms.begin();
  auto b = other.terms.begin();
  while (a != terms.end() || b != other.terms.end()) {
    if (b == other.terms.end() || (a != terms.end() && a->first < b->first)) {
      merged.push_back(*a++);
    } else if (a == terms.end() || b->first < a->first) {
      merged.push_back(*b++);
    } else {
      const double c = a->second + b->second;
      if (c != 0.0) merged.emplace_back(a->first, c);
      ++a;
      ++b;
    }
  }
  terms = std::move(merged);
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) { return *this += -1.0 * other; }

AffineExpr& AffineExpr::operator*=(double s) {
  constant *= s;
  if (s == 0.0) {
    terms.clear();
  } else {
    for (auto& [i, c] : terms) c *= s;
  }
  return *this;
}

// ------------------------------------------------------------------- SymVar

int SymVar::index(int r, int c) const {
  if (r > c) std::swap(r, c);
  if (r < 0 || c >= dim) throw std::out_of_range("SymVar::index");
  // Row-major upper triangle.
  return offset + r * dim - r * (r - 1) / 2 + (c - r);
}

// ------------------------------------------------------------- AffineMatrix

AffineMatrix::AffineMatrix(Eigen::Index rows, Eigen::Index cols) : constant_(MatrixXd::Zero(rows, cols)) {}

AffineMatrix AffineMatrix::constant(const MatrixXd& c) {
  AffineMatrix m;
  m.constant_ = c;
  return m;
}

AffineMatrix AffineMatrix::variable(const SymVar& v) {
  AffineMatrix m(v.dim, v.dim);
  for (int r = 0; r < v.dim; ++r) {
    for (int c = r; c < v.dim; ++c) {
      MatrixXd e = MatrixXd::Zero(v.dim, v.dim);
      e(r, c) = 1.0;
      e(c, r) = 1.0;
      m.coeffs_.emplace(v.index(r, c), std::move(e));
    }
  }
  return m;
}

AffineMatrix AffineMatrix::scalar(const AffineExpr& e) {
  AffineMatrix m(1, 1);
  m.add_entry(0, 0, e);
  return m;
}

AffineExpr AffineMatrix::entry(Eigen::Index r, Eigen::Index c) const {
  AffineExpr e(constant_(r, c));
  for (const auto& [v, m] : coeffs_) {
    if (m(r, c) != 0.0) e.terms.emplace_back(v, m(r, c));
  }
  return e;
}

void AffineMatrix::add_entry(Eigen::Index r, Eigen::Index c, const AffineExpr& e) {
  constant_(r, c) += e.constant;
  for (const auto& [v, coeff] : e.terms) {
    auto it = coeffs_.find(v);
    if (it == coeffs_.end()) it = coeffs_.emplace(v, MatrixXd::Zero(rows(), cols())).first;
    it->second(r, c) += coeff;
  }
}

void AffineMatrix::add_block(Eigen::Index r0, Eigen::Index c0, const AffineMatrix& m) {
  if (r0 + m.rows() > rows() || c0 + m.cols() > cols()) throw std::out_of_range("AffineMatrix::add_block");
  constant_.block(r0, c0, m.rows(), m.cols()) += m.constant_;
  for (const auto& [v, coeff] : m.coeffs_) {
    auto it = coeffs_.find(v);
    if (it == coeffs_.end()) it = coeffs_.emplace(v, MatrixXd::Zero(rows(), cols())).first;
    it->second.block(r0, c0, m.rows(), m.cols()) += coeff;
  }
}

AffineMatrix AffineMatrix::block(Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) const {
  AffineMatrix out = constant(constant_.block(r0, c0, nr, nc));
  for (const auto& [v, coeff] : coeffs_) {
    MatrixXd b = coeff.block(r0, c0, nr, nc);
    if (!b.isZero(0.0)) out.coeffs_.emplace(v, std::move(b));
  }
  return out;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out = constant(constant_.transpose());
  for (const auto& [v, coeff] : coeffs_) out.coeffs_.emplace(v, coeff.transpose());
  return out;
}

MatrixXd AffineMatrix::eval(const VectorXd& y) const {
  MatrixXd out = constant_;
  for (const auto& [v, coeff] : coeffs_) out += y(v) * coeff;
  return out;
}

void AffineMatrix::check_same_shape(const AffineMatrix& other) const {
  if (rows() != other.rows() || cols() != other.cols()) throw std::invalid_argument("AffineMatrix shape mismatch");
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
  check_same_shape(other);
  add_block(0, 0, other);
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) { return *this += -1.0 * other; }

AffineMatrix& AffineMatrix::operator*=(double s) {
  constant_ *= s;
  for (auto& [v, coeff] : coeffs_) coeff *= s;
  return *this;
}

AffineMatrix operator*(const MatrixXd& l, const AffineMatrix& m) {
  if (l.cols() != m.rows()) throw std::invalid_argument("AffineMatrix product shape mismatch");
  AffineMatrix out = AffineMatrix::constant(l * m.constant_);
  for (const auto& [v, coeff] : m.coeffs_) out.coeffs_.emplace(v, l * coeff);
  return out;
}

AffineMatrix operator*(const AffineMatrix& m, const MatrixXd& r) {
  if (m.cols() != r.rows()) throw std::invalid_argument("AffineMatrix product shape mismatch");
  AffineMatrix out = AffineMatrix::constant(m.constant_ * r);
  for (const auto& [v, coeff] : m.coeffs_) out.coeffs_.emplace(v, coeff * r);
  return out;
}

AffineMatrix congruence(const MatrixXd& l, const AffineMatrix& m) { return l.transpose() * m * l; }

// ------------------------------------------------------------- ConicProblem

int ConicProblem::add_scalar(std::string name) {
  names_.push_back(name.empty() ? "y" + std::to_string(names_.size()) : std::move(name));
  return static_cast<int>(names_.size()) - 1;
}

SymVar ConicProblem::add_symmetric(int dim, std::string name) {
  if (dim < 0) throw std::invalid_argument("negative matrix dimension");
  SymVar v{num_variables(), dim};
  if (name.empty()) name = "S" + std::to_string(v.offset);
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      names_.push_back(name + "[" + std::to_string(r) + "," + std::to_string(c) + "]");
    }
  }
  return v;
}

void ConicProblem::check_expr(const AffineExpr& e) const {
  for (const auto& [v, c] : e.terms) {
    if (v < 0 || v >= num_variables()) throw std::invalid_argument("reference to undeclared variable");
  }
}

void ConicProblem::check_matrix(const AffineMatrix& m) const {
  if (m.rows() != m.cols()) throw std::invalid_argument("LMI expression must be square");
  if (!is_symmetric(m.constant_part())) throw std::invalid_argument("LMI expression must be symmetric");
  for (const auto& [v, c] : m.coefficients()) {
    if (v < 0 || v >= num_variables()) throw std::invalid_argument("reference to undeclared variable");
    if (!is_symmetric(c)) throw std::invalid_argument("LMI expression must be symmetric");
  }
}

void ConicProblem::add_equality(const AffineExpr& e, std::string label) {
  check_expr(e);
  equalities_.push_back({e, std::move(label)});
}

void ConicProblem::add_lmi(const AffineMatrix& m, LmiSense sense, bool strict, std::string label) {
  check_matrix(m);
  if (m.rows() == 0) return;
  lmis_.push_back({m, sense, strict, std::move(label)});
}

void ConicProblem::add_psd(const SymVar& v, bool strict, std::string label) {
  add_lmi(AffineMatrix::variable(v), LmiSense::psd, strict, std::move(label));
}

void ConicProblem::add_linear_objective(const AffineExpr& e) {
  check_expr(e);
  linear_ += e;
}

void ConicProblem::add_squared_objective(const AffineExpr& e, double weight) {
  check_expr(e);
  if (weight < 0) throw std::invalid_argument("negative objective weight");
  if (weight > 0) squares_.emplace_back(e, weight);
}

void ConicProblem::add_distance_objective(const AffineMatrix& m, const MatrixXd& target, double weight) {
  if (m.rows() != target.rows() || m.cols() != target.cols()) throw std::invalid_argument("distance target shape mismatch");
  const bool symmetric = m.rows() == m.cols() && is_symmetric(target);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = symmetric ? r : 0; c < m.cols(); ++c) {
      const double w = (symmetric && r != c) ? 2.0 * weight : weight;
      add_squared_objective(m.entry(r, c) - AffineExpr(target(r, c)), w);
    }
  }
}

double ConicProblem::objective_value(const VectorXd& y) const {
  double v = linear_.eval(y);
  for (const auto& [e, w] : squares_) {
    const double r = e.eval(y);
    v += w * r * r;
  }
  return v;
}

void ConicProblem::dump_sdpa(std::ostream& os) const {
  // Dual form: find y with F0 + Σ y_i F_i ⪰ 0. Block 1 is a diagonal LP
  // block holding each equality twice (e ≥ 0, −e ≥ 0).
  os << "* dissip conic problem dump (SDPA sparse layout, dual form F0 + sum y_i F_i >= 0)\n";
  os << "* objective: linear part + " << squares_.size() << " weighted squares (not representable; listed below)\n";
  for (const auto& [e, w] : squares_) {
    os << "* square w=" << w << " c=" << e.constant;
    for (const auto& [v, c] : e.terms) os << " " << v + 1 << ":" << c;
    os << "\n";
  }
  const int nblocks = static_cast<int>(lmis_.size()) + (equalities_.empty() ? 0 : 1);
  os << num_variables() << "\n" << nblocks << "\n";
  if (!equalities_.empty()) os << -2 * static_cast<int>(equalities_.size()) << " ";
  for (const auto& l : lmis_) os << l.expr.rows() << " ";
  os << "\n";
  for (int v = 0; v < num_variables(); ++v) os << linear_.coefficient(v) << (v + 1 < num_variables() ? " " : "\n");
  if (num_variables() == 0) os << "\n";
  // Entries: matno blkno i j value. SDPA's F0 enters with a minus sign.
  int block = 1;
  if (!equalities_.empty()) {
    for (std::size_t k = 0; k < equalities_.size(); ++k) {
      const auto& e = equalities_[k].expr;
      const int i1 = static_cast<int>(2 * k + 1), i2 = i1 + 1;
      if (e.constant != 0.0) {
        os << 0 << " " << block << " " << i1 << " " << i1 << " " << -e.constant << "\n";
        os << 0 << " " << block << " " << i2 << " " << i2 << " " << e.constant << "\n";
      }
      for (const auto& [v, c] : e.terms) {
        os << v + 1 << " " << block << " " << i1 << " " << i1 << " " << c << "\n";
        os << v + 1 << " " << block << " " << i2 << " " << i2 << " " << -c << "\n";
      }
    }
    ++block;
  }
  for (const auto& l : lmis_) {
    const double s = l.sense == LmiSense::psd ? 1.0 : -1.0;
    auto emit = [&](int mat, const MatrixXd& m, double sign) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i; j < m.cols(); ++j) {
          if (m(i, j) != 0.0) os << mat << " " << block << " " << i + 1 << " " << j + 1 << " " << sign * m(i, j) << "\n";
        }
      }
    };
    emit(0, l.expr.constant_part(), -s);
    for (const auto& [v, c] : l.expr.coefficients()) emit(v + 1, c, s);
    ++block;
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Inaccurate: return "Inaccurate";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

MatrixXd SolveReport::value(const SymVar& v) const {
  MatrixXd m(v.dim, v.dim);
  for (int r = 0; r < v.dim; ++r) {
    for (int c = r; c < v.dim; ++c) m(r, c) = m(c, r) = values(v.index(r, c));
  }
  return m;
}

}  // namespace dissip
