#include "mframe/liegroup.hpp"

#include <random>

#include "mframe/numeric.hpp"

namespace mframe::liegroup {

using symexpr::Bindings;
using symexpr::diff;
using symexpr::subst;

Matrix multiply(const Matrix& a, const Matrix& b) {
  std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
  Matrix out(n, std::vector<Expr>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      Expr s;
      for (std::size_t l = 0; l < k; ++l)
        if (!a[i][l].is_zero() && !b[l][j].is_zero()) s += a[i][l] * b[l][j];
      out[i][j] = s;
    }
  return out;
}

Matrix transpose(const Matrix& a) {
  if (a.empty()) return {};
  Matrix out(a[0].size(), std::vector<Expr>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[j][i] = a[i][j];
  return out;
}

Matrix to_matrix(const RationalMatrix& m) {
  Matrix out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const auto& q : m[i]) out[i].push_back(Expr(q));
  return out;
}

Matrix map(const Matrix& m, const std::function<Expr(const Expr&)>& f) {
  Matrix out = m;
  for (auto& row : out)
    for (auto& e : row) e = f(e);
  return out;
}

Matrix inverse(const Matrix& a0) {
  Matrix m = a0;
  std::size_t n = m.size();
  Matrix inv(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = Expr(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && symexpr::is_zero(m[p][c])) ++p;
    if (p == n) throw RankDeficient("matrix is singular");
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    Expr piv = m[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      m[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c].is_zero()) continue;
      Expr f = m[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

std::optional<RationalMatrix> inverse(const RationalMatrix& a) {
  RationalMatrix m = a;
  std::size_t n = m.size();
  RationalMatrix inv(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    Rational piv = m[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      m[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      Rational f = m[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

namespace {

// Solves A X = B for X (A rational, rows >= cols, full column rank) by
// selecting independent rows; B may be symbolic. Returns nullopt on rank loss.
std::optional<Matrix> solve_overdetermined(RationalMatrix A, Matrix B) {
  std::size_t rows = A.size(), n = A.empty() ? 0 : A[0].size(), k = B.empty() ? 0 : B[0].size();
  std::size_t r = 0;
  std::vector<std::size_t> pivcol;
  for (std::size_t c = 0; c < n && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && A[p][c] == 0) ++p;
    if (p == rows) return std::nullopt;
    std::swap(A[p], A[r]);
    std::swap(B[p], B[r]);
    Rational piv = A[r][c];
    for (auto& q : A[r]) q /= piv;
    for (auto& e : B[r]) e /= Expr(piv);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || A[i][c] == 0) continue;
      Rational f = A[i][c];
      for (std::size_t j = 0; j < n; ++j) A[i][j] -= f * A[r][j];
      for (std::size_t j = 0; j < k; ++j) B[i][j] -= Expr(f) * B[r][j];
    }
    pivcol.push_back(c);
    ++r;
  }
  if (r < n) return std::nullopt;
  Matrix X(B.begin(), B.begin() + static_cast<long>(n));
  return X;
}

Rational sample_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(3, 40), den(7, 23);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

std::vector<Symbol> base_coordinates(const GroupActionSpec& spec) {
  std::vector<Symbol> out;
  for (auto v : spec.independent) out.push_back(jetcalc::independent_symbol(v));
  for (std::size_t a = 0; a < spec.dependent.size(); ++a) out.push_back(spec.dependent_symbol(a));
  return out;
}

// dependent coordinates plus their first derivatives
std::vector<Symbol> first_jet_coordinates(const GroupActionSpec& spec) {
  std::vector<Symbol> out;
  for (std::size_t a = 0; a < spec.dependent.size(); ++a) {
    out.push_back(spec.dependent_symbol(a));
    for (auto v : spec.independent) out.push_back(spec.dependent_symbol(a, MultiIndex(v)));
  }
  return out;
}

Bindings sample_point(const std::vector<Symbol>& coords, std::mt19937_64& rng) {
  Bindings b;
  for (const auto& s : coords) b[s] = Expr(sample_rational(rng));
  return b;
}

}  // namespace

std::map<Symbol, Expr> prolonged_action(const GroupActionSpec& spec, int order) {
  return jetcalc::prolong_action(spec.action, order, spec.jet_space(order + 1));
}

Matrix infinitesimal_matrix(const GroupActionSpec& spec, const std::vector<Symbol>& coords) {
  int order = 0;
  for (const auto& c : coords) order = std::max(order, c.deriv.order());
  JetSpace js = spec.jet_space(order + 1);
  Matrix out;
  for (const auto& v : spec.infinitesimals) {
    VectorField pv = jetcalc::prolong_vector_field(v, order, js);
    std::vector<Expr> row;
    for (const auto& c : coords) row.push_back(pv.at(c));
    out.push_back(row);
  }
  return out;
}

Matrix adjoint_matrix(const GroupActionSpec& spec) {
  const std::size_t r = spec.dim();
  std::vector<Symbol> z = first_jet_coordinates(spec);
  const std::size_t m = z.size();
  Matrix omega = infinitesimal_matrix(spec, z);
  auto act = prolonged_action(spec, 1);
  std::vector<Expr> zt;
  for (const auto& s : z) zt.push_back(act.at(s));
  Bindings to_tilde;
  for (std::size_t l = 0; l < m; ++l) to_tilde[z[l]] = zt[l];
  for (auto v : spec.independent) {
    Symbol xi = jetcalc::independent_symbol(v);
    to_tilde[xi] = act.at(xi);
  }
  Matrix jac(m, std::vector<Expr>(m));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) jac[k][l] = diff(zt[k], z[l]);
  // rows Omega_i(z~), evaluated symbolically
  Matrix omega_t = map(omega, [&](const Expr& e) { return subst(e, to_tilde); });

  std::vector<Symbol> sample_coords = z;
  for (auto v : spec.independent) sample_coords.push_back(jetcalc::independent_symbol(v));
  std::mt19937_64 rng(0xad7);
  for (int attempt = 1; attempt <= 8; ++attempt) {
    RationalMatrix A;
    Matrix B;
    for (int s = 0; s < attempt + 1; ++s) {
      Bindings pt = sample_point(sample_coords, rng);
      // J(pt) y_i = Omega_i(z~(pt))^T gives row i of Omega(z~) J^{-T}
      Matrix jp = map(jac, [&](const Expr& e) { return subst(e, pt); });
      Matrix jinv;
      try {
        jinv = inverse(jp);
      } catch (const RankDeficient&) {
        continue;
      }
      Matrix rhs(m, std::vector<Expr>(r));
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t l = 0; l < m; ++l) {
          Expr acc;
          for (std::size_t k = 0; k < m; ++k) {
            if (jinv[l][k].is_zero()) continue;
            Expr w = subst(omega_t[i][k], pt);
            if (!w.is_zero()) acc += w * jinv[l][k];
          }
          rhs[l][i] = acc;
        }
      for (std::size_t l = 0; l < m; ++l) {
        std::vector<Rational> row;
        for (std::size_t j = 0; j < r; ++j) row.push_back(subst(omega[j][l], pt).constant_value());
        A.push_back(row);
        B.push_back(rhs[l]);
      }
    }
    auto X = solve_overdetermined(A, B);
    if (!X) continue;
    Matrix ad = transpose(*X);
    // Ad Omega(z) J^T - Omega(z~) == 0
    Matrix lhs = multiply(multiply(ad, omega), transpose(jac));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t k = 0; k < m; ++k)
        if (!symexpr::zero_test(lhs[i][k] - omega_t[i][k]).zero)
          throw RankDeficient(spec.name + ": adjoint relation not satisfied identically");
    return ad;
  }
  throw RankDeficient(spec.name + ": adjoint linear system is rank deficient");
}

Matrix adjoint_at(const GroupActionSpec& spec, const Matrix& ad, const std::map<std::string, Expr>& g) {
  Bindings b = spec.bind_params(g);
  return map(ad, [&](const Expr& e) { return subst(e, b); });
}

VectorField bracket(const VectorField& v, const VectorField& w) {
  std::set<Symbol> keys;
  for (const auto& [k, c] : v.coeff) keys.insert(k);
  for (const auto& [k, c] : w.coeff) keys.insert(k);
  VectorField out;
  for (const auto& s : keys) {
    Expr c = jetcalc::apply_vector_field(v, w.at(s)) - jetcalc::apply_vector_field(w, v.at(s));
    if (!c.is_zero()) out.coeff[s] = c;
  }
  return out;
}

std::vector<std::vector<std::vector<Rational>>> structure_constants(const GroupActionSpec& spec) {
  const std::size_t r = spec.dim();
  std::vector<Symbol> coords = base_coordinates(spec);
  std::vector<std::vector<std::vector<Rational>>> C(
      r, std::vector<std::vector<Rational>>(r, std::vector<Rational>(r, Rational(0))));
  std::mt19937_64 rng(0xb7a);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j) continue;
      VectorField br = bracket(spec.infinitesimals[i], spec.infinitesimals[j]);
      std::optional<Matrix> X;
      for (int attempt = 1; attempt <= 8 && !X; ++attempt) {
        RationalMatrix A;
        Matrix B;
        for (int s = 0; s < attempt + 2; ++s) {
          Bindings pt = sample_point(coords, rng);
          for (const auto& c : coords) {
            std::vector<Rational> row;
            for (std::size_t k = 0; k < r; ++k)
              row.push_back(subst(spec.infinitesimals[k].at(c), pt).constant_value());
            A.push_back(row);
            B.push_back({subst(br.at(c), pt)});
          }
        }
        X = solve_overdetermined(A, B);
      }
      if (!X) throw RankDeficient(spec.name + ": infinitesimal basis is not independent");
      VectorField comb;
      for (std::size_t k = 0; k < r; ++k) {
        C[i][j][k] = (*X)[k][0].constant_value();
        for (const auto& c : coords) comb.coeff[c] += Expr(C[i][j][k]) * spec.infinitesimals[k].at(c);
      }
      for (const auto& c : coords)
        if (!symexpr::is_zero(comb.at(c) - br.at(c)))
          throw RankDeficient(spec.name + ": basis not closed under the bracket");
    }
  return C;
}

Matrix ad_matrix(const GroupActionSpec& spec, const std::vector<Expr>& coeffs) {
  auto C = structure_constants(spec);
  const std::size_t r = spec.dim();
  Matrix M(r, std::vector<Expr>(r));
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t k = 0; k < r; ++k) {
      Expr s;
      for (std::size_t i = 0; i < r; ++i)
        if (C[i][j][k] != 0) s += coeffs.at(i) * Expr(C[i][j][k]);
      M[j][k] = s;
    }
  return M;
}

RationalMatrix killing_form(const GroupActionSpec& spec) {
  auto C = structure_constants(spec);
  const std::size_t r = spec.dim();
  RationalMatrix B(r, std::vector<Rational>(r, Rational(0)));
  // (ad_i)_{jk} = C[i][j][k]
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      Rational t = 0;
      for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = 0; q < r; ++q) t += C[i][p][q] * C[j][q][p];
      B[i][j] = t;
    }
  return B;
}

}  // namespace mframe::liegroup
