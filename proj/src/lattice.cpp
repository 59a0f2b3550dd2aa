#include "abperc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace abperc {

namespace {

bool row_is_zero(const BigRow& r) {
  for (const auto& x : r)
    if (x != 0) return false;
  return true;
}

// floor division, exact for any signs
BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void row_axpy(BigRow& dst, const BigInt& c, const BigRow& src) {
  for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += c * src[j];
}

}  // namespace

BigRow to_big(const IVec& v) {
  BigRow r(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) r[static_cast<std::size_t>(i)] = v[i];
  return r;
}

IVec to_i64(const BigRow& r) {
  IVec v(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] > std::numeric_limits<std::int64_t>::max() ||
        r[i] < std::numeric_limits<std::int64_t>::min())
      throw std::overflow_error("integer entry does not fit in 64 bits");
    v[static_cast<Eigen::Index>(i)] = static_cast<std::int64_t>(r[i]);
  }
  return v;
}

IntegerLattice IntegerLattice::zero(std::int64_t ambient_dim) {
  IntegerLattice l;
  l.d_ = ambient_dim;
  return l;
}

IMat64 IntegerLattice::basis_i64() const {
  IMat64 m(rank(), d_);
  for (std::int64_t i = 0; i < rank(); ++i) {
    IVec row = to_i64(rows_[static_cast<std::size_t>(i)]);
    m.row(i) = row.transpose();
  }
  return m;
}

IntegerLattice hermite_normal_form(std::int64_t d, const std::vector<IVec>& generators) {
  BigMat gens;
  gens.reserve(generators.size());
  for (const auto& g : generators) {
    if (g.size() != d) throw std::invalid_argument("generator dimension mismatch");
    gens.push_back(to_big(g));
  }
  return hermite_normal_form_big(d, gens);
}

IntegerLattice hermite_normal_form_big(std::int64_t d, const BigMat& generators) {
  if (d < 1) throw std::invalid_argument("ambient dimension must be positive");
  BigMat rows;
  for (const auto& g : generators) {
    if (static_cast<std::int64_t>(g.size()) != d)
      throw std::invalid_argument("generator dimension mismatch");
    if (!row_is_zero(g)) rows.push_back(g);
  }

  std::size_t r = 0;
  for (std::int64_t col = 0; col < d && r < rows.size(); ++col) {
    std::size_t c = static_cast<std::size_t>(col);
    // Euclid within the column until a single nonzero entry remains at r.
    for (;;) {
      std::size_t best = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        if (best == rows.size() || abs(rows[i][c]) < abs(rows[best][c])) best = i;
      }
      if (best == rows.size()) break;
      std::swap(rows[r], rows[best]);
      bool clean = true;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        BigInt q = -floor_div(rows[i][c], rows[r][c]);
        row_axpy(rows[i], q, rows[r]);
        if (rows[i][c] != 0) clean = false;
      }
      if (clean) break;
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0)
      for (auto& x : rows[r]) x = -x;
    for (std::size_t i = 0; i < r; ++i) {
      BigInt q = -floor_div(rows[i][c], rows[r][c]);
      row_axpy(rows[i], q, rows[r]);
    }
    ++r;
  }
  rows.erase(std::remove_if(rows.begin() + static_cast<std::ptrdiff_t>(r), rows.end(),
                            row_is_zero),
             rows.end());
  if (rows.size() != r) throw std::logic_error("hnf: residual nonzero rows");

  IntegerLattice l;
  l.d_ = d;
  l.rows_ = std::move(rows);
  return l;
}

IntegerLattice lattice_sum(const IntegerLattice& a, const IntegerLattice& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw std::invalid_argument("lattice_sum: dimension mismatch");
  BigMat gens = a.basis();
  for (const auto& r : b.basis()) gens.push_back(r);
  return hermite_normal_form_big(a.ambient_dim(), gens);
}

bool IntegerLattice::contains(const BigRow& v) const {
  if (static_cast<std::int64_t>(v.size()) != d_)
    throw std::invalid_argument("contains: dimension mismatch");
  BigRow cur = v;
  for (const auto& row : rows_) {
    std::size_t p = 0;
    while (p < row.size() && row[p] == 0) ++p;
    // rows below are zero at this pivot column, so divisibility is decisive
    if (cur[p] % row[p] != 0) return false;
    BigInt q = cur[p] / row[p];
    if (q != 0)
      for (std::size_t j = 0; j < cur.size(); ++j) cur[j] -= q * row[j];
  }
  return row_is_zero(cur);
}

std::vector<IVec> IntegerLattice::points_in_ball(double radius) const {
  std::vector<IVec> out;
  if (radius < 0) return out;
  IVec origin = IVec::Zero(d_);
  out.push_back(origin);
  std::int64_t m = rank();
  if (m == 0) return out;

  // Exact radius^2 as num * 2^exp with integer num.
  double r2 = radius * radius;
  int exp2 = 0;
  double frac = std::frexp(r2, &exp2);
  BigInt num = static_cast<std::int64_t>(std::ldexp(frac, 53));
  exp2 -= 53;
  auto within = [&](const BigInt& norm2) {
    // norm2 <= num * 2^exp2
    if (exp2 >= 0) return norm2 <= (num << exp2);
    return (norm2 << (-exp2)) <= num;
  };

  // Coefficient bounds: |c_i| <= radius * ||row_i(G^{-1} B)||, with G = B B^T.
  // Computed exactly over integers, then over-approximated in double.
  BigMat gram(static_cast<std::size_t>(m), BigRow(static_cast<std::size_t>(m), 0));
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < m; ++j) {
      BigInt s = 0;
      for (std::int64_t k = 0; k < d_; ++k)
        s += rows_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
             rows_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      gram[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
    }
  BigInt det = big_det(gram);
  if (det == 0) throw std::logic_error("points_in_ball: dependent basis rows");

  // adjugate via cofactors (m <= ambient dim, small)
  BigMat adj(static_cast<std::size_t>(m), BigRow(static_cast<std::size_t>(m), 0));
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < m; ++j) {
      BigMat minor;
      for (std::int64_t a = 0; a < m; ++a) {
        if (a == j) continue;
        BigRow row;
        for (std::int64_t b = 0; b < m; ++b) {
          if (b == i) continue;
          row.push_back(gram[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
        }
        minor.push_back(std::move(row));
      }
      BigInt c = (m == 1) ? BigInt(1) : big_det(minor);
      if (((i + j) & 1) != 0) c = -c;
      adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
    }

  std::vector<std::int64_t> bound(static_cast<std::size_t>(m), 0);
  double dabs = std::abs(det.convert_to<double>());
  for (std::int64_t i = 0; i < m; ++i) {
    double norm2 = 0;
    for (std::int64_t k = 0; k < d_; ++k) {
      BigInt s = 0;
      for (std::int64_t j = 0; j < m; ++j)
        s += adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
             rows_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      double x = s.convert_to<double>() / dabs;
      norm2 += x * x;
    }
    bound[static_cast<std::size_t>(i)] =
        static_cast<std::int64_t>(std::floor(radius * std::sqrt(norm2) + 1e-9)) + 1;
  }

  std::vector<std::int64_t> c(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -bound[i];
  BigRow pt(static_cast<std::size_t>(d_));
  for (;;) {
    bool zero_coeff = std::all_of(c.begin(), c.end(), [](std::int64_t x) { return x == 0; });
    if (!zero_coeff) {
      for (std::int64_t k = 0; k < d_; ++k) {
        BigInt s = 0;
        for (std::int64_t j = 0; j < m; ++j)
          s += BigInt(c[static_cast<std::size_t>(j)]) *
               rows_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        pt[static_cast<std::size_t>(k)] = s;
      }
      BigInt norm2 = 0;
      for (const auto& x : pt) norm2 += x * x;
      if (within(norm2)) out.push_back(to_i64(pt));
    }
    std::size_t lv = 0;
    while (lv < c.size()) {
      if (c[lv] < bound[lv]) {
        ++c[lv];
        break;
      }
      c[lv] = -bound[lv];
      ++lv;
    }
    if (lv == c.size()) break;
  }

  std::sort(out.begin(), out.end(), [](const IVec& a, const IVec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const IVec& a, const IVec& b) { return a == b; }),
            out.end());
  return out;
}

std::string IntegerLattice::key() const {
  std::ostringstream s;
  s << d_;
  for (const auto& row : rows_) {
    s << ';';
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) s << ',';
      s << row[j];
    }
  }
  return s.str();
}

IntegerLattice IntegerLattice::parse(const std::string& text) {
  std::istringstream s(text);
  std::string part;
  if (!std::getline(s, part, ';')) throw std::invalid_argument("empty lattice literal");
  std::int64_t d = std::stoll(part);
  BigMat rows;
  while (std::getline(s, part, ';')) {
    if (part.empty()) continue;
    BigRow row;
    std::istringstream rs(part);
    std::string tok;
    while (std::getline(rs, tok, ',')) row.emplace_back(BigInt(tok));
    if (static_cast<std::int64_t>(row.size()) != d)
      throw std::invalid_argument("lattice literal row has wrong length");
    rows.push_back(std::move(row));
  }
  return hermite_normal_form_big(d, rows);
}

BigMat big_identity(std::int64_t n) {
  BigMat m(static_cast<std::size_t>(n), BigRow(static_cast<std::size_t>(n), 0));
  for (std::int64_t i = 0; i < n; ++i)
    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  return m;
}

BigMat big_mul(const BigMat& a, const BigMat& b) {
  std::size_t n = a.size();
  std::size_t k = b.size();
  std::size_t p = k ? b[0].size() : 0;
  BigMat out(n, BigRow(p, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (a[i][j] == 0) continue;
      for (std::size_t l = 0; l < p; ++l) out[i][l] += a[i][j] * b[j][l];
    }
  return out;
}

BigInt big_det(BigMat a) {
  std::size_t n = a.size();
  if (n == 0) return 1;
  // fraction-free Gaussian elimination (Bareiss)
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t piv = k + 1;
      while (piv < n && a[piv][k] == 0) ++piv;
      if (piv == n) return 0;
      std::swap(a[k], a[piv]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign > 0 ? a[n - 1][n - 1] : -a[n - 1][n - 1];
}

namespace {

struct SnfWork {
  BigMat a;      // m x n
  BigMat u;      // m x m
  BigMat v;      // n x n
  BigMat v_inv;  // n x n

  void row_swap(std::size_t i, std::size_t j) {
    std::swap(a[i], a[j]);
    std::swap(u[i], u[j]);
  }
  void row_neg(std::size_t i) {
    for (auto& x : a[i]) x = -x;
    for (auto& x : u[i]) x = -x;
  }
  void row_axpy_op(std::size_t dst, const BigInt& c, std::size_t src) {
    row_axpy(a[dst], c, a[src]);
    row_axpy(u[dst], c, u[src]);
  }
  void col_swap(std::size_t i, std::size_t j) {
    for (auto& row : a) std::swap(row[i], row[j]);
    for (auto& row : v) std::swap(row[i], row[j]);
    std::swap(v_inv[i], v_inv[j]);
  }
  void col_neg(std::size_t i) {
    for (auto& row : a) row[i] = -row[i];
    for (auto& row : v) row[i] = -row[i];
    for (auto& x : v_inv[i]) x = -x;
  }
  // col dst += c * col src;  inverse action on v_inv rows: row src -= c * row dst
  void col_axpy_op(std::size_t dst, const BigInt& c, std::size_t src) {
    for (auto& row : a) row[dst] += c * row[src];
    for (auto& row : v) row[dst] += c * row[src];
    row_axpy(v_inv[src], -c, v_inv[dst]);
  }
};

}  // namespace

SmithDecomposition smith_decomposition(const IntegerLattice& lattice) {
  std::size_t m = static_cast<std::size_t>(lattice.rank());
  std::size_t n = static_cast<std::size_t>(lattice.ambient_dim());

  SnfWork w;
  w.a = lattice.basis();
  w.u = big_identity(static_cast<std::int64_t>(m));
  w.v = big_identity(static_cast<std::int64_t>(n));
  w.v_inv = big_identity(static_cast<std::int64_t>(n));

  std::size_t t = 0;
  while (t < m && t < n) {
    // locate minimal-magnitude nonzero pivot in the trailing block
    std::size_t pi = m, pj = n;
    for (std::size_t i = t; i < m; ++i)
      for (std::size_t j = t; j < n; ++j) {
        if (w.a[i][j] == 0) continue;
        if (pi == m || abs(w.a[i][j]) < abs(w.a[pi][pj])) {
          pi = i;
          pj = j;
        }
      }
    if (pi == m) break;
    if (pi != t) w.row_swap(t, pi);
    if (pj != t) w.col_swap(t, pj);

    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (w.a[i][t] == 0) continue;
        BigInt q = -floor_div(w.a[i][t], w.a[t][t]);
        w.row_axpy_op(i, q, t);
        if (w.a[i][t] != 0) {
          w.row_swap(t, i);
          dirty = true;
        }
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (w.a[t][j] == 0) continue;
        BigInt q = -floor_div(w.a[t][j], w.a[t][t]);
        w.col_axpy_op(j, q, t);
        if (w.a[t][j] != 0) {
          w.col_swap(t, j);
          dirty = true;
        }
      }
    }
    if (w.a[t][t] < 0) w.col_neg(t);

    // enforce divisibility of the trailing block by the pivot
    bool fixed = false;
    for (std::size_t i = t + 1; i < m && !fixed; ++i)
      for (std::size_t j = t + 1; j < n && !fixed; ++j)
        if (w.a[i][j] % w.a[t][t] != 0) {
          w.row_axpy_op(t, 1, i);
          fixed = true;
        }
    if (fixed) continue;
    ++t;
  }

  SmithDecomposition out;
  out.u = std::move(w.u);
  out.v = std::move(w.v);
  out.v_inv = std::move(w.v_inv);
  for (std::size_t i = 0; i < t; ++i) out.diag.push_back(w.a[i][i]);
  if (out.diag.size() != m) throw std::logic_error("snf: basis rows were dependent");
  out.quotient_rank = static_cast<std::int64_t>(n - m);
  for (const auto& dv : out.diag)
    if (dv >= 2) {
      BigRow tmp{dv};
      out.torsion.push_back(to_i64(tmp)[0]);
    }
  return out;
}

IntegerLattice integer_kernel(std::int64_t d, const BigMat& a) {
  std::size_t m = static_cast<std::size_t>(d);
  if (a.size() != m) throw std::invalid_argument("integer_kernel: row count mismatch");
  std::size_t n = a.empty() ? 0 : a[0].size();

  SnfWork w;
  w.a = a;
  w.u = big_identity(d);
  w.v = big_identity(static_cast<std::int64_t>(n));
  w.v_inv = big_identity(static_cast<std::int64_t>(n));

  std::size_t t = 0;
  while (t < m && t < n) {
    std::size_t pi = m, pj = n;
    for (std::size_t i = t; i < m; ++i)
      for (std::size_t j = t; j < n; ++j) {
        if (w.a[i][j] == 0) continue;
        if (pi == m || abs(w.a[i][j]) < abs(w.a[pi][pj])) {
          pi = i;
          pj = j;
        }
      }
    if (pi == m) break;
    if (pi != t) w.row_swap(t, pi);
    if (pj != t) w.col_swap(t, pj);
    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (w.a[i][t] == 0) continue;
        BigInt q = -floor_div(w.a[i][t], w.a[t][t]);
        w.row_axpy_op(i, q, t);
        if (w.a[i][t] != 0) {
          w.row_swap(t, i);
          dirty = true;
        }
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (w.a[t][j] == 0) continue;
        BigInt q = -floor_div(w.a[t][j], w.a[t][t]);
        w.col_axpy_op(j, q, t);
        if (w.a[t][j] != 0) {
          w.col_swap(t, j);
          dirty = true;
        }
      }
    }
    ++t;
  }

  BigMat kernel_rows;
  for (std::size_t i = t; i < m; ++i) kernel_rows.push_back(w.u[i]);
  return hermite_normal_form_big(d, kernel_rows);
}

}  // namespace abperc
