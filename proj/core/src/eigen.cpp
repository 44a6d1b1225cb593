#include "pol/eigen.hpp"

#include <algorithm>
#include <cmath>

#include "pol/error.hpp"

namespace pol {
namespace {

// 1-based square storage; the QR sweep is much easier to read with the
// textbook indexing.
class Work {
 public:
  explicit Work(const Matrix& m) : n_(m.n), a_((m.n + 1) * (m.n + 1), 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) (*this)(int(i) + 1, int(j) + 1) = m(i, j);
    }
  }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * (n_ + 1) + static_cast<std::size_t>(j)]; }
  int n() const { return static_cast<int>(n_); }

 private:
  std::size_t n_;
  std::vector<double> a_;
};

double sign_of(double a, double b) { return b >= 0 ? std::fabs(a) : -std::fabs(a); }

// Diagonal similarity by powers of two so row and column norms are comparable.
void balance(Work& a) {
  const int n = a.n();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 1; i <= n; ++i) {
      double r = 0, c = 0;
      for (int j = 1; j <= n; ++j) {
        if (j == i) continue;
        c += std::fabs(a(j, i));
        r += std::fabs(a(i, j));
      }
      if (c == 0 || r == 0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        for (int j = 1; j <= n; ++j) a(i, j) /= f;
        for (int j = 1; j <= n; ++j) a(j, i) *= f;
      }
    }
  }
}

// Gaussian elimination with pivoting down to upper Hessenberg form.
void hessenberg(Work& a) {
  const int n = a.n();
  for (int m = 2; m < n; ++m) {
    double x = 0;
    int i = m;
    for (int j = m; j <= n; ++j) {
      if (std::fabs(a(j, m - 1)) > std::fabs(x)) {
        x = a(j, m - 1);
        i = j;
      }
    }
    if (i != m) {
      for (int j = m - 1; j <= n; ++j) std::swap(a(i, j), a(m, j));
      for (int j = 1; j <= n; ++j) std::swap(a(j, i), a(j, m));
    }
    if (x == 0) continue;
    for (i = m + 1; i <= n; ++i) {
      double y = a(i, m - 1);
      if (y == 0) continue;
      y /= x;
      a(i, m - 1) = 0;
      for (int j = m; j <= n; ++j) a(i, j) -= y * a(m, j);
      for (int j = 1; j <= n; ++j) a(j, m) += y * a(j, i);
    }
  }
}

// Francis double-shift QR on an upper Hessenberg matrix.
std::vector<std::complex<double>> hessenberg_qr(Work& a) {
  const int n = a.n();
  std::vector<double> wr(static_cast<std::size_t>(n) + 1), wi(static_cast<std::size_t>(n) + 1);
  double anorm = 0;
  for (int i = 1; i <= n; ++i) {
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::fabs(a(i, j));
  }
  int nn = n;
  double t = 0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 1) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
        if (s == 0) s = anorm;
        if (std::fabs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::fabs(q));
          x += t;
          if (q >= 0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -(wi[nn] = z);
          }
          nn -= 2;
        } else {
          if (its == 60) throw NumericError("eigenvalues: QR iteration did not converge");
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (int i = 1; i <= nn; ++i) a(i, i) -= x;
            s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m;
          for (m = nn - 2; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
            const double v = std::fabs(p) * (std::fabs(a(m - 1, m - 1)) + std::fabs(z) + std::fabs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0;
            if (i != m + 2) a(i, i - 3) = 0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              if ((x = std::fabs(p) + std::fabs(q) + std::fabs(r)) != 0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace

Matrix Matrix::identity(std::size_t size) {
  Matrix m(size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::uniform(std::size_t size, double lo, double hi, std::mt19937_64& rng) {
  Matrix m(size);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : m.a) v = dist(rng);
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& x, const Matrix& y) {
  if (x.n != y.n) throw DimensionError("matmul", "n", std::to_string(x.n) + " vs " + std::to_string(y.n));
  const std::size_t n = x.n;
  Matrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double xik = x(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += xik * y(k, j);
    }
  }
  return out;
}

Matrix add(const Matrix& x, const Matrix& y) {
  if (x.n != y.n) throw DimensionError("add", "n", std::to_string(x.n) + " vs " + std::to_string(y.n));
  Matrix out = x;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
  return out;
}

Matrix matrix_power(const Matrix& x, int k) {
  if (k < 0) throw ConfigError("matrix_power: negative exponent");
  Matrix out = Matrix::identity(x.n);
  for (int i = 0; i < k; ++i) out = matmul(out, x);
  return out;
}

std::vector<std::complex<double>> eigenvalues(Matrix m) {
  if (m.n == 0) return {};
  if (!m.all_finite()) throw NumericError("eigenvalues: non-finite matrix entry");
  Work w(m);
  balance(w);
  hessenberg(w);
  return hessenberg_qr(w);
}

double spectral_radius(const Matrix& m) {
  double r = 0;
  for (const auto& e : eigenvalues(m)) r = std::max(r, std::abs(e));
  return r;
}

}  // namespace pol
