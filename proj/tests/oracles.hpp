#pragma once

// Reference computations used only by the tests. They go through plain
// std::vector arithmetic and hand-written elimination so that they share no
// code path with the Eigen-based solvers under test.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

// Gaussian elimination with partial pivoting.
inline Vec gauss_solve(Mat a, Vec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (a[piv][col] == 0.0) throw std::runtime_error("singular system in oracle");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

// X'X + diag(extra) restricted to `cols`, and X'Y, from row-major X.
inline void normal_equations(const Mat& x, const Vec& y, const std::vector<std::size_t>& cols,
                             const Vec& extra, Mat& xtx, Vec& xty) {
    const std::size_t k = cols.size();
    xtx.assign(k, Vec(k, 0.0));
    xty.assign(k, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t a = 0; a < k; ++a) {
            xty[a] += x[i][cols[a]] * y[i];
            for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][cols[a]] * x[i][cols[b]];
        }
    }
    for (std::size_t a = 0; a < k && a < extra.size(); ++a) xtx[a][a] += extra[a];
}

inline std::vector<std::size_t> all_columns(std::size_t p) {
    std::vector<std::size_t> c(p);
    std::iota(c.begin(), c.end(), 0);
    return c;
}

// OLS on the chosen columns via the normal equations; returns the mean squared
// residual.
inline double subset_risk(const Mat& x, const Vec& y, const std::vector<std::size_t>& cols) {
    const double n = static_cast<double>(y.size());
    if (cols.empty()) {
        double s = 0.0;
        for (double v : y) s += v * v;
        return s / n;
    }
    Mat xtx;
    Vec xty;
    normal_equations(x, y, cols, {}, xtx, xty);
    const Vec b = gauss_solve(xtx, xty);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double fit = 0.0;
        for (std::size_t a = 0; a < cols.size(); ++a) fit += x[i][cols[a]] * b[a];
        s += (y[i] - fit) * (y[i] - fit);
    }
    return s / n;
}

struct Rational {
    long long num;
    long long den;
};

// Exact solution of a 2x2 integer system by Cramer's rule.
inline void cramer2(long long a11, long long a12, long long a21, long long a22, long long b1,
                    long long b2, Rational& x1, Rational& x2) {
    const long long det = a11 * a22 - a12 * a21;
    if (det == 0) throw std::runtime_error("singular 2x2 system");
    x1 = {b1 * a22 - a12 * b2, det};
    x2 = {a11 * b2 - b1 * a21, det};
}

inline double to_double(const Rational& r) {
    return static_cast<double>(r.num) / static_cast<double>(r.den);
}

}  // namespace oracle
