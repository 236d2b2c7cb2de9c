#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tabgraph {

using Complex = std::complex<double>;

/// Dense Hermitian matrix; construction keeps H[v][u] == conj(H[u][v]) exact.
class HermitianMatrix {
public:
    explicit HermitianMatrix(std::size_t n) : n_(n), a_(n * n, Complex(0, 0)) {}

    std::size_t n() const { return n_; }
    const Complex& at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    void set_diagonal(std::size_t i, double value) { a_[i * n_ + i] = Complex(value, 0); }
    /// Sets (i, j) and mirrors the conjugate into (j, i).
    void set_pair(std::size_t i, std::size_t j, Complex value) {
        a_[i * n_ + j] = value;
        a_[j * n_ + i] = std::conj(value);
    }

    /// Wraps externally produced entries verbatim; the eigensolver checks
    /// hermiticity on such input.
    static HermitianMatrix from_raw(std::size_t n, std::vector<Complex> entries) {
        if (entries.size() != n * n) throw std::invalid_argument("from_raw: size mismatch");
        HermitianMatrix h(n);
        h.a_ = std::move(entries);
        return h;
    }

    double max_abs() const {
        double m = 0;
        for (const auto& z : a_) m = std::max(m, std::abs(z));
        return m;
    }

    double hermiticity_defect() const {
        double d = 0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                d = std::max(d, std::abs(at(i, j) - std::conj(at(j, i))));
        return d;
    }

private:
    std::size_t n_;
    std::vector<Complex> a_;
};

struct SpectralResult {
    std::vector<double> eigenvalues;                   // ascending
    std::vector<std::vector<Complex>> eigenvectors;    // unit norm, gauge-fixed
    double q = 0.0;
    bool normalized = false;
};

namespace detail {

/// Cyclic Jacobi for dense real symmetric matrices. Plenty for the few
/// hundred vertices this library deals with.
inline void jacobi_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& eigvals,
                         std::vector<double>& vecs) {
    vecs.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off <= 1e-300) break;

        double scale = 0;
        for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
        if (std::sqrt(off) <= 1e-15 * std::max(scale, 1e-300) * double(n)) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k != p && k != q) {
                        const double akp = a[k * n + p];
                        const double akq = a[k * n + q];
                        a[k * n + p] = akp - s * (akq + tau * akp);
                        a[k * n + q] = akq + s * (akp - tau * akq);
                        a[p * n + k] = a[k * n + p];
                        a[q * n + k] = a[k * n + q];
                    }
                    const double vkp = vecs[k * n + p];
                    const double vkq = vecs[k * n + q];
                    vecs[k * n + p] = vkp - s * (vkq + tau * vkp);
                    vecs[k * n + q] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }
    eigvals.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigvals[i] = a[i * n + i];
}

}  // namespace detail

/// k smallest eigenpairs of a Hermitian matrix, ascending. Solved through the
/// 2n x 2n real-symmetric embedding [[Re, -Im], [Im, Re]], whose spectrum
/// doubles that of H; conjugate duplicates are removed by projecting against
/// already accepted eigenvectors. Each eigenvector is rotated so its
/// largest-magnitude component is real and positive.
inline SpectralResult hermitian_eigs(const HermitianMatrix& h, int k) {
    const std::size_t n = h.n();
    if (k < 0 || std::size_t(k) > n)
        throw std::invalid_argument("hermitian_eigs: k must be in [0, n]");
    const double scale = std::max(h.max_abs(), 1e-300);
    if (h.hermiticity_defect() > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("hermitian_eigs: matrix is not Hermitian");

    const std::size_t m = 2 * n;
    std::vector<double> b(m * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex z = h.at(i, j);
            b[i * m + j] = z.real();
            b[i * m + (n + j)] = -z.imag();
            b[(n + i) * m + j] = z.imag();
            b[(n + i) * m + (n + j)] = z.real();
        }
    }

    std::vector<double> eigvals, vecs;
    detail::jacobi_eigen(b, m, eigvals, vecs);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return eigvals[x] < eigvals[y]; });

    SpectralResult result;
    for (const std::size_t col : order) {
        if (int(result.eigenvalues.size()) == k) break;
        std::vector<Complex> z(n);
        for (std::size_t i = 0; i < n; ++i)
            z[i] = Complex(vecs[i * m + col], vecs[(n + i) * m + col]);
        // Remove the conjugate-pair duplicate (it spans the same complex line).
        for (const auto& prev : result.eigenvectors) {
            Complex overlap(0, 0);
            for (std::size_t i = 0; i < n; ++i) overlap += std::conj(prev[i]) * z[i];
            for (std::size_t i = 0; i < n; ++i) z[i] -= overlap * prev[i];
        }
        double norm = 0;
        for (const auto& zi : z) norm += std::norm(zi);
        norm = std::sqrt(norm);
        if (norm < 0.5) continue;  // duplicate of an accepted vector
        for (auto& zi : z) zi /= norm;

        // Gauge: largest-magnitude component real positive.
        std::size_t imax = 0;
        double best = -1;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(z[i]);
            if (mag > best + 1e-15) {
                best = mag;
                imax = i;
            }
        }
        const Complex rot = std::conj(z[imax]) / std::abs(z[imax]);
        for (auto& zi : z) zi *= rot;

        result.eigenvalues.push_back(eigvals[col]);
        result.eigenvectors.push_back(std::move(z));
    }
    if (int(result.eigenvalues.size()) < k)
        throw std::runtime_error("hermitian_eigs: failed to extract the requested eigenpairs");
    return result;
}

}  // namespace tabgraph
