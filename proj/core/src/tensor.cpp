// Copyright 2026 The epiq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "epiq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace epiq {

Tolerance::Tolerance(double e) : eps(e) {
    if (!(e > 0.0) || !std::isfinite(e)) {
        throw NumericError("tolerance must be a positive finite number");
    }
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be at least 1x1");
    }
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be at least 1x1");
    }
    if (data_.size() != rows * cols) {
        throw DimensionError("entry count does not match rows x cols");
    }
    for (const auto &z : data_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw NumericError("matrix entries must be finite");
        }
    }
}

ComplexMatrix ComplexMatrix::zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::column(std::vector<cplx> amplitudes) {
    const auto n = amplitudes.size();
    return {n, 1, std::move(amplitudes)};
}

ComplexMatrix ComplexMatrix::basis_vector(std::size_t dim, std::size_t index) {
    if (index >= dim) {
        throw DimensionError("basis index out of range");
    }
    ComplexMatrix v(dim, 1);
    v(index, 0) = 1.0;
    return v;
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<cplx> data;
    data.reserve(r * c);
    for (const auto &row : rows) {
        if (row.size() != c) {
            throw DimensionError("ragged matrix literal");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return {r, c, std::move(data)};
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = std::conj((*this)(r, c));
        }
    }
    return out;
}

cplx ComplexMatrix::trace() const {
    if (!is_square()) {
        throw DimensionError("trace of a non-square matrix");
    }
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        t += (*this)(i, i);
    }
    return t;
}

double ComplexMatrix::norm() const {
    double s = 0.0;
    for (const auto &z : data_) {
        s += std::norm(z);
    }
    return std::sqrt(s);
}

ComplexMatrix ComplexMatrix::col(std::size_t c) const {
    ComplexMatrix v(rows_, 1);
    for (std::size_t r = 0; r < rows_; ++r) {
        v(r, 0) = (*this)(r, c);
    }
    return v;
}

ComplexMatrix &ComplexMatrix::operator+=(const ComplexMatrix &o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
        throw DimensionError("matrix sum of mismatched shapes");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += o.data_[i];
    }
    return *this;
}

ComplexMatrix &ComplexMatrix::operator-=(const ComplexMatrix &o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
        throw DimensionError("matrix difference of mismatched shapes");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= o.data_[i];
    }
    return *this;
}

ComplexMatrix &ComplexMatrix::operator*=(cplx s) {
    for (auto &z : data_) {
        z *= s;
    }
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.cols_ != b.rows_) {
        throw DimensionError("matrix product of incompatible shapes");
    }
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) {
                continue;
            }
            const cplx *brow = &b.data_[k * b.cols_];
            cplx *orow = &out.data_[i * out.cols_];
            for (std::size_t j = 0; j < b.cols_; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

std::string ComplexMatrix::to_string(int precision) const {
    std::ostringstream os;
    os.precision(precision);
    os << "[";
    for (std::size_t r = 0; r < rows_; ++r) {
        os << (r ? ", [" : "[");
        for (std::size_t c = 0; c < cols_; ++c) {
            const auto z = (*this)(r, c);
            if (c) {
                os << ", ";
            }
            os << z.real();
            if (std::abs(z.imag()) > 0.0) {
                os << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
            }
        }
        os << "]";
    }
    os << "]";
    return os.str();
}

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

ComplexMatrix tensor(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar) {
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const cplx s = a(ar, ac);
            if (s == cplx{}) {
                continue;
            }
            for (std::size_t br = 0; br < b.rows(); ++br) {
                for (std::size_t bc = 0; bc < b.cols(); ++bc) {
                    out(ar * b.rows() + br, ac * b.cols() + bc) = s * b(br, bc);
                }
            }
        }
    }
    return out;
}

ComplexMatrix tensor_all(std::span<const ComplexMatrix> factors) {
    if (factors.empty()) {
        throw DimensionError("tensor product of zero factors");
    }
    ComplexMatrix out = factors[0];
    for (std::size_t i = 1; i < factors.size(); ++i) {
        out = tensor(out, factors[i]);
    }
    return out;
}

namespace {

std::vector<std::size_t> strides_of(std::span<const std::size_t> dims) {
    std::vector<std::size_t> strides(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) {
        strides[k - 1] = strides[k] * dims[k];
    }
    return strides;
}

void check_factor_list(std::span<const std::size_t> dims, std::span<const std::size_t> sel) {
    std::vector<bool> seen(dims.size(), false);
    for (auto f : sel) {
        if (f >= dims.size()) {
            throw DimensionError("factor index out of range");
        }
        if (seen[f]) {
            throw DimensionError("factor index repeated");
        }
        seen[f] = true;
    }
    for (auto d : dims) {
        if (d == 0) {
            throw DimensionError("factor dimension must be positive");
        }
    }
}

/// Full-space offsets of every multi-index over `factors` (row-major over the
/// listed order).
std::vector<std::size_t> offsets(std::span<const std::size_t> dims, std::span<const std::size_t> strides,
                                 std::span<const std::size_t> factors) {
    std::vector<std::size_t> out{0};
    for (auto f : factors) {
        std::vector<std::size_t> next;
        next.reserve(out.size() * dims[f]);
        for (auto base : out) {
            for (std::size_t d = 0; d < dims[f]; ++d) {
                next.push_back(base + d * strides[f]);
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> sel) {
    std::vector<bool> in(n, false);
    for (auto f : sel) {
        in[f] = true;
    }
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < n; ++f) {
        if (!in[f]) {
            out.push_back(f);
        }
    }
    return out;
}

} // namespace

ComplexMatrix partial_trace(const ComplexMatrix &rho, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
    check_factor_list(dims, keep);
    if (!rho.is_square() || rho.rows() != product(dims)) {
        throw DimensionError("partial_trace: operator dimension does not match factor dimensions");
    }
    if (keep.empty()) {
        return ComplexMatrix(1, 1, {rho.trace()});
    }
    const auto strides = strides_of(dims);
    const auto traced = complement(dims.size(), keep);
    const auto kept_off = offsets(dims, strides, keep);
    const auto traced_off = offsets(dims, strides, traced);
    const std::size_t n = kept_off.size();
    ComplexMatrix out(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            cplx s = 0.0;
            for (auto e : traced_off) {
                s += rho(kept_off[r] + e, kept_off[c] + e);
            }
            out(r, c) = s;
        }
    }
    return out;
}

ComplexMatrix embed(const ComplexMatrix &op, std::span<const std::size_t> dims,
                    std::span<const std::size_t> targets) {
    check_factor_list(dims, targets);
    const auto strides = strides_of(dims);
    const auto t_off = offsets(dims, strides, targets);
    if (!op.is_square() || op.rows() != t_off.size()) {
        throw DimensionError("embed: operator dimension does not match target factors");
    }
    const auto rest = complement(dims.size(), targets);
    const auto r_off = offsets(dims, strides, rest);
    const std::size_t n = product(dims);
    ComplexMatrix out(n, n);
    for (auto e : r_off) {
        for (std::size_t a = 0; a < t_off.size(); ++a) {
            for (std::size_t b = 0; b < t_off.size(); ++b) {
                out(t_off[a] + e, t_off[b] + e) = op(a, b);
            }
        }
    }
    return out;
}

ComplexMatrix apply_on(const ComplexMatrix &op, const ComplexMatrix &m, std::span<const std::size_t> dims,
                       std::span<const std::size_t> targets) {
    check_factor_list(dims, targets);
    const auto strides = strides_of(dims);
    const auto t_off = offsets(dims, strides, targets);
    if (!op.is_square() || op.rows() != t_off.size()) {
        throw DimensionError("apply_on: operator dimension does not match target factors");
    }
    if (m.rows() != product(dims)) {
        throw DimensionError("apply_on: operand dimension does not match factors");
    }
    const auto r_off = offsets(dims, strides, complement(dims.size(), targets));
    const std::size_t d = t_off.size();
    const std::size_t cols = m.cols();
    ComplexMatrix out(m.rows(), cols);
    std::vector<cplx> column(d);
    for (auto e : r_off) {
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t b = 0; b < d; ++b) {
                column[b] = m(t_off[b] + e, c);
            }
            for (std::size_t a = 0; a < d; ++a) {
                cplx s = 0.0;
                for (std::size_t b = 0; b < d; ++b) {
                    s += op(a, b) * column[b];
                }
                out(t_off[a] + e, c) = s;
            }
        }
    }
    return out;
}

ComplexMatrix conjugate_on(const ComplexMatrix &op, const ComplexMatrix &rho, std::span<const std::size_t> dims,
                           std::span<const std::size_t> targets) {
    // K (K rho)† = K rho† K† = K rho K† for Hermitian rho.
    return apply_on(op, apply_on(op, rho, dims, targets).adjoint(), dims, targets);
}

ComplexMatrix permute_factors(const ComplexMatrix &m, std::span<const std::size_t> dims,
                              std::span<const std::size_t> order) {
    check_factor_list(dims, order);
    if (order.size() != dims.size()) {
        throw DimensionError("permute_factors: order must list every factor");
    }
    const std::size_t n = product(dims);
    // Old full offsets enumerated in the new factor order give the new→old map.
    const auto old_strides = strides_of(dims);
    const auto new_to_old = offsets(dims, old_strides, order);
    if (m.is_column() && m.rows() == n) {
        ComplexMatrix out(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            out(i, 0) = m(new_to_old[i], 0);
        }
        return out;
    }
    if (!m.is_square() || m.rows() != n) {
        throw DimensionError("permute_factors: operand dimension does not match factors");
    }
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out(i, j) = m(new_to_old[i], new_to_old[j]);
        }
    }
    return out;
}

cplx inner(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (!a.is_column() || !b.is_column() || a.rows() != b.rows()) {
        throw DimensionError("inner product needs equal-length column vectors");
    }
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        s += std::conj(a(i, 0)) * b(i, 0);
    }
    return s;
}

ComplexMatrix projector(const ComplexMatrix &v, Tolerance tol) {
    if (!v.is_column()) {
        throw DimensionError("projector expects a column vector");
    }
    if (std::abs(v.norm() - 1.0) > tol.eps) {
        throw NumericError("projector expects a unit vector");
    }
    return v * v.adjoint();
}

double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff of mismatched shapes");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i) {
        m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
    }
    return m;
}

bool approx_equal(const ComplexMatrix &a, const ComplexMatrix &b, Tolerance tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    return max_abs_diff(a, b) < tol.eps;
}

bool is_unitary(const ComplexMatrix &m, Tolerance tol) {
    if (!m.is_square()) {
        return false;
    }
    return (m.adjoint() * m - ComplexMatrix::identity(m.rows())).norm() < tol.eps;
}

bool is_hermitian(const ComplexMatrix &m, Tolerance tol) {
    if (!m.is_square()) {
        return false;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i; j < m.cols(); ++j) {
            const double d = std::norm(m(i, j) - std::conj(m(j, i)));
            sum += i == j ? d : 2.0 * d;
        }
    }
    return std::sqrt(sum) < tol.eps;
}

bool is_psd(const ComplexMatrix &m, Tolerance tol) {
    if (!is_hermitian(m, tol)) {
        return false;
    }
    if (m.rows() <= 32) {
        const auto es = eigh(m, tol);
        return es.values.front() > -tol.eps;
    }
    // Large operators: Cholesky with diagonal pivoting. A PSD matrix runs out
    // of positive pivots only when the trailing block has vanished.
    const std::size_t n = m.rows();
    ComplexMatrix a = m;
    std::vector<std::size_t> rest(n);
    for (std::size_t i = 0; i < n; ++i) {
        rest[i] = i;
    }
    const double scale = std::max(1.0, m.norm());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a(rest[i], rest[i]).real() > a(rest[best], rest[best]).real()) {
                best = i;
            }
        }
        std::swap(rest[k], rest[best]);
        const std::size_t p = rest[k];
        const double d = a(p, p).real();
        if (d <= tol.eps * scale) {
            if (d < -tol.eps * scale) {
                return false;
            }
            for (std::size_t i = k; i < n; ++i) {
                for (std::size_t j = k; j < n; ++j) {
                    if (std::abs(a(rest[i], rest[j])) > std::sqrt(tol.eps) * scale) {
                        return false;
                    }
                }
            }
            return true;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = a(rest[i], p) / d;
            if (f == cplx{0.0}) {
                continue;
            }
            for (std::size_t j = k + 1; j < n; ++j) {
                a(rest[i], rest[j]) -= f * a(p, rest[j]);
            }
        }
    }
    return true;
}

bool is_trace_one(const ComplexMatrix &m, Tolerance tol) {
    return m.is_square() && std::abs(m.trace() - cplx{1.0}) < tol.eps;
}

bool is_density_operator(const ComplexMatrix &m, Tolerance tol) {
    return is_trace_one(m, tol) && is_psd(m, tol);
}

EigenSystem eigh(const ComplexMatrix &h, Tolerance tol) {
    if (!h.is_square()) {
        throw DimensionError("eigh of a non-square matrix");
    }
    if (!is_hermitian(h, tol)) {
        throw NumericError("eigh expects a Hermitian matrix");
    }
    const std::size_t n = h.rows();
    ComplexMatrix a = h;
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(1.0, h.norm());
    constexpr double kConverge = 1e-12;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += std::norm(a(p, q));
            }
        }
        if (std::sqrt(off) < kConverge * scale) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag < 1e-300) {
                    continue;
                }
                // Rotate the phase out of a(p,q), then apply a real Jacobi rotation.
                const cplx phase = apq / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // Columns p,q of the 2x2 unitary G = diag(1, conj(phase)) * [[c, s], [-s, c]].
                const cplx g_pp = c;
                const cplx g_pq = s;
                const cplx g_qp = -s * std::conj(phase);
                const cplx g_qq = c * std::conj(phase);
                // a <- a * G
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = akp * g_pp + akq * g_qp;
                    a(k, q) = akp * g_pq + akq * g_qq;
                }
                // a <- G† * a
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
                    a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = vkp * g_pp + vkq * g_qp;
                    v(k, q) = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return a(i, i).real() < a(j, j).real(); });
    EigenSystem es;
    for (auto i : idx) {
        es.values.push_back(a(i, i).real());
        es.vectors.push_back(v.col(i));
    }
    return es;
}

std::vector<ComplexMatrix> support_basis(const ComplexMatrix &rho, Tolerance tol) {
    const auto es = eigh(rho, tol);
    std::vector<ComplexMatrix> out;
    for (std::size_t i = es.values.size(); i-- > 0;) {
        if (es.values[i] > tol.eps) {
            out.push_back(es.vectors[i]);
        }
    }
    return out;
}

std::size_t rank_of(std::span<const ComplexMatrix> vectors, Tolerance tol) {
    std::vector<ComplexMatrix> ortho;
    for (const auto &v : vectors) {
        ComplexMatrix w = v;
        // Two passes of modified Gram-Schmidt.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto &u : ortho) {
                w -= u * inner(u, w);
            }
        }
        const double nrm = w.norm();
        if (nrm > std::sqrt(tol.eps)) {
            ortho.push_back(w * cplx{1.0 / nrm});
        }
    }
    return ortho.size();
}

bool is_orthonormal_basis(std::span<const ComplexMatrix> basis, std::size_t dim, Tolerance tol) {
    if (basis.size() != dim) {
        return false;
    }
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (!basis[i].is_column() || basis[i].rows() != dim) {
            return false;
        }
        for (std::size_t j = i; j < basis.size(); ++j) {
            const cplx expected = (i == j) ? 1.0 : 0.0;
            if (std::abs(inner(basis[i], basis[j]) - expected) > tol.eps) {
                return false;
            }
        }
    }
    return true;
}

} // namespace epiq
