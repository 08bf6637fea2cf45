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

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epiq {

using cplx = std::complex<double>;

/// Raised when operand shapes do not line up (dimension mismatch, non-square
/// input, bad factor list).
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an input violates a numerical precondition (non-normalized
/// vector, non-Hermitian operator, ...).
class NumericError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Comparison threshold used by every approximate check in the library.
struct Tolerance {
    double eps = 1e-9;

    Tolerance() = default;
    explicit Tolerance(double e);
};

/// Dense, row-major complex matrix. Column vectors are `n x 1` matrices.
class ComplexMatrix {
  public:
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);

    static ComplexMatrix zeros(std::size_t rows, std::size_t cols);
    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix column(std::vector<cplx> amplitudes);
    static ComplexMatrix basis_vector(std::size_t dim, std::size_t index);
    /// Row-major nested literal, e.g. `from_rows({{1, 0}, {0, 1}})`.
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows);
    static ComplexMatrix diagonal(std::span<const cplx> diag);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    bool is_column() const { return cols_ == 1; }

    cplx &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const cplx> entries() const { return data_; }
    std::span<cplx> entries() { return data_; }

    ComplexMatrix adjoint() const;
    cplx trace() const;
    /// Frobenius norm.
    double norm() const;
    /// Column `c` as an `rows x 1` matrix.
    ComplexMatrix col(std::size_t c) const;

    ComplexMatrix &operator+=(const ComplexMatrix &o);
    ComplexMatrix &operator-=(const ComplexMatrix &o);
    ComplexMatrix &operator*=(cplx s);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b);

    std::string to_string(int precision = 4) const;

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<cplx> data_;
};

/// Kronecker product `a ⊗ b`.
ComplexMatrix tensor(const ComplexMatrix &a, const ComplexMatrix &b);
ComplexMatrix tensor_all(std::span<const ComplexMatrix> factors);

/// Traces out every factor not listed in `keep`. The kept factors appear in
/// the order given by `keep`, so `keep` doubles as a permutation.
ComplexMatrix partial_trace(const ComplexMatrix &rho, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

/// Lifts `op`, acting on the factors `targets` (in that order), to the whole
/// tensor product space described by `dims`.
ComplexMatrix embed(const ComplexMatrix &op, std::span<const std::size_t> dims,
                    std::span<const std::size_t> targets);

/// `embed(op, dims, targets) * m` without forming the embedded operator.
ComplexMatrix apply_on(const ComplexMatrix &op, const ComplexMatrix &m, std::span<const std::size_t> dims,
                       std::span<const std::size_t> targets);

/// `K rho K†` with `K = embed(op, dims, targets)`, for Hermitian `rho`.
ComplexMatrix conjugate_on(const ComplexMatrix &op, const ComplexMatrix &rho, std::span<const std::size_t> dims,
                           std::span<const std::size_t> targets);

/// Reorders the tensor factors of a vector or square operator: factor `k` of
/// the result is factor `order[k]` of the input.
ComplexMatrix permute_factors(const ComplexMatrix &m, std::span<const std::size_t> dims,
                              std::span<const std::size_t> order);

/// `v v†` for a unit column vector.
ComplexMatrix projector(const ComplexMatrix &v, Tolerance tol = {});

/// `<a|b>` for column vectors.
cplx inner(const ComplexMatrix &a, const ComplexMatrix &b);

/// Largest absolute entry-wise difference; shapes must agree.
double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b);
bool approx_equal(const ComplexMatrix &a, const ComplexMatrix &b, Tolerance tol = {});

bool is_unitary(const ComplexMatrix &m, Tolerance tol = {});
bool is_hermitian(const ComplexMatrix &m, Tolerance tol = {});
bool is_psd(const ComplexMatrix &m, Tolerance tol = {});
bool is_trace_one(const ComplexMatrix &m, Tolerance tol = {});
bool is_density_operator(const ComplexMatrix &m, Tolerance tol = {});

struct EigenSystem {
    std::vector<double> values;         // ascending
    std::vector<ComplexMatrix> vectors; // unit columns, aligned with values
};

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
EigenSystem eigh(const ComplexMatrix &h, Tolerance tol = {});

/// Orthonormal eigenvectors whose eigenvalue exceeds `tol.eps`.
std::vector<ComplexMatrix> support_basis(const ComplexMatrix &rho, Tolerance tol = {});

/// Numerical rank of a family of column vectors (Gram-Schmidt with threshold).
std::size_t rank_of(std::span<const ComplexMatrix> vectors, Tolerance tol = {});

/// True when the family is orthonormal and has `dim` members.
bool is_orthonormal_basis(std::span<const ComplexMatrix> basis, std::size_t dim, Tolerance tol = {});

std::size_t product(std::span<const std::size_t> dims);

} // namespace epiq
