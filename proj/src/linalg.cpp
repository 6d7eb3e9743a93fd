// SPDX-License-Identifier: Apache-2.0
//
// edgeflow - communication-efficient edge learning simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "edgeflow/linalg.hpp"

#include "edgeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edgeflow::linalg
{

namespace
{

double orthonormality_defect(const ComplexMatrix &basis)
{
    const Eigen::Index n = basis.cols();
    return (basis.adjoint() * basis - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

void require_same_shape(const Subspace &u, const Subspace &a)
{
    if (u.ambient_dim() != a.ambient_dim() || u.subspace_dim() != a.subspace_dim())
        throw DimensionMismatch("subspace shapes differ: " + std::to_string(u.ambient_dim()) + "x" +
                                std::to_string(u.subspace_dim()) + " vs " + std::to_string(a.ambient_dim()) + "x" +
                                std::to_string(a.subspace_dim()));
}

} // namespace

Subspace::Subspace(ComplexMatrix basis) : basis_(std::move(basis))
{
    if (basis_.rows() < 1 || basis_.cols() < 1)
        throw InvalidInput("subspace basis must be non-empty");
    if (basis_.cols() > basis_.rows())
        throw DimensionMismatch("subspace dimension exceeds ambient dimension");
    if (!all_finite(basis_))
        throw InvalidInput("subspace basis has non-finite entries");
    if (orthonormality_defect(basis_) > kOrthonormalTol)
        throw InvalidInput("subspace basis columns are not orthonormal");
}

Subspace Subspace::span_of(const ComplexMatrix &m)
{
    if (m.cols() > m.rows())
        throw DimensionMismatch("cannot span more columns than rows");
    if (!all_finite(m))
        throw InvalidInput("matrix has non-finite entries");
    Eigen::HouseholderQR<ComplexMatrix> qr(m);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m.rows(), m.cols());
    return Subspace(std::move(q));
}

bool all_finite(const ComplexMatrix &m)
{
    return m.real().allFinite() && m.imag().allFinite();
}

ComplexVector canonicalize_phase(ComplexMatrix &columns)
{
    ComplexVector phases = ComplexVector::Ones(columns.cols());
    for (Eigen::Index j = 0; j < columns.cols(); ++j)
    {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < columns.rows(); ++i)
        {
            const double mag = std::abs(columns(i, j));
            if (mag > best)
            {
                best = mag;
                pivot = i;
            }
        }
        if (best <= 0.0)
            continue;
        const Complex phase = std::conj(columns(pivot, j)) / best;
        columns.col(j) *= phase;
        columns(pivot, j) = Complex(columns(pivot, j).real(), 0.0);
        phases(j) = phase;
    }
    return phases;
}

SvdTriple svd(const ComplexMatrix &matrix)
{
    if (matrix.rows() < 1 || matrix.cols() < 1)
        throw InvalidInput("svd of an empty matrix");
    if (!all_finite(matrix))
        throw InvalidInput("svd input has non-finite entries");

    Eigen::JacobiSVD<ComplexMatrix> solver(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdTriple out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    if (!out.singular_values.allFinite() || !all_finite(out.U) || !all_finite(out.V))
        throw NumericalFailure("svd did not converge to a finite factorization");

    // Same phase on u_i and v_i leaves u_i s_i v_i^H unchanged.
    const ComplexVector phases = canonicalize_phase(out.U);
    for (Eigen::Index j = 0; j < out.V.cols(); ++j)
        out.V.col(j) *= phases(j);
    return out;
}

double proj_dist_2(const Subspace &u, const Subspace &a)
{
    require_same_shape(u, a);
    const ComplexMatrix diff = u.projector() - a.projector();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(diff, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double proj_dist_fro(const Subspace &u, const Subspace &a)
{
    require_same_shape(u, a);
    // Entrywise form; the closed form 2(N - |A^H U|_F^2) loses half the digits near zero.
    return (u.projector() - a.projector()).norm();
}

HermitianEig hermitian_eig(const ComplexMatrix &g)
{
    if (g.rows() < 1 || g.rows() != g.cols())
        throw InvalidInput("hermitian_eig requires a non-empty square matrix");
    if (!all_finite(g))
        throw InvalidInput("hermitian_eig input has non-finite entries");
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale)
        throw InvalidInput("hermitian_eig input is not Hermitian");

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(g);
    if (solver.info() != Eigen::Success)
        throw NumericalFailure("hermitian eigen-decomposition failed");

    // Solver returns ascending order; reverse to nonincreasing.
    const Eigen::Index n = g.rows();
    HermitianEig out{RealVector(n), ComplexMatrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
    {
        out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    canonicalize_phase(out.eigenvectors);
    return out;
}

CentroidResult grassmann_centroid(std::span<const Subspace> subspaces, Eigen::Index n)
{
    if (subspaces.empty())
        throw InvalidInput("grassmann_centroid needs at least one subspace");
    if (n < 1)
        throw InvalidInput("centroid dimension must be positive");
    const Eigen::Index m = subspaces.front().ambient_dim();
    for (const auto &s : subspaces)
        if (s.ambient_dim() != m)
            throw DimensionMismatch("subspaces have different ambient dimensions");
    if (n > m)
        throw DimensionMismatch("centroid dimension " + std::to_string(n) + " exceeds ambient dimension " +
                                std::to_string(m));

    ComplexMatrix g = ComplexMatrix::Zero(m, m);
    for (const auto &s : subspaces)
        g.noalias() += s.basis() * s.basis().adjoint();
    // Remove rounding asymmetry before the Hermitian check.
    g = (0.5 * (g + g.adjoint())).eval();

    HermitianEig eig = hermitian_eig(g);
    const bool tie = n < m && std::abs(eig.eigenvalues(n - 1) - eig.eigenvalues(n)) <= kEigenTieTol;
    return CentroidResult{Subspace(eig.eigenvectors.leftCols(n)), std::move(eig.eigenvalues), tie};
}

double centroid_objective(std::span<const Subspace> subspaces, const Subspace &a)
{
    double total = 0.0;
    for (const auto &s : subspaces)
    {
        const double d = proj_dist_fro(s, a);
        total += d * d;
    }
    return total;
}

} // namespace edgeflow::linalg
