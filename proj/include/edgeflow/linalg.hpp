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

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace edgeflow
{

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

namespace linalg
{

inline constexpr double kOrthonormalTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kEigenTieTol = 1e-9;

/// Thin SVD M = U diag(s) V^H with r = min(rows, cols) columns.
struct SvdTriple
{
    ComplexMatrix U;
    RealVector singular_values; // nonincreasing, nonnegative
    ComplexMatrix V;
};

struct HermitianEig
{
    RealVector eigenvalues; // nonincreasing
    ComplexMatrix eigenvectors;
};

/// A point on the Grassmann manifold: an n-dimensional subspace of C^m held
/// through an orthonormal basis (m x n, n <= m).
class Subspace
{
  public:
    /// Throws InvalidInput unless basis has orthonormal columns within kOrthonormalTol.
    explicit Subspace(ComplexMatrix basis);

    /// Orthonormalizes the columns of an arbitrary full-column-rank matrix (thin QR).
    static Subspace span_of(const ComplexMatrix &m);

    const ComplexMatrix &basis() const noexcept { return basis_; }
    Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
    Eigen::Index subspace_dim() const noexcept { return basis_.cols(); }

    /// Orthogonal projector U U^H.
    ComplexMatrix projector() const { return basis_ * basis_.adjoint(); }

  private:
    ComplexMatrix basis_;
};

struct CentroidResult
{
    Subspace centroid;
    RealVector eigenvalues;  // spectrum of G = sum_k U_k U_k^H, nonincreasing
    bool non_unique = false; // lambda_N == lambda_{N+1} within kEigenTieTol
};

bool all_finite(const ComplexMatrix &m);

/// Rotates every column so its largest-magnitude entry is real and positive.
/// Returns the applied unit phases (one per column).
ComplexVector canonicalize_phase(ComplexMatrix &columns);

SvdTriple svd(const ComplexMatrix &matrix);

double proj_dist_2(const Subspace &u, const Subspace &a);
double proj_dist_fro(const Subspace &u, const Subspace &a);

HermitianEig hermitian_eig(const ComplexMatrix &g);

/// Closed-form Grassmann centroid under the projection-Frobenius distance:
/// the first n principal eigenvectors of G = sum_k U_k U_k^H.
CentroidResult grassmann_centroid(std::span<const Subspace> subspaces, Eigen::Index n);

/// Sum of squared projection-Frobenius distances from a to every subspace.
double centroid_objective(std::span<const Subspace> subspaces, const Subspace &a);

} // namespace linalg
} // namespace edgeflow
