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

#include "edgeflow/channel.hpp"
#include "edgeflow/linalg.hpp"

#include <cmath>
#include <complex>
#include <vector>

// Reference helpers shared by the unit tests and the acceptance gate. They use
// only elementary loops so that they stay independent of the library code.
namespace edgeflow::testing
{

inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, RngStream &rng)
{
    ComplexMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = rng.complex_normal();
    return m;
}

/// Modified Gram-Schmidt orthonormalization of the columns of m.
inline ComplexMatrix gram_schmidt(ComplexMatrix m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
    {
        for (Eigen::Index p = 0; p < j; ++p)
        {
            Complex dot = 0.0;
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                dot += std::conj(m(i, p)) * m(i, j);
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                m(i, j) -= dot * m(i, p);
        }
        double norm = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            norm += std::norm(m(i, j));
        norm = std::sqrt(norm);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            m(i, j) /= norm;
    }
    return m;
}

inline ComplexMatrix random_stiefel(Eigen::Index rows, Eigen::Index cols, RngStream &rng)
{
    return gram_schmidt(random_complex(rows, cols, rng));
}

/// Entry by entry product a * b.
inline ComplexMatrix naive_mul(const ComplexMatrix &a, const ComplexMatrix &b)
{
    ComplexMatrix c = ComplexMatrix::Zero(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j)
            for (Eigen::Index k = 0; k < a.cols(); ++k)
                c(i, j) += a(i, k) * b(k, j);
    return c;
}

inline ComplexMatrix naive_adjoint(const ComplexMatrix &a)
{
    ComplexMatrix t(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            t(j, i) = std::conj(a(i, j));
    return t;
}

inline double naive_fro(const ComplexMatrix &a)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            s += std::norm(a(i, j));
    return std::sqrt(s);
}

/// ||U U^H - A A^H||_F squared, summed entry by entry.
inline double naive_dpf2(const ComplexMatrix &u, const ComplexMatrix &a)
{
    const ComplexMatrix d = naive_mul(u, naive_adjoint(u)) - naive_mul(a, naive_adjoint(a));
    const double f = naive_fro(d);
    return f * f;
}

inline double naive_objective(const std::vector<ComplexMatrix> &us, const ComplexMatrix &a)
{
    double s = 0.0;
    for (const auto &u : us)
        s += naive_dpf2(u, a);
    return s;
}

} // namespace edgeflow::testing
