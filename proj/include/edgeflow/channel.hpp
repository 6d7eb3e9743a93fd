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

#include "edgeflow/linalg.hpp"

#include <cstdint>
#include <random>

namespace edgeflow
{

/// Reproducible random stream. Identical (seed, stream_id) pairs yield
/// identical draw sequences; distinct stream ids are decorrelated by
/// splitmix64 mixing of the engine seed.
class RngStream
{
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    /// Stream for one (module, device, round) cell of an experiment.
    static RngStream derive(std::uint64_t master_seed, std::uint64_t module_tag, std::uint64_t device_id,
                            std::uint64_t round);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    double normal();          // N(0, 1)
    double uniform();         // U[0, 1)
    Complex complex_normal(); // CN(0, 1): real and imaginary parts each variance 1/2
    std::uint64_t next_u64() { return engine_(); }
    std::size_t index(std::size_t n); // uniform on {0, ..., n-1}

    std::mt19937_64 &engine() noexcept { return engine_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

namespace channel
{

struct MimoChannel
{
    ComplexMatrix H; // M_r x M_t
    int device_id = 0;
};

struct ScalarLink
{
    double snr_linear = 1.0;
    int device_id = 0;
};

enum class Fading
{
    rayleigh,
    none // |h|^2 fixed to 1
};

double db_to_linear(double db);

/// i.i.d. CN(0, 1) entries.
MimoChannel sample_rayleigh_mimo(int m_r, int m_t, RngStream &rng, int device_id = 0);

/// snr = 10^(mean_snr_db / 10) * |h|^2, h ~ CN(0, 1) (or |h|^2 = 1 without fading).
ScalarLink sample_scalar_link(double mean_snr_db, RngStream &rng, int device_id, Fading fading = Fading::rayleigh);

/// signal + n, n i.i.d. CN(0, noise_variance).
ComplexVector awgn(const ComplexVector &signal, double noise_variance, RngStream &rng);

} // namespace channel
} // namespace edgeflow
