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

#include <stdexcept>
#include <string>

namespace edgeflow
{

// Base class of every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error
{
  public:
    using Error::Error;
};

class DimensionMismatch : public Error
{
  public:
    using Error::Error;
};

class NumericalFailure : public Error
{
  public:
    using Error::Error;
};

// Raised by the zero-forcing precoder when the N-th singular value is below threshold.
class IllConditionedChannel : public Error
{
  public:
    IllConditionedChannel(const std::string &what, int device_id) : Error(what), device_id_(device_id) {}
    int device_id() const noexcept { return device_id_; }

  private:
    int device_id_;
};

class AlignmentSingular : public Error
{
  public:
    using Error::Error;
};

class FormatError : public Error
{
  public:
    using Error::Error;
};

class ConfigError : public Error
{
  public:
    using Error::Error;
};

class ModelDegenerate : public Error
{
  public:
    using Error::Error;
};

} // namespace edgeflow
