// SPDX-License-Identifier: Apache-2.0
//
// beamopt: multi-user MISO downlink beamforming toolkit
// Copyright (C) 2026 The beamopt authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamopt
{

// Root of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

class NonFiniteValue : public Error
{
public:
    using Error::Error;
};

class SingularMatrix : public Error
{
public:
    SingularMatrix(std::size_t pivot, const std::string &what)
        : Error(what + " (pivot index " + std::to_string(pivot) + ")"), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// Gram matrix of the effective channel could not be inverted.
class SingularChannel : public Error
{
public:
    using Error::Error;
};

// Virtual uplink power iteration did not settle; carries the last iterate.
class InfeasibleTargets : public Error
{
public:
    InfeasibleTargets(std::vector<double> last_iterate, const std::string &what)
        : Error(what), last_(std::move(last_iterate)) {}
    const std::vector<double> &last_iterate() const noexcept { return last_; }

private:
    std::vector<double> last_;
};

// Dataset / checkpoint I/O
class DatasetError : public Error
{
public:
    using Error::Error;
};

class CorruptDataset : public DatasetError
{
public:
    using DatasetError::DatasetError;
};

class VersionMismatch : public DatasetError
{
public:
    using DatasetError::DatasetError;
};

class ShapeInconsistency : public DatasetError
{
public:
    using DatasetError::DatasetError;
};

class EmptyDataset : public Error
{
public:
    using Error::Error;
};

class CheckpointError : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    ConfigError(std::string field, const std::string &what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

// Training produced a non-finite loss.
class NanLoss : public Error
{
public:
    NanLoss(std::size_t epoch, std::size_t batch, std::size_t sample, const std::string &what)
        : Error(what + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                ", sample " + std::to_string(sample) + ")"),
          epoch_(epoch), batch_(batch), sample_(sample) {}
    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }
    std::size_t sample() const noexcept { return sample_; }

private:
    std::size_t epoch_, batch_, sample_;
};

class AutodiffError : public Error
{
public:
    using Error::Error;
};

} // namespace beamopt
