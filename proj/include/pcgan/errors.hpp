// Copyright 2026 The pcgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCGAN__ERRORS_HPP_
#define PCGAN__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pcgan
{

/**
 * @brief Base class of every error raised by the library.
 *
 * The CLI maps the concrete subclasses onto distinct exit codes, so new error
 * kinds should derive from one of the classes below rather than from Error.
 */
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not line up.
class DimensionError : public Error
{
public:
  using Error::Error;
};

/// A math function evaluated outside its domain (log of a non-positive value).
class DomainError : public Error
{
public:
  using Error::Error;
};

/// NaN/Inf produced during a forward op, or a guard tripped during training.
class NumericError : public Error
{
public:
  using Error::Error;
};

/// The caller asked for something the contract forbids.
class UsageError : public Error
{
public:
  using Error::Error;
};

/// Input data that violates a structural invariant (incomplete scene, ...).
class DataError : public Error
{
public:
  using Error::Error;
};

/// Malformed text input; the message carries the location.
class ParseError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

}  // namespace pcgan

#endif  // PCGAN__ERRORS_HPP_
