// Copyright 2026 The phylopubo Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace phylopubo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// input
class EmptyInputError : public Error {
  public:
    using Error::Error;
};
class AlignmentRaggedError : public Error {
  public:
    using Error::Error;
};
class TooFewTaxaError : public Error {
  public:
    using Error::Error;
};
class StepMatrixInvalidError : public Error {
  public:
    using Error::Error;
};
class FragmentTooLongError : public Error {
  public:
    using Error::Error;
};
class ParseError : public Error {
  public:
    using Error::Error;
};

// size guards
class BigCountError : public Error {
  public:
    using Error::Error;
};
class EnumerationTooLargeError : public Error {
  public:
    using Error::Error;
};
class TooManyVariablesError : public Error {
  public:
    using Error::Error;
};
class TooManyQubitsError : public Error {
  public:
    using Error::Error;
};

// model / solver contracts
class UnsupportedModelError : public Error {
  public:
    using Error::Error;
};
class ArityError : public Error {
  public:
    using Error::Error;
};
class ScheduleInvalidError : public Error {
  public:
    using Error::Error;
};

}  // namespace phylopubo
