// Copyright 2026 The inrvc Authors. All Rights Reserved.
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

#ifndef INRVC_ERRORS_HPP_
#define INRVC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace inrvc {

// Every failure the library reports derives from Error so callers (the CLI in
// particular) can map families of failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define INRVC_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    explicit Name(const std::string& what)  \
        : Error(std::string(#Name ": ") + what) {} \
  }

INRVC_DEFINE_ERROR(ShapeError);
INRVC_DEFINE_ERROR(CoordError);
INRVC_DEFINE_ERROR(ParamError);
INRVC_DEFINE_ERROR(SymbolError);
INRVC_DEFINE_ERROR(DecodeError);
INRVC_DEFINE_ERROR(ContextError);
INRVC_DEFINE_ERROR(StateError);
INRVC_DEFINE_ERROR(TrainError);
INRVC_DEFINE_ERROR(OverfitError);
INRVC_DEFINE_ERROR(RangeError);
INRVC_DEFINE_ERROR(ConfigError);
INRVC_DEFINE_ERROR(IoError);

// Container-level failures.
INRVC_DEFINE_ERROR(FormatError);
INRVC_DEFINE_ERROR(VersionError);
INRVC_DEFINE_ERROR(CorruptError);

#undef INRVC_DEFINE_ERROR

}  // namespace inrvc

#endif  // INRVC_ERRORS_HPP_
