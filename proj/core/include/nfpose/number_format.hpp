// Copyright 2026 The nfpose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>

namespace nfpose {

/// Decimal text with 17 significant digits; parse_double() of the result
/// reproduces the input bit for bit.
std::string format_double(double v);

/// Strict full-string parse. Throws kInvalidArgument on trailing garbage.
double parse_double(std::string_view text);

}  // namespace nfpose
