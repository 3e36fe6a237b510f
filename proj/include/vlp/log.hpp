/* Copyright 2026 The VLP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef VLP_LOG_HPP_
#define VLP_LOG_HPP_

#include <string_view>

namespace vlp::log {

// Warnings go to stderr unless silenced. Thread-safe.
void warn(std::string_view message);
void info(std::string_view message);
void set_quiet(bool quiet);
bool quiet();

}  // namespace vlp::log

#endif  // VLP_LOG_HPP_
