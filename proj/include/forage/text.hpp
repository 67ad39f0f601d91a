/*
 * Copyright 2026 The Forage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forage {

// Lowercases ASCII letters, splits on ASCII punctuation and whitespace, drops
// apostrophes inside words ("don't" -> "dont"), and removes tokens that are
// pure numerals or stop words. Bytes >= 0x80 are treated as word characters so
// UTF-8 text survives intact.
std::vector<std::string> tokenize(std::string_view text);

bool is_stop_word(std::string_view token);

// The shipped stop-word list, sorted.
const std::vector<std::string>& stop_words();

}  // namespace forage
