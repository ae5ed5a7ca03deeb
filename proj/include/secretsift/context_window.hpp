// Copyright 2026 The secretsift Authors
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>

#include "secretsift/error.hpp"
#include "secretsift/utf8.hpp"

namespace secretsift {

/// Window sizes compared in the evaluation: the default and the wider one.
inline constexpr std::size_t kDefaultWindowChars = 200;
inline constexpr std::size_t kWideWindowChars = 300;

/// A slice of normalized file text around a candidate. The candidate's own
/// characters do not count against `window_chars`.
struct ContextWindow {
    std::string text;
    std::size_t window_chars = 0;
    std::size_t span_start = 0; // candidate position inside `text`, code points
    std::size_t span_end = 0;
    std::size_t file_start = 0; // window position inside the file, code points
    std::size_t file_end = 0;
};

/// floor(W/2) characters before the candidate and W - floor(W/2) after it,
/// each side clamped at the file boundary. Unused budget on one side is not
/// moved to the other.
inline ContextWindow extract_window(std::u32string_view text, std::size_t start, std::size_t end, std::size_t window_chars)
{
    if (start > end || end > text.size()) {
        throw Error(ErrorCode::SpanOutOfRange, "span [" + std::to_string(start) + ", " + std::to_string(end)
                                                   + ") outside text of length " + std::to_string(text.size()));
    }
    const std::size_t before = window_chars / 2;
    const std::size_t after = window_chars - before;
    ContextWindow w;
    w.window_chars = window_chars;
    w.file_start = start - std::min(start, before);
    w.file_end = end + std::min(text.size() - end, after);
    w.text = utf8::encode(text.substr(w.file_start, w.file_end - w.file_start));
    w.span_start = start - w.file_start;
    w.span_end = end - w.file_start;
    return w;
}

inline ContextWindow extract_window(std::string_view normalized_utf8, std::size_t start, std::size_t end, std::size_t window_chars)
{
    const std::u32string text = utf8::decode_lossy(normalized_utf8);
    return extract_window(std::u32string_view(text), start, end, window_chars);
}

} // namespace secretsift
