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


#include <random>

#include <gtest/gtest.h>

#include "secretsift/context_window.hpp"

using namespace secretsift;

namespace {

// Straight from the rule: half (rounded down) before, the rest after.
std::pair<std::size_t, std::size_t> window_oracle(std::size_t n, std::size_t s, std::size_t e, std::size_t w)
{
    const long long lo = static_cast<long long>(s) - static_cast<long long>(w / 2);
    const long long hi = static_cast<long long>(e) + static_cast<long long>(w - w / 2);
    return {static_cast<std::size_t>(std::max(0LL, lo)), static_cast<std::size_t>(std::min<long long>(static_cast<long long>(n), hi))};
}

std::u32string random_text(std::mt19937_64& rng, std::size_t n)
{
    std::u32string t;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = rng() % 10;
        t.push_back(r == 0 ? U'\n' : r == 1 ? U'é' : r == 2 ? U'\U0001F511' : static_cast<char32_t>(U'a' + rng() % 26));
    }
    return t;
}

} // namespace

TEST(ContextWindow, CenteredWindow)
{
    const std::u32string text(1000, U'x');
    const auto w = extract_window(std::u32string_view(text), 500, 520, 200);
    EXPECT_EQ(w.file_start, 400u);
    EXPECT_EQ(w.file_end, 620u);
    EXPECT_EQ(w.span_start, 100u);
    EXPECT_EQ(w.span_end, 120u);
}

TEST(ContextWindow, LeftClampDoesNotRedistribute)
{
    const std::u32string text(1000, U'x');
    const auto w = extract_window(std::u32string_view(text), 10, 20, 200);
    EXPECT_EQ(w.file_start, 0u);
    EXPECT_EQ(w.file_end, 120u);
}

TEST(ContextWindow, ZeroBudgetIsCandidate)
{
    const auto w = extract_window(std::string_view("abc SECRET def"), 4, 10, 0);
    EXPECT_EQ(w.text, "SECRET");
}

TEST(ContextWindow, OddBudgetFavoursAfter)
{
    const std::u32string text(100, U'x');
    const auto w = extract_window(std::u32string_view(text), 50, 51, 5);
    EXPECT_EQ(w.file_start, 48u);
    EXPECT_EQ(w.file_end, 54u);
}

TEST(ContextWindow, SpanOutOfRange)
{
    EXPECT_THROW(extract_window(std::string_view("abc"), 2, 4, 10), Error);
    EXPECT_THROW(extract_window(std::string_view("abc"), 3, 2, 10), Error);
}

TEST(ContextWindow, MultibyteCharactersAreNotSplit)
{
    const auto w = extract_window(std::string_view("ééKEYéé"), 2, 5, 2);
    EXPECT_EQ(w.text, "éKEYé");
}

TEST(ContextWindow, RandomProperties)
{
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng() % 800;
        const std::u32string text = random_text(rng, n);
        const std::size_t s = rng() % n;
        const std::size_t e = s + 1 + rng() % std::min<std::size_t>(n - s, 40);
        const std::size_t w = rng() % 400;
        const auto cw = extract_window(std::u32string_view(text), s, e, w);
        const auto [lo, hi] = window_oracle(n, s, e, w);
        ASSERT_EQ(cw.file_start, lo);
        ASSERT_EQ(cw.file_end, hi);
        const std::u32string got = utf8::decode_lossy(cw.text);
        EXPECT_EQ(got.substr(cw.span_start, cw.span_end - cw.span_start), text.substr(s, e - s));
        EXPECT_LE(got.size(), w + (e - s));

        const auto narrow = extract_window(std::u32string_view(text), s, e, 200);
        const auto wide = extract_window(std::u32string_view(text), s, e, 300);
        EXPECT_NE(wide.text.find(narrow.text), std::string::npos);
        if (n <= w / 2 + (e - s) && s <= w / 2 && n - e <= w - w / 2) {
            EXPECT_EQ(got, text);
        }
    }
}
