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

// A small linear-time regular expression engine (Thompson construction,
// Pike VM simulation) over Unicode code points.
//
// Supported: literals, escapes (\d \D \w \W \s \S \b \B \A \z \t \n \r \f \v
// \xHH \x{H..} \uHHHH and escaped punctuation), '.', bracket classes with
// ranges, negation and [:posix:] names, groups (capturing, (?:...), (?<name>...),
// (?P<name>...)), inline flags (?i) (?s) (?m) and (?flags:...), alternation,
// greedy and lazy quantifiers * + ? {n} {n,} {n,m}, anchors ^ $.
//
// Rejected as outside the dialect: backreferences, lookahead, lookbehind,
// atomic groups, possessive quantifiers and \p{..} properties. Matching is
// leftmost-first (Perl-style priority) and runs in O(program x input).

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secretsift/utf8.hpp"

namespace secretsift::regex {

class RegexError : public std::runtime_error {
public:
    enum class Kind { Syntax, Unsupported, TooLarge };

    RegexError(Kind kind, std::size_t offset, const std::string& message)
        : std::runtime_error(message + " at offset " + std::to_string(offset))
        , kind_(kind)
        , offset_(offset)
    {
    }

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const Span&, const Span&) = default;
};

struct Match {
    Span whole;
    /// groups[0] is the whole match; unmatched groups are empty optionals.
    std::vector<std::optional<Span>> groups;
};

inline constexpr std::size_t kMaxRepeat = 1000;
inline constexpr std::size_t kMaxProgram = 20000;

namespace detail {

    inline constexpr char32_t kMaxCodePoint = 0x10FFFF;

    struct Range {
        char32_t lo;
        char32_t hi;
    };

    using Ranges = std::vector<Range>;

    inline Ranges normalize(Ranges r)
    {
        std::sort(r.begin(), r.end(), [](const Range& a, const Range& b) { return a.lo < b.lo; });
        Ranges out;
        for (const auto& x : r) {
            if (!out.empty() && x.lo <= out.back().hi + 1) {
                out.back().hi = std::max(out.back().hi, x.hi);
            } else {
                out.push_back(x);
            }
        }
        return out;
    }

    inline Ranges complement(const Ranges& sorted)
    {
        Ranges out;
        char32_t next = 0;
        for (const auto& x : sorted) {
            if (x.lo > next) {
                out.push_back({next, x.lo - 1});
            }
            next = x.hi + 1;
        }
        if (next <= kMaxCodePoint) {
            out.push_back({next, kMaxCodePoint});
        }
        return out;
    }

    inline Ranges fold_ascii(Ranges r)
    {
        const std::size_t n = r.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto lo = std::max<char32_t>(r[i].lo, 'a');
            const auto hi = std::min<char32_t>(r[i].hi, 'z');
            if (lo <= hi) {
                r.push_back({lo - 32, hi - 32});
            }
            const auto ulo = std::max<char32_t>(r[i].lo, 'A');
            const auto uhi = std::min<char32_t>(r[i].hi, 'Z');
            if (ulo <= uhi) {
                r.push_back({ulo + 32, uhi + 32});
            }
        }
        return normalize(std::move(r));
    }

    inline bool in_ranges(const Ranges& r, char32_t c)
    {
        auto it = std::upper_bound(r.begin(), r.end(), c, [](char32_t v, const Range& x) { return v < x.lo; });
        if (it == r.begin()) {
            return false;
        }
        --it;
        return c <= it->hi;
    }

    inline Ranges digit_ranges() { return {{'0', '9'}}; }
    inline Ranges word_ranges() { return normalize({{'0', '9'}, {'A', 'Z'}, {'_', '_'}, {'a', 'z'}}); }
    inline Ranges space_ranges() { return normalize({{'\t', '\r'}, {' ', ' '}}); }

    inline bool is_word(char32_t c)
    {
        return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    }

    enum class AssertKind : std::uint8_t { TextBegin, TextEnd, LineBegin, LineEnd, WordBoundary, NotWordBoundary };

    struct Node;
    using NodePtr = std::unique_ptr<Node>;

    struct Node {
        enum class Type { Empty, Class, Assert, Concat, Alternate, Repeat, Group };
        Type type = Type::Empty;
        Ranges ranges;              // Class
        AssertKind assertion {};    // Assert
        std::vector<NodePtr> kids;  // Concat, Alternate, Repeat/Group (kids[0])
        std::size_t min = 0;        // Repeat
        std::size_t max = 0;        // Repeat; kUnbounded for open-ended
        bool greedy = true;         // Repeat
        int capture = -1;           // Group
    };

    inline constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

    struct Flags {
        bool icase = false;
        bool dotall = false;
        bool multiline = false;
    };

    class Parser {
    public:
        explicit Parser(std::u32string_view src)
            : src_(src)
        {
        }

        NodePtr parse()
        {
            auto node = parse_alternation();
            if (pos_ < src_.size()) {
                // Only an unmatched ')' can stop the top-level alternation.
                throw RegexError(RegexError::Kind::Syntax, pos_, "unmatched ')'");
            }
            return node;
        }

        int captures() const { return captures_; }

    private:
        std::u32string_view src_;
        std::size_t pos_ = 0;
        int captures_ = 0;
        Flags flags_;

        bool eof() const { return pos_ >= src_.size(); }
        char32_t peek(std::size_t ahead = 0) const
        {
            return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : char32_t {0};
        }

        [[noreturn]] void syntax(const std::string& msg) const
        {
            throw RegexError(RegexError::Kind::Syntax, pos_, msg);
        }
        [[noreturn]] void unsupported(const std::string& msg) const
        {
            throw RegexError(RegexError::Kind::Unsupported, pos_, msg);
        }

        static NodePtr make(Node::Type t)
        {
            auto n = std::make_unique<Node>();
            n->type = t;
            return n;
        }

        NodePtr make_class(Ranges r) const
        {
            auto n = make(Node::Type::Class);
            r = normalize(std::move(r));
            n->ranges = flags_.icase ? fold_ascii(std::move(r)) : std::move(r);
            return n;
        }

        NodePtr make_assert(AssertKind k) const
        {
            auto n = make(Node::Type::Assert);
            n->assertion = k;
            return n;
        }

        NodePtr parse_alternation()
        {
            std::vector<NodePtr> alts;
            alts.push_back(parse_concat());
            while (!eof() && peek() == '|') {
                ++pos_;
                alts.push_back(parse_concat());
            }
            if (alts.size() == 1) {
                return std::move(alts.front());
            }
            auto n = make(Node::Type::Alternate);
            n->kids = std::move(alts);
            return n;
        }

        NodePtr parse_concat()
        {
            auto n = make(Node::Type::Concat);
            while (!eof() && peek() != '|' && peek() != ')') {
                auto atom = parse_atom();
                if (!atom) {
                    continue; // flag-only group such as (?i)
                }
                n->kids.push_back(parse_quantifiers(std::move(atom)));
            }
            return n;
        }

        bool parse_count(std::size_t& value)
        {
            const std::size_t start = pos_;
            value = 0;
            while (!eof() && peek() >= '0' && peek() <= '9') {
                value = value * 10 + (peek() - '0');
                if (value > kMaxRepeat) {
                    throw RegexError(RegexError::Kind::TooLarge, start, "repetition count exceeds 1000");
                }
                ++pos_;
            }
            return pos_ > start;
        }

        NodePtr parse_quantifiers(NodePtr atom)
        {
            bool quantified = false;
            while (!eof()) {
                const char32_t c = peek();
                std::size_t min = 0;
                std::size_t max = 0;
                if (c == '*') {
                    min = 0, max = kUnbounded;
                    ++pos_;
                } else if (c == '+') {
                    min = 1, max = kUnbounded;
                    ++pos_;
                } else if (c == '?') {
                    min = 0, max = 1;
                    ++pos_;
                } else if (c == '{') {
                    const std::size_t save = pos_;
                    ++pos_;
                    if (!parse_count(min)) {
                        pos_ = save; // a literal '{'
                        break;
                    }
                    if (peek() == ',') {
                        ++pos_;
                        if (!parse_count(max)) {
                            max = kUnbounded;
                        }
                    } else {
                        max = min;
                    }
                    if (peek() != '}') {
                        pos_ = save;
                        break;
                    }
                    ++pos_;
                    if (max != kUnbounded && max < min) {
                        syntax("invalid repetition range");
                    }
                } else {
                    break;
                }
                if (quantified) {
                    syntax("nested quantifier");
                }
                quantified = true;
                bool greedy = true;
                if (peek() == '?') {
                    greedy = false;
                    ++pos_;
                } else if (peek() == '+') {
                    unsupported("possessive quantifier");
                }
                if (atom->type == Node::Type::Assert) {
                    syntax("quantifier applied to an assertion");
                }
                auto rep = make(Node::Type::Repeat);
                rep->min = min;
                rep->max = max;
                rep->greedy = greedy;
                rep->kids.push_back(std::move(atom));
                atom = std::move(rep);
            }
            return atom;
        }

        bool parse_flag_letters(Flags& f)
        {
            bool on = true;
            bool any = false;
            while (!eof()) {
                const char32_t c = peek();
                if (c == '-') {
                    on = false;
                } else if (c == 'i') {
                    f.icase = on;
                } else if (c == 's') {
                    f.dotall = on;
                } else if (c == 'm') {
                    f.multiline = on;
                } else {
                    break;
                }
                any = true;
                ++pos_;
            }
            return any;
        }

        NodePtr parse_group()
        {
            ++pos_; // '('
            int capture = -1;
            const Flags saved = flags_;
            if (peek() == '?') {
                ++pos_;
                const char32_t c = peek();
                if (c == ':') {
                    ++pos_;
                } else if (c == '=' || c == '!') {
                    unsupported("lookahead");
                } else if (c == '>') {
                    unsupported("atomic group");
                } else if (c == '<' && (peek(1) == '=' || peek(1) == '!')) {
                    unsupported("lookbehind");
                } else if (c == '<' || (c == 'P' && peek(1) == '<')) {
                    pos_ += (c == 'P') ? 2 : 1;
                    while (!eof() && peek() != '>') {
                        if (!is_word(peek())) {
                            syntax("invalid group name");
                        }
                        ++pos_;
                    }
                    if (eof()) {
                        syntax("unterminated group name");
                    }
                    ++pos_;
                    capture = ++captures_;
                } else if (c == 'P' && peek(1) == '=') {
                    unsupported("backreference");
                } else {
                    Flags f = flags_;
                    if (!parse_flag_letters(f)) {
                        syntax("unknown group construct");
                    }
                    if (peek() == ')') {
                        ++pos_;
                        flags_ = f; // applies to the rest of the enclosing group
                        return nullptr;
                    }
                    if (peek() != ':') {
                        syntax("malformed inline flags");
                    }
                    ++pos_;
                    flags_ = f;
                }
            } else {
                capture = ++captures_;
            }
            auto body = parse_alternation();
            if (peek() != ')') {
                syntax("missing ')'");
            }
            ++pos_;
            flags_ = saved;
            auto g = make(Node::Type::Group);
            g->capture = capture;
            g->kids.push_back(std::move(body));
            return g;
        }

        char32_t parse_hex(std::size_t digits)
        {
            char32_t v = 0;
            for (std::size_t i = 0; i < digits; ++i) {
                const char32_t c = peek();
                int d = -1;
                if (c >= '0' && c <= '9') d = static_cast<int>(c - '0');
                else if (c >= 'a' && c <= 'f') d = static_cast<int>(c - 'a' + 10);
                else if (c >= 'A' && c <= 'F') d = static_cast<int>(c - 'A' + 10);
                if (d < 0) {
                    syntax("invalid hex escape");
                }
                v = v * 16 + static_cast<char32_t>(d);
                ++pos_;
            }
            return v;
        }

        // Parses the escape after a backslash. Returns either a set of ranges
        // or an assertion (only outside classes).
        struct Escape {
            Ranges ranges;
            std::optional<AssertKind> assertion;
        };

        Escape parse_escape(bool in_class)
        {
            ++pos_; // '\'
            if (eof()) {
                syntax("trailing backslash");
            }
            const char32_t c = peek();
            ++pos_;
            auto lit = [](char32_t v) { return Escape {{{v, v}}, std::nullopt}; };
            switch (c) {
            case 'd': return {digit_ranges(), std::nullopt};
            case 'D': return {complement(digit_ranges()), std::nullopt};
            case 'w': return {word_ranges(), std::nullopt};
            case 'W': return {complement(word_ranges()), std::nullopt};
            case 's': return {space_ranges(), std::nullopt};
            case 'S': return {complement(space_ranges()), std::nullopt};
            case 't': return lit('\t');
            case 'n': return lit('\n');
            case 'r': return lit('\r');
            case 'f': return lit('\f');
            case 'v': return lit('\v');
            case '0': return lit(0);
            case 'x':
                if (peek() == '{') {
                    ++pos_;
                    char32_t v = 0;
                    std::size_t n = 0;
                    while (!eof() && peek() != '}') {
                        v = v * 16 + parse_hex(1);
                        if (++n > 6 || v > kMaxCodePoint) {
                            syntax("code point out of range");
                        }
                    }
                    if (eof() || n == 0) {
                        syntax("malformed \\x{...}");
                    }
                    ++pos_;
                    return lit(v);
                }
                return lit(parse_hex(2));
            case 'u': return lit(parse_hex(4));
            case 'b':
                if (in_class) {
                    return lit('\b');
                }
                return {{}, AssertKind::WordBoundary};
            case 'B':
                if (in_class) syntax("\\B inside class");
                return {{}, AssertKind::NotWordBoundary};
            case 'A':
                if (in_class) syntax("\\A inside class");
                return {{}, AssertKind::TextBegin};
            case 'z':
                if (in_class) syntax("\\z inside class");
                return {{}, AssertKind::TextEnd};
            case 'k':
                unsupported("backreference");
            case 'p':
            case 'P':
                unsupported("unicode property class");
            default:
                break;
            }
            if (c >= '1' && c <= '9') {
                --pos_;
                unsupported("backreference");
            }
            if (is_word(c) || c > 0x7F) {
                --pos_;
                syntax("unknown escape");
            }
            return lit(c);
        }

        // [:name:] or [:^name:] inside a bracket class, ASCII only.
        Ranges parse_posix_class()
        {
            const std::size_t open = pos_;
            pos_ += 2;
            bool negated = false;
            if (peek() == '^') {
                negated = true;
                ++pos_;
            }
            std::string name;
            while (!eof() && peek() != ':') {
                name.push_back(static_cast<char>(peek()));
                ++pos_;
            }
            if (peek() != ':' || peek(1) != ']') {
                throw RegexError(RegexError::Kind::Syntax, open, "unterminated POSIX class");
            }
            pos_ += 2;
            static const std::map<std::string, Ranges, std::less<>> table {
                {"alnum", {{'0', '9'}, {'A', 'Z'}, {'a', 'z'}}},
                {"alpha", {{'A', 'Z'}, {'a', 'z'}}},
                {"ascii", {{0x00, 0x7F}}},
                {"blank", {{'\t', '\t'}, {' ', ' '}}},
                {"cntrl", {{0x00, 0x1F}, {0x7F, 0x7F}}},
                {"digit", {{'0', '9'}}},
                {"graph", {{'!', '~'}}},
                {"lower", {{'a', 'z'}}},
                {"print", {{' ', '~'}}},
                {"punct", {{'!', '/'}, {':', '@'}, {'[', '`'}, {'{', '~'}}},
                {"space", {{'\t', '\r'}, {' ', ' '}}},
                {"upper", {{'A', 'Z'}}},
                {"word", {{'0', '9'}, {'A', 'Z'}, {'_', '_'}, {'a', 'z'}}},
                {"xdigit", {{'0', '9'}, {'A', 'F'}, {'a', 'f'}}},
            };
            const auto it = table.find(name);
            if (it == table.end()) {
                throw RegexError(RegexError::Kind::Syntax, open, "unknown POSIX class '" + name + "'");
            }
            Ranges r = normalize(it->second);
            return negated ? complement(r) : r;
        }

        NodePtr parse_bracket()
        {
            const std::size_t open = pos_;
            ++pos_; // '['
            bool negated = false;
            if (peek() == '^') {
                negated = true;
                ++pos_;
            }
            Ranges ranges;
            bool first = true;
            while (true) {
                if (eof()) {
                    throw RegexError(RegexError::Kind::Syntax, open, "unterminated character class");
                }
                char32_t c = peek();
                if (c == ']' && !first) {
                    ++pos_;
                    break;
                }
                first = false;
                if (c == '[' && peek(1) == ':') {
                    auto named = parse_posix_class();
                    ranges.insert(ranges.end(), named.begin(), named.end());
                    continue;
                }
                char32_t lo = 0;
                if (c == '\\') {
                    auto esc = parse_escape(true);
                    if (esc.ranges.size() != 1 || esc.ranges[0].lo != esc.ranges[0].hi) {
                        ranges.insert(ranges.end(), esc.ranges.begin(), esc.ranges.end());
                        continue;
                    }
                    lo = esc.ranges[0].lo;
                } else {
                    lo = c;
                    ++pos_;
                }
                if (peek() == '-' && peek(1) != ']' && pos_ + 1 < src_.size()) {
                    ++pos_;
                    char32_t hi = 0;
                    if (peek() == '\\') {
                        auto esc = parse_escape(true);
                        if (esc.ranges.size() != 1 || esc.ranges[0].lo != esc.ranges[0].hi) {
                            syntax("invalid range endpoint");
                        }
                        hi = esc.ranges[0].lo;
                    } else {
                        hi = peek();
                        ++pos_;
                    }
                    if (hi < lo) {
                        syntax("invalid range in character class");
                    }
                    ranges.push_back({lo, hi});
                } else {
                    ranges.push_back({lo, lo});
                }
            }
            ranges = normalize(std::move(ranges));
            if (flags_.icase) {
                ranges = fold_ascii(std::move(ranges));
            }
            if (negated) {
                ranges = complement(ranges);
            }
            auto n = make(Node::Type::Class);
            n->ranges = std::move(ranges);
            return n;
        }

        NodePtr parse_atom()
        {
            const char32_t c = peek();
            switch (c) {
            case '(':
                return parse_group();
            case '[':
                return parse_bracket();
            case '.':
                ++pos_;
                if (flags_.dotall) {
                    return make_class({{0, kMaxCodePoint}});
                }
                return make_class(complement({{'\n', '\n'}}));
            case '^':
                ++pos_;
                return make_assert(flags_.multiline ? AssertKind::LineBegin : AssertKind::TextBegin);
            case '$':
                ++pos_;
                return make_assert(flags_.multiline ? AssertKind::LineEnd : AssertKind::TextEnd);
            case '*':
            case '+':
            case '?':
                syntax("quantifier without operand");
            case '\\': {
                auto esc = parse_escape(false);
                if (esc.assertion) {
                    return make_assert(*esc.assertion);
                }
                return make_class(std::move(esc.ranges));
            }
            default:
                ++pos_;
                return make_class({{c, c}});
            }
        }
    };

    enum class Op : std::uint8_t { Class, Split, Jmp, Save, Assert, Match };

    struct Inst {
        Op op = Op::Match;
        AssertKind assertion {};
        std::uint32_t x = 0; // Split/Jmp target, Save slot, Class index
        std::uint32_t y = 0; // Split alternative
    };

    struct Program {
        std::vector<Inst> code;
        std::vector<Ranges> classes;
        std::size_t slots = 2;
        // First-character prefilter; valid only when can_prefilter.
        bool can_prefilter = false;
        std::bitset<128> first_ascii;
        bool first_non_ascii = false;
    };

    class Compiler {
    public:
        explicit Compiler(Program& prog)
            : prog_(prog)
        {
        }

        void emit_node(const Node& n)
        {
            switch (n.type) {
            case Node::Type::Empty:
                break;
            case Node::Type::Class: {
                prog_.classes.push_back(n.ranges);
                Inst i;
                i.op = Op::Class;
                i.x = static_cast<std::uint32_t>(prog_.classes.size() - 1);
                push(i);
                break;
            }
            case Node::Type::Assert: {
                Inst i;
                i.op = Op::Assert;
                i.assertion = n.assertion;
                push(i);
                break;
            }
            case Node::Type::Concat:
                for (const auto& k : n.kids) {
                    emit_node(*k);
                }
                break;
            case Node::Type::Alternate: {
                std::vector<std::size_t> jumps;
                for (std::size_t k = 0; k + 1 < n.kids.size(); ++k) {
                    const std::size_t split = push({Op::Split});
                    prog_.code[split].x = here();
                    emit_node(*n.kids[k]);
                    jumps.push_back(push({Op::Jmp}));
                    prog_.code[split].y = here();
                }
                emit_node(*n.kids.back());
                for (auto j : jumps) {
                    prog_.code[j].x = here();
                }
                break;
            }
            case Node::Type::Group:
                if (n.capture >= 0) {
                    Inst s;
                    s.op = Op::Save;
                    s.x = static_cast<std::uint32_t>(2 * n.capture);
                    push(s);
                    emit_node(*n.kids[0]);
                    s.x += 1;
                    push(s);
                } else {
                    emit_node(*n.kids[0]);
                }
                break;
            case Node::Type::Repeat:
                emit_repeat(n);
                break;
            }
        }

    private:
        Program& prog_;

        std::uint32_t here() const { return static_cast<std::uint32_t>(prog_.code.size()); }

        std::size_t push(Inst i)
        {
            if (prog_.code.size() >= kMaxProgram) {
                throw RegexError(RegexError::Kind::TooLarge, 0, "compiled program too large");
            }
            prog_.code.push_back(i);
            return prog_.code.size() - 1;
        }

        // split with priority on the "take" branch for greedy repeats
        void set_split(std::size_t split, std::uint32_t take, std::uint32_t skip, bool greedy)
        {
            prog_.code[split].x = greedy ? take : skip;
            prog_.code[split].y = greedy ? skip : take;
        }

        void emit_star(const Node& body, bool greedy)
        {
            const std::size_t split = push({Op::Split});
            const std::uint32_t start = here();
            emit_node(body);
            Inst j;
            j.op = Op::Jmp;
            j.x = static_cast<std::uint32_t>(split);
            push(j);
            set_split(split, start, here(), greedy);
        }

        void emit_repeat(const Node& n)
        {
            const Node& body = *n.kids[0];
            for (std::size_t k = 0; k < n.min; ++k) {
                emit_node(body);
            }
            if (n.max == kUnbounded) {
                // x{n,} is emitted as n copies followed by x*
                emit_star(body, n.greedy);
                return;
            }
            std::vector<std::size_t> splits;
            for (std::size_t k = n.min; k < n.max; ++k) {
                splits.push_back(push({Op::Split}));
                const std::uint32_t start = here();
                emit_node(body);
                prog_.code[splits.back()].x = start; // patched below
            }
            const std::uint32_t end = here();
            for (auto s : splits) {
                set_split(s, prog_.code[s].x, end, n.greedy);
            }
        }
    };

    inline void compute_prefilter(Program& prog)
    {
        std::vector<bool> seen(prog.code.size(), false);
        std::vector<std::uint32_t> stack {0};
        prog.can_prefilter = true;
        while (!stack.empty()) {
            const auto pc = stack.back();
            stack.pop_back();
            if (seen[pc]) {
                continue;
            }
            seen[pc] = true;
            const Inst& i = prog.code[pc];
            switch (i.op) {
            case Op::Match:
                prog.can_prefilter = false;
                return;
            case Op::Jmp:
                stack.push_back(i.x);
                break;
            case Op::Split:
                stack.push_back(i.x);
                stack.push_back(i.y);
                break;
            case Op::Save:
            case Op::Assert:
                stack.push_back(pc + 1);
                break;
            case Op::Class:
                for (const auto& r : prog.classes[i.x]) {
                    for (char32_t c = r.lo; c <= r.hi && c < 128; ++c) {
                        prog.first_ascii.set(c);
                    }
                    if (r.hi >= 128) {
                        prog.first_non_ascii = true;
                    }
                }
                break;
            }
        }
    }

    // Sparse set keyed by program counter, O(1) clear.
    class SparseSet {
    public:
        explicit SparseSet(std::size_t n)
            : sparse_(n)
            , dense_(n)
        {
        }
        bool contains(std::uint32_t v) const
        {
            const auto i = sparse_[v];
            return i < size_ && dense_[i] == v;
        }
        void insert(std::uint32_t v)
        {
            sparse_[v] = static_cast<std::uint32_t>(size_);
            dense_[size_++] = v;
        }
        void clear() { size_ = 0; }

    private:
        std::vector<std::uint32_t> sparse_;
        std::vector<std::uint32_t> dense_;
        std::size_t size_ = 0;
    };

    struct ThreadList {
        explicit ThreadList(std::size_t prog_size, std::size_t slots)
            : visited(prog_size)
            , caps(prog_size * slots)
        {
        }
        SparseSet visited;
        std::vector<std::uint32_t> order; // runnable pcs in priority order
        std::vector<std::size_t> caps;    // slots per pc
        void clear()
        {
            visited.clear();
            order.clear();
        }
    };

} // namespace detail

/// An immutable compiled pattern. Safe to share across threads; every search
/// allocates its own simulation state.
class Regex {
public:
    explicit Regex(std::string_view pattern)
        : source_(pattern)
    {
        const std::u32string src = utf8::decode_lossy(pattern);
        detail::Parser parser(src);
        auto root = parser.parse();
        groups_ = static_cast<std::size_t>(parser.captures());
        prog_.slots = 2 * (groups_ + 1);
        detail::Compiler compiler(prog_);
        detail::Inst save0;
        save0.op = detail::Op::Save;
        save0.x = 0;
        prog_.code.push_back(save0);
        compiler.emit_node(*root);
        detail::Inst save1 = save0;
        save1.x = 1;
        prog_.code.push_back(save1);
        prog_.code.push_back({detail::Op::Match});
        detail::compute_prefilter(prog_);
    }

    const std::string& pattern() const noexcept { return source_; }
    /// Number of capturing groups, excluding the whole match.
    std::size_t group_count() const noexcept { return groups_; }
    std::size_t program_size() const noexcept { return prog_.code.size(); }

    /// Leftmost-first match starting the search at `from`.
    std::optional<Match> search(std::u32string_view text, std::size_t from = 0) const
    {
        using namespace detail;
        const std::size_t n = text.size();
        if (from > n) {
            return std::nullopt;
        }
        const std::size_t slots = prog_.slots;
        constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
        ThreadList clist(prog_.code.size(), slots);
        ThreadList nlist(prog_.code.size(), slots);
        std::vector<std::size_t> working(slots, kUnset);
        std::vector<std::size_t> best;
        bool matched = false;

        struct Frame {
            std::uint32_t pc;
            bool restore;
            std::uint32_t slot;
            std::size_t value;
        };
        std::vector<Frame> stack;

        auto assertion_holds = [&](AssertKind k, std::size_t pos) {
            const bool has_prev = pos > 0;
            const bool has_next = pos < n;
            switch (k) {
            case AssertKind::TextBegin: return pos == 0;
            case AssertKind::TextEnd: return pos == n;
            case AssertKind::LineBegin: return !has_prev || text[pos - 1] == '\n';
            case AssertKind::LineEnd: return !has_next || text[pos] == '\n';
            case AssertKind::WordBoundary:
            case AssertKind::NotWordBoundary: {
                const bool a = has_prev && is_word(text[pos - 1]);
                const bool b = has_next && is_word(text[pos]);
                return (a != b) == (k == AssertKind::WordBoundary);
            }
            }
            return false;
        };

        auto add_thread = [&](ThreadList& list, std::uint32_t pc0, std::size_t pos) {
            stack.push_back({pc0, false, 0, 0});
            while (!stack.empty()) {
                const Frame f = stack.back();
                stack.pop_back();
                if (f.restore) {
                    working[f.slot] = f.value;
                    continue;
                }
                const std::uint32_t pc = f.pc;
                if (list.visited.contains(pc)) {
                    continue;
                }
                list.visited.insert(pc);
                const Inst& inst = prog_.code[pc];
                switch (inst.op) {
                case Op::Jmp:
                    stack.push_back({inst.x, false, 0, 0});
                    break;
                case Op::Split:
                    stack.push_back({inst.y, false, 0, 0});
                    stack.push_back({inst.x, false, 0, 0});
                    break;
                case Op::Save:
                    stack.push_back({0, true, inst.x, working[inst.x]});
                    working[inst.x] = pos;
                    stack.push_back({pc + 1, false, 0, 0});
                    break;
                case Op::Assert:
                    if (assertion_holds(inst.assertion, pos)) {
                        stack.push_back({pc + 1, false, 0, 0});
                    }
                    break;
                case Op::Class:
                case Op::Match:
                    list.order.push_back(pc);
                    std::copy(working.begin(), working.end(), list.caps.begin() + static_cast<std::ptrdiff_t>(pc * slots));
                    break;
                }
            }
        };

        for (std::size_t pos = from;; ++pos) {
            if (!matched) {
                if (clist.order.empty()) {
                    clist.clear();
                }
                if (clist.order.empty() && prog_.can_prefilter) {
                    while (pos < n) {
                        const char32_t c = text[pos];
                        if (c < 128 ? prog_.first_ascii.test(c) : prog_.first_non_ascii) {
                            break;
                        }
                        ++pos;
                    }
                    if (pos >= n) {
                        break;
                    }
                }
                std::fill(working.begin(), working.end(), kUnset);
                add_thread(clist, 0, pos);
            }
            if (clist.order.empty()) {
                if (matched || pos >= n) {
                    break;
                }
                continue;
            }
            nlist.clear();
            for (const std::uint32_t pc : clist.order) {
                const Inst& inst = prog_.code[pc];
                const auto caps_begin = clist.caps.begin() + static_cast<std::ptrdiff_t>(pc * slots);
                if (inst.op == Op::Match) {
                    matched = true;
                    best.assign(caps_begin, caps_begin + static_cast<std::ptrdiff_t>(slots));
                    break; // lower-priority threads are cut
                }
                if (pos < n && in_ranges(prog_.classes[inst.x], text[pos])) {
                    std::copy(caps_begin, caps_begin + static_cast<std::ptrdiff_t>(slots), working.begin());
                    add_thread(nlist, pc + 1, pos + 1);
                }
            }
            std::swap(clist, nlist);
            if (pos >= n) {
                break;
            }
        }
        if (!matched) {
            return std::nullopt;
        }
        Match m;
        m.whole = {best[0], best[1]};
        m.groups.resize(groups_ + 1);
        for (std::size_t g = 0; g <= groups_; ++g) {
            if (best[2 * g] != kUnset && best[2 * g + 1] != kUnset) {
                m.groups[g] = Span {best[2 * g], best[2 * g + 1]};
            }
        }
        return m;
    }

    std::optional<Match> search(std::string_view utf8_text) const
    {
        return search(utf8::decode_lossy(utf8_text), 0);
    }

    /// All leftmost non-overlapping, non-empty matches in order.
    std::vector<Match> find_all(std::u32string_view text) const
    {
        std::vector<Match> out;
        std::size_t from = 0;
        while (from <= text.size()) {
            auto m = search(text, from);
            if (!m) {
                break;
            }
            if (m->whole.end == m->whole.begin) {
                from = m->whole.end + 1;
                continue;
            }
            from = m->whole.end;
            out.push_back(std::move(*m));
        }
        return out;
    }

private:
    std::string source_;
    std::size_t groups_ = 0;
    detail::Program prog_;
};

} // namespace secretsift::regex
