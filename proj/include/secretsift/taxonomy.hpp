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

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace secretsift {

/// Secret-type categories, in descending order of their frequency in the
/// labeled corpus. The order is also the canonical label order for reports.
enum class TaxonomyClass {
    PrivateKey,
    ApiKeyAndSecret,
    AuthenticationKeyAndToken,
    Other,
    GenericSecret,
    DatabaseAndServerUrl,
    Password,
    Username,
};

inline constexpr std::size_t kTaxonomySize = 8;

inline constexpr std::array<TaxonomyClass, kTaxonomySize> kAllTaxonomyClasses {
    TaxonomyClass::PrivateKey,
    TaxonomyClass::ApiKeyAndSecret,
    TaxonomyClass::AuthenticationKeyAndToken,
    TaxonomyClass::Other,
    TaxonomyClass::GenericSecret,
    TaxonomyClass::DatabaseAndServerUrl,
    TaxonomyClass::Password,
    TaxonomyClass::Username,
};

constexpr std::string_view slug(TaxonomyClass c) noexcept
{
    switch (c) {
    case TaxonomyClass::PrivateKey: return "private_key";
    case TaxonomyClass::ApiKeyAndSecret: return "api_key_and_secret";
    case TaxonomyClass::AuthenticationKeyAndToken: return "authentication_key_and_token";
    case TaxonomyClass::Other: return "other";
    case TaxonomyClass::GenericSecret: return "generic_secret";
    case TaxonomyClass::DatabaseAndServerUrl: return "database_and_server_url";
    case TaxonomyClass::Password: return "password";
    case TaxonomyClass::Username: return "username";
    }
    return {};
}

/// Human-readable category name as used in prompts and reports.
constexpr std::string_view display_name(TaxonomyClass c) noexcept
{
    switch (c) {
    case TaxonomyClass::PrivateKey: return "Private Key";
    case TaxonomyClass::ApiKeyAndSecret: return "API Key and Secret";
    case TaxonomyClass::AuthenticationKeyAndToken: return "Authentication Key and Token";
    case TaxonomyClass::Other: return "Other";
    case TaxonomyClass::GenericSecret: return "Generic Secret";
    case TaxonomyClass::DatabaseAndServerUrl: return "Database and Server URL";
    case TaxonomyClass::Password: return "Password";
    case TaxonomyClass::Username: return "Username";
    }
    return {};
}

constexpr std::optional<TaxonomyClass> taxonomy_from_slug(std::string_view s) noexcept
{
    for (auto c : kAllTaxonomyClasses) {
        if (slug(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

constexpr std::optional<TaxonomyClass> taxonomy_from_display_name(std::string_view s) noexcept
{
    for (auto c : kAllTaxonomyClasses) {
        if (display_name(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

/// Binary classification outcome.
enum class Label { Secret, NonSensitive };

constexpr std::string_view to_string(Label l) noexcept
{
    return l == Label::Secret ? "Secret" : "Non-sensitive";
}

/// Dataset-file spelling (`secret`, `non_sensitive`).
constexpr std::string_view slug(Label l) noexcept
{
    return l == Label::Secret ? "secret" : "non_sensitive";
}

constexpr std::optional<Label> label_from_slug(std::string_view s) noexcept
{
    if (s == "secret") return Label::Secret;
    if (s == "non_sensitive") return Label::NonSensitive;
    return std::nullopt;
}

enum class Mode { Binary, Multiclass };

constexpr std::string_view to_string(Mode m) noexcept
{
    return m == Mode::Binary ? "binary" : "multiclass";
}

} // namespace secretsift
