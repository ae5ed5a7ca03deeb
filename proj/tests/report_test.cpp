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

#include "secretsift/report.hpp"

using namespace secretsift;

TEST(Redact, Examples)
{
    EXPECT_EQ(redact("sk_test_4eC39HqLyjWDarjtT1zdp7dc"), "sk_t…p7dc");
    EXPECT_EQ(redact("short"), "********");
    EXPECT_EQ(redact(""), "********");
    EXPECT_EQ(redact("abcdefgh"), "ab…gh");
    EXPECT_EQ(redact("abcdefghijk"), "ab…jk");
    EXPECT_EQ(redact("abcdefghijkl"), "abcd…ijkl");
    EXPECT_EQ(redact("ééééééééxyzw"), "éééé…xyzw");
}

TEST(Redact, NeverEchoesLongInput)
{
    std::mt19937_64 rng(41);
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const auto n = rng() % 40;
        for (std::size_t k = 0; k < n; ++k) s.push_back(static_cast<char>('!' + rng() % 90));
        const std::string r = redact(s);
        if (s.size() >= 8) {
            EXPECT_NE(r, s);
            EXPECT_EQ(r.find(s), std::string::npos);
        }
    }
}

TEST(Dedupe, KeepsLowestPatternPerSpan)
{
    std::vector<Candidate> v(3);
    v[0] = {"1", "a", "alpha", "K", 0, 4, 1, 1, 1.0};
    v[1] = {"2", "a", "beta", "K", 0, 4, 1, 1, 1.0};
    v[2] = {"3", "a", "alpha", "K", 0, 5, 1, 1, 1.0};
    const auto d = dedupe_spans(v);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].pattern_id, "alpha");
    EXPECT_EQ(d[1].end_offset, 5u);
}

TEST(ScanReportJson, VerdictOnlyWhenClassified)
{
    ScanReport r;
    Candidate c {"id", "f.py", "p", "supersecretvalue", 0, 16, 1, 1, 3.5};
    r.findings.push_back(make_finding(c, true));
    auto j = to_json(r);
    EXPECT_FALSE(j["findings"][0].contains("verdict"));
    EXPECT_EQ(j["findings"][0]["candidate"], "supe…alue");
    r.classified = true;
    r.findings[0].verdict = Label::Secret;
    r.findings[0].secret_type = TaxonomyClass::Password;
    j = to_json(r);
    EXPECT_EQ(j["findings"][0]["verdict"], "Secret");
    EXPECT_EQ(j["findings"][0]["secret_type"], "password");
    EXPECT_EQ(j["tool_version"], kToolVersion);
    EXPECT_NE(to_table(r).find("Secret (Password)"), std::string::npos);
}

TEST(EvaluationReportJson, CarriesBothAveragingSchemes)
{
    EvaluationReport r;
    r.confusion = binary_confusion(1496, 4, 37, 1463);
    r.metrics = class_report(r.confusion);
    const auto j = to_json(r);
    EXPECT_DOUBLE_EQ(j["positive_class"]["precision"].get<double>(), 1463.0 / 1467.0);
    EXPECT_TRUE(j["macro"].contains("f2"));
    EXPECT_TRUE(j["weighted"].contains("f1"));
    EXPECT_EQ(j["confusion_matrix"]["counts"][1][0], 37);
    const std::string t = to_table(r);
    EXPECT_NE(t.find("accuracy=0.9863"), std::string::npos);
    EXPECT_NE(t.find("0.9973"), std::string::npos);
}
