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

#include "secretsift/classifier.hpp"
#include "secretsift/cli.hpp"
#include "secretsift/context_window.hpp"
#include "secretsift/datasets.hpp"
#include "secretsift/error.hpp"
#include "secretsift/metrics.hpp"
#include "secretsift/pattern_catalog.hpp"
#include "secretsift/prompting.hpp"
#include "secretsift/regex.hpp"
#include "secretsift/report.hpp"
#include "secretsift/scanner.hpp"
#include "secretsift/taxonomy.hpp"
#include "secretsift/utf8.hpp"
#include "secretsift/version.hpp"
