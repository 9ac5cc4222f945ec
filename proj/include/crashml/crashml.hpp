/*
 * Copyright 2026 The crashml Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Convenience umbrella: the whole library in one include.

#pragma once

#include "crashml/baselines.hpp"
#include "crashml/core.hpp"
#include "crashml/csv.hpp"
#include "crashml/encode.hpp"
#include "crashml/explain.hpp"
#include "crashml/gbdt.hpp"
#include "crashml/gridsearch.hpp"
#include "crashml/histogram.hpp"
#include "crashml/kfold.hpp"
#include "crashml/metrics.hpp"
#include "crashml/pipeline.hpp"
#include "crashml/rfecv.hpp"
#include "crashml/schema.hpp"
#include "crashml/shap.hpp"
#include "crashml/smote.hpp"
#include "crashml/svg.hpp"
#include "crashml/synth.hpp"
#include "crashml/table.hpp"
