// Copyright 2026 The ponrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ponrng/bits_io.hpp"
#include "ponrng/bitvec.hpp"
#include "ponrng/channel_plan.hpp"
#include "ponrng/config.hpp"
#include "ponrng/extractor.hpp"
#include "ponrng/frame.hpp"
#include "ponrng/nist.hpp"
#include "ponrng/noise.hpp"
#include "ponrng/pipeline.hpp"
#include "ponrng/spectral.hpp"
#include "ponrng/trace.hpp"
#include "ponrng/trace_io.hpp"
