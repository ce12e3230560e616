// Copyright 2026 The HyperDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Convenience header for the whole library.

#ifndef HYPERDP_HYPERDP_H_
#define HYPERDP_HYPERDP_H_

#include "hyperdp/density.h"
#include "hyperdp/embeddings.h"
#include "hyperdp/geometry.h"
#include "hyperdp/mechanism.h"
#include "hyperdp/random.h"
#include "hyperdp/report.h"
#include "hyperdp/sampler.h"
#include "hyperdp/stats.h"

#endif  // HYPERDP_HYPERDP_H_
