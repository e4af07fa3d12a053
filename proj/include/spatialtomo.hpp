// Copyright 2026 The spatialtomo Authors
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

#include "spatialtomo/basis.hpp"
#include "spatialtomo/errors.hpp"
#include "spatialtomo/geometry.hpp"
#include "spatialtomo/linalg.hpp"
#include "spatialtomo/measurement.hpp"
#include "spatialtomo/mle.hpp"
#include "spatialtomo/propagation.hpp"
#include "spatialtomo/quadrature.hpp"
#include "spatialtomo/states.hpp"
#include "spatialtomo/tomography.hpp"
