// Copyright (c) 2026 the fieldseg authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "fieldseg/boundary.hpp"
#include "fieldseg/canny.hpp"
#include "fieldseg/eval.hpp"
#include "fieldseg/fields.hpp"
#include "fieldseg/geojson.hpp"
#include "fieldseg/geotiff.hpp"
#include "fieldseg/pipeline.hpp"
#include "fieldseg/preprocess.hpp"
#include "fieldseg/raster.hpp"
#include "fieldseg/render.hpp"
#include "fieldseg/snic.hpp"
#include "fieldseg/synthgen.hpp"
