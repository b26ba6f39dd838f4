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

#include <array>

#include "fieldseg/raster.hpp"

namespace fieldseg {

using RingPoint = std::array<double, 2>;  // x, y
using Ring = std::vector<RingPoint>;      // closed: first == last

/// Signed shoelace area of a closed ring. Positive for exterior rings in
/// this library's orientation convention, negative for holes.
inline double ring_signed_area(const Ring& ring) {
    double a = 0.0;
    for (size_t i = 0; i + 1 < ring.size(); ++i)
        a += ring[i][0] * ring[i + 1][1] - ring[i + 1][0] * ring[i][1];
    return a / 2.0;
}

/// One vectorized field: a closed exterior ring plus optional hole rings.
struct FieldPolygon {
    int field_id = 0;
    Ring exterior;
    std::vector<Ring> holes;
    int64_t area_px = 0;
    double area_geo = 0.0;
};

/// Coordinate space the rings of a FieldSet live in.
enum class CoordSpace { pixel, geo };

/// A set of field polygons together with the raster frame they came from.
/// field_ids are unique and dense from 0.
struct FieldSet {
    std::vector<FieldPolygon> polygons;
    int width = 0;
    int height = 0;
    GeoTransform gt;
    CoordSpace space = CoordSpace::pixel;
};

}  // namespace fieldseg
