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

#include "fieldseg/fields.hpp"

namespace fieldseg {

namespace geojsondetail {

inline void check_ring(const Ring& ring) {
    if (ring.size() < 4) throw Error("write_geojson: ring has fewer than 4 points");
    if (ring.front() != ring.back()) throw Error("write_geojson: unclosed ring");
}

inline nlohmann::json ring_to_json(const Ring& ring, const GeoTransform& gt, CoordSpace space) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& p : ring) {
        double x = p[0], y = p[1];
        if (space == CoordSpace::pixel) std::tie(x, y) = gt.geo(x, y);
        coords.push_back({x, y});
    }
    return coords;
}

}  // namespace geojsondetail

/// Serializes a FieldSet as an RFC 7946 FeatureCollection. Pixel-space rings
/// are mapped through the geotransform; an identity transform emits pixel
/// units directly. Each feature carries {field_id, area_px, area_geo}.
inline nlohmann::json fieldset_to_geojson(const FieldSet& fields) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& poly : fields.polygons) {
        geojsondetail::check_ring(poly.exterior);
        nlohmann::json rings = nlohmann::json::array();
        rings.push_back(geojsondetail::ring_to_json(poly.exterior, fields.gt, fields.space));
        for (const auto& hole : poly.holes) {
            geojsondetail::check_ring(hole);
            rings.push_back(geojsondetail::ring_to_json(hole, fields.gt, fields.space));
        }
        nlohmann::json feat;
        feat["type"] = "Feature";
        feat["geometry"] = {{"type", "Polygon"}, {"coordinates", rings}};
        feat["properties"] = {{"field_id", poly.field_id},
                              {"area_px", poly.area_px},
                              {"area_geo", poly.area_geo}};
        features.push_back(std::move(feat));
    }
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = std::move(features);
    return fc;
}

inline void write_geojson(const FieldSet& fields, const std::string& path) {
    std::string text = fieldset_to_geojson(fields).dump(2);
    text.push_back('\n');
    detail::write_file_bytes(path, text.data(), text.size());
}

/// Parses a GeoJSON FeatureCollection of Polygon features back into a
/// FieldSet. Ring coordinates are kept as stored (geo space); features
/// missing a field_id get their position index.
inline FieldSet read_geojson(const std::string& path) {
    auto bytes = detail::read_file_bytes(path);
    nlohmann::json doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    if (doc.value("type", "") != "FeatureCollection")
        throw Error("read_geojson: expected a FeatureCollection: " + path);

    FieldSet fs;
    fs.space = CoordSpace::geo;
    int next_id = 0;
    for (const auto& feat : doc.at("features")) {
        const auto& geom = feat.at("geometry");
        std::string type = geom.value("type", "");
        if (type != "Polygon")
            throw Error("read_geojson: unsupported geometry type '" + type + "'");
        FieldPolygon poly;
        poly.field_id = next_id;
        if (feat.contains("properties") && feat["properties"].is_object()) {
            const auto& props = feat["properties"];
            if (props.contains("field_id") && props["field_id"].is_number())
                poly.field_id = props["field_id"].get<int>();
            if (props.contains("area_px") && props["area_px"].is_number())
                poly.area_px = props["area_px"].get<int64_t>();
            if (props.contains("area_geo") && props["area_geo"].is_number())
                poly.area_geo = props["area_geo"].get<double>();
        }
        bool first = true;
        for (const auto& ring_json : geom.at("coordinates")) {
            Ring ring;
            for (const auto& pt : ring_json)
                ring.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
            if (ring.size() < 4 || ring.front() != ring.back())
                throw Error("read_geojson: invalid ring in " + path);
            if (first)
                poly.exterior = std::move(ring);
            else
                poly.holes.push_back(std::move(ring));
            first = false;
        }
        if (poly.exterior.empty()) throw Error("read_geojson: polygon without rings");
        fs.polygons.push_back(std::move(poly));
        ++next_id;
    }
    return fs;
}

}  // namespace fieldseg
