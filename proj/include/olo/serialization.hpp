#pragma once

#include <json.hpp>
#include <string>

#include "olo/convex_body.hpp"
#include "olo/regularizer.hpp"

namespace olo {

using Json = nlohmann::json;

Json body_to_json(const ConvexBody& body);
ConvexBody body_from_json(const Json& j);

Json regularizer_to_json(const PiecewiseRegularizer& g);
PiecewiseRegularizer regularizer_from_json(const Json& j);

// Wrap nlohmann parse failures into ParseError carrying the byte location.
Json parse_json_text(const std::string& text);
Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& a, const std::string& where);
// Symmetric matrices travel as the row-major upper triangle.
Json upper_triangle_to_json(const Matrix& m);
Matrix matrix_from_upper_triangle(const Json& a, const std::string& where);

}  // namespace olo
