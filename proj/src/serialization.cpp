#include "olo/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace olo {

namespace {

double number_from(const Json& j, const std::string& where) {
  if (!j.is_number())
    throw ParseError(where + ": expected a number");
  return j.get<double>();
}

double require_number(const Json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field " + key);
  return number_from(j.at(key), where + "/" + key);
}

int require_int(const Json& j, const std::string& key,
                const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw ParseError(where + ": missing integer field " + key);
  return j.at(key).get<int>();
}

std::string require_string(const Json& j, const std::string& key,
                           const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ParseError(where + ": missing string field " + key);
  return j.at(key).get<std::string>();
}

}  // namespace

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const Json& a, const std::string& where) {
  if (!a.is_array() || a.empty())
    throw ParseError(where + ": expected a nonempty array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] =
        number_from(a[i], where + "/" + std::to_string(i));
  return v;
}

Json upper_triangle_to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

Matrix matrix_from_upper_triangle(const Json& a, const std::string& where) {
  if (!a.is_array() || a.empty())
    throw ParseError(where + ": expected a nonempty array");
  // Solve d(d+1)/2 = len for d.
  const size_t len = a.size();
  int d = static_cast<int>(std::floor((std::sqrt(8.0 * len + 1.0) - 1) / 2));
  if (static_cast<size_t>(d) * (d + 1) / 2 != len)
    throw ParseError(where + ": length is not a triangle number");
  Matrix m(d, d);
  size_t k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double x = number_from(a[k], where + "/" + std::to_string(k));
      m(i, j) = x;
      m(j, i) = x;
      ++k;
    }
  return m;
}

Json body_to_json(const ConvexBody& body) {
  Json j;
  j["kind"] = body_kind_name(body.kind());
  switch (body.kind()) {
    case BodyKind::kEuclideanBall:
      j["dim"] = body.dim();
      j["radius"] = body.radius();
      break;
    case BodyKind::kLpBall:
      j["dim"] = body.dim();
      if (std::isinf(body.lp_exponent()))
        j["p"] = "inf";
      else
        j["p"] = body.lp_exponent();
      j["radius"] = body.radius();
      break;
    case BodyKind::kBox:
      j["halfwidths"] = vector_to_json(body.halfwidths());
      if (body.center().size() > 0 && body.center().cwiseAbs().maxCoeff() > 0)
        j["center"] = vector_to_json(body.center());
      break;
    case BodyKind::kEllipsoid:
      j["shape"] = upper_triangle_to_json(body.shape());
      break;
    case BodyKind::kPolytopeV: {
      Json vs = Json::array();
      for (const Vector& v : body.vertices()) vs.push_back(vector_to_json(v));
      j["vertices"] = vs;
      break;
    }
    case BodyKind::kPolytopeH: {
      Json rows = Json::array();
      for (Eigen::Index i = 0; i < body.normals().rows(); ++i)
        rows.push_back(vector_to_json(body.normals().row(i).transpose()));
      j["normals"] = rows;
      j["offsets"] = vector_to_json(body.offsets());
      break;
    }
    case BodyKind::kSimplex:
      j["dim"] = body.dim();
      break;
  }
  return j;
}

ConvexBody body_from_json(const Json& j) {
  const std::string where = "body";
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  const std::string kind = require_string(j, "kind", where);
  try {
    if (kind == "euclidean-ball")
      return ConvexBody::euclidean_ball(require_int(j, "dim", where),
                                        require_number(j, "radius", where));
    if (kind == "lp-ball") {
      double p;
      if (!j.contains("p")) throw ParseError(where + ": missing field p");
      if (j.at("p").is_string()) {
        if (j.at("p").get<std::string>() != "inf")
          throw ParseError(where + "/p: expected a number or \"inf\"");
        p = std::numeric_limits<double>::infinity();
      } else {
        p = number_from(j.at("p"), where + "/p");
      }
      return ConvexBody::lp_ball(require_int(j, "dim", where), p,
                                 require_number(j, "radius", where));
    }
    if (kind == "box") {
      if (!j.contains("halfwidths"))
        throw ParseError(where + ": missing field halfwidths");
      Vector hw = vector_from_json(j.at("halfwidths"), where + "/halfwidths");
      Vector c;
      if (j.contains("center"))
        c = vector_from_json(j.at("center"), where + "/center");
      return ConvexBody::box(hw, c);
    }
    if (kind == "ellipsoid") {
      if (!j.contains("shape"))
        throw ParseError(where + ": missing field shape");
      return ConvexBody::ellipsoid(
          matrix_from_upper_triangle(j.at("shape"), where + "/shape"));
    }
    if (kind == "polytope-v") {
      if (!j.contains("vertices") || !j.at("vertices").is_array())
        throw ParseError(where + ": missing array field vertices");
      std::vector<Vector> vs;
      for (size_t i = 0; i < j.at("vertices").size(); ++i)
        vs.push_back(vector_from_json(
            j.at("vertices")[i], where + "/vertices/" + std::to_string(i)));
      return ConvexBody::polytope_v(std::move(vs));
    }
    if (kind == "polytope-h") {
      if (!j.contains("normals") || !j.at("normals").is_array() ||
          j.at("normals").empty())
        throw ParseError(where + ": missing array field normals");
      if (!j.contains("offsets"))
        throw ParseError(where + ": missing field offsets");
      const Json& rows = j.at("normals");
      Vector first =
          vector_from_json(rows[0], where + "/normals/0");
      Matrix a(static_cast<Eigen::Index>(rows.size()), first.size());
      a.row(0) = first.transpose();
      for (size_t i = 1; i < rows.size(); ++i)
        a.row(static_cast<Eigen::Index>(i)) =
            vector_from_json(rows[i], where + "/normals/" + std::to_string(i))
                .transpose();
      return ConvexBody::polytope_h(
          a, vector_from_json(j.at("offsets"), where + "/offsets"));
    }
    if (kind == "simplex")
      return ConvexBody::simplex(require_int(j, "dim", where));
  } catch (const ValidationError& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + "/kind: unknown kind \"" + kind + "\"");
}

Json regularizer_to_json(const PiecewiseRegularizer& g) {
  Json j;
  j["dim"] = g.dim();
  j["cubic_L"] = g.cubic_L();
  j["alpha"] = g.alpha();
  j["loss_body"] = body_to_json(g.loss_body());
  Json ps = Json::array();
  for (const auto& p : g.pieces()) {
    Json jp;
    jp["center"] = vector_to_json(p.center);
    jp["r"] = p.r;
    jp["v"] = vector_to_json(p.v);
    jp["sigma"] = upper_triangle_to_json(p.sigma);
    ps.push_back(jp);
  }
  j["pieces"] = ps;
  j["provenance"] = g.provenance();
  return j;
}

PiecewiseRegularizer regularizer_from_json(const Json& j) {
  const std::string where = "regularizer";
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  const int dim = require_int(j, "dim", where);
  const double cubic_L = require_number(j, "cubic_L", where);
  const double alpha = require_number(j, "alpha", where);
  if (!j.contains("loss_body"))
    throw ParseError(where + ": missing field loss_body");
  ConvexBody loss = body_from_json(j.at("loss_body"));
  if (!j.contains("pieces") || !j.at("pieces").is_array() ||
      j.at("pieces").empty())
    throw ParseError(where + ": pieces must be a nonempty array");
  std::vector<QuasiQuadraticPiece> pieces;
  try {
    for (size_t i = 0; i < j.at("pieces").size(); ++i) {
      const Json& jp = j.at("pieces")[i];
      const std::string pw = where + "/pieces/" + std::to_string(i);
      if (!jp.is_object()) throw ParseError(pw + ": expected an object");
      if (!jp.contains("center") || !jp.contains("v") || !jp.contains("sigma"))
        throw ParseError(pw + ": missing center/v/sigma");
      Vector center = vector_from_json(jp.at("center"), pw + "/center");
      if (center.size() != dim)
        throw ParseError(pw + "/center: wrong dimension");
      pieces.emplace_back(
          std::move(center), require_number(jp, "r", pw),
          vector_from_json(jp.at("v"), pw + "/v"),
          matrix_from_upper_triangle(jp.at("sigma"), pw + "/sigma"), cubic_L);
    }
    return PiecewiseRegularizer(std::move(pieces), alpha, std::move(loss),
                                j.contains("provenance")
                                    ? require_string(j, "provenance", where)
                                    : std::string());
  } catch (const ValidationError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("json parse error: ") + e.what());
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw ParseError("write failed for " + path);
}

}  // namespace olo
