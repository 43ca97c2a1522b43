#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tofskin/errors.hpp"
#include "tofskin/types.hpp"

namespace tofskin::detail {

using Json = nlohmann::ordered_json;

inline Json load_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot open ") + what + " file: " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid ") + what + " JSON (" + path.string() +
                      "): " + e.what());
  }
}

inline void save_json_file(const Json& j, const std::filesystem::path& path, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(std::string("cannot write ") + what + " file: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError(std::string("write failed: ") + path.string());
}

inline Vec3 vec3_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    throw FormatError(std::string(what) + " must be a 3-element number array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Mat3 mat3_rowmajor_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 9)
    throw FormatError(std::string(what) + " must be a 9-element row-major array");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const auto& e = j[3 * r + c];
      if (!e.is_number()) throw FormatError(std::string(what) + " must contain numbers");
      m(r, c) = e.get<double>();
    }
  return m;
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json rowmajor(const Mat3& m) {
  Json j = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j.push_back(m(r, c));
  return j;
}

// Snap a nearly orthonormal rotation, reject anything worse. Matrices already
// orthonormal to 1e-9 pass through verbatim so save/load round trips stay
// byte-identical.
inline Mat3 checked_rotation(const Mat3& m, const char* what, double tol = 1e-6) {
  if (is_special_orthogonal(m, 1e-9)) return m;
  const Mat3 q = orthonormalized(m);
  if ((q - m).cwiseAbs().maxCoeff() > tol)
    throw FormatError(std::string(what) + ": rotation is not orthonormal within tolerance");
  return q;
}

}  // namespace tofskin::detail
