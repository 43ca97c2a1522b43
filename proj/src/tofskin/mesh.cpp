#include "tofskin/mesh.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "tofskin/errors.hpp"
#include "tofskin/version.hpp"

namespace tofskin {

namespace {

struct Vec3fKey {
  float x, y, z;
  bool operator==(const Vec3fKey&) const = default;
};

struct Vec3fKeyHash {
  std::size_t operator()(const Vec3fKey& k) const {
    std::uint32_t a, b, c;
    std::memcpy(&a, &k.x, 4);
    std::memcpy(&b, &k.y, 4);
    std::memcpy(&c, &k.z, 4);
    std::uint64_t h = a;
    h = h * 0x100000001b3ULL ^ b;
    h = h * 0x100000001b3ULL ^ c;
    return static_cast<std::size_t>(h);
  }
};

int resolve_obj_index(long idx, std::size_t count, const std::string& line) {
  long r = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
  if (r < 0 || r >= static_cast<long>(count))
    throw FormatError("OBJ face index out of range: " + line);
  return static_cast<int>(r);
}

TriMesh load_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() >= 2 && line[0] == 'v' && std::isspace(static_cast<unsigned char>(line[1]))) {
      std::istringstream ls(line.substr(1));
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw FormatError("malformed OBJ vertex: " + line);
      mesh.vertices.push_back(v);
    } else if (line.size() >= 2 && line[0] == 'f' && std::isspace(static_cast<unsigned char>(line[1]))) {
      std::istringstream ls(line.substr(1));
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        // forms: i, i/t, i//n, i/t/n
        long idx = 0;
        auto end = tok.find('/');
        auto sv = tok.substr(0, end);
        auto res = std::from_chars(sv.data(), sv.data() + sv.size(), idx);
        if (res.ec != std::errc() || idx == 0)
          throw FormatError("malformed OBJ face token: " + tok);
        poly.push_back(resolve_obj_index(idx, mesh.vertices.size(), line));
      }
      if (poly.size() < 3) throw FormatError("OBJ face with fewer than 3 vertices");
      for (std::size_t i = 1; i + 1 < poly.size(); ++i)
        mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
    }
  }
  return mesh;
}

TriMesh load_binary_stl(std::istream& in, std::uintmax_t file_size) {
  std::array<char, 80> header{};
  in.read(header.data(), 80);
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) throw FormatError("truncated STL header");
  if (file_size != 84ull + 50ull * count)
    throw FormatError("STL size does not match triangle count; not a binary STL");

  const bool millimeters =
      std::string_view(header.data(), 80).find("units=mm") != std::string_view::npos;
  const double scale = millimeters ? 1e-3 : 1.0;

  TriMesh mesh;
  std::unordered_map<Vec3fKey, int, Vec3fKeyHash> weld;
  mesh.triangles.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    float rec[12];
    in.read(reinterpret_cast<char*>(rec), 48);
    std::uint16_t attr = 0;
    in.read(reinterpret_cast<char*>(&attr), 2);
    if (!in) throw FormatError("truncated STL record");
    Eigen::Vector3i tri;
    for (int i = 0; i < 3; ++i) {
      Vec3fKey key{rec[3 + 3 * i], rec[4 + 3 * i], rec[5 + 3 * i]};
      auto [it, inserted] = weld.emplace(key, static_cast<int>(mesh.vertices.size()));
      if (inserted)
        mesh.vertices.push_back(scale * Vec3(key.x, key.y, key.z));
      tri[i] = it->second;
    }
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

}  // namespace

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

std::size_t drop_degenerate_triangles(TriMesh& mesh, double min_area) {
  const std::size_t before = mesh.triangles.size();
  std::erase_if(mesh.triangles, [&](const Eigen::Vector3i& t) {
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return true;
    return triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) < min_area;
  });
  return before - mesh.triangles.size();
}

void compute_normals(TriMesh& mesh) {
  mesh.face_normals.assign(mesh.triangles.size(), Vec3::Zero());
  mesh.vertex_normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                       .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    for (int i = 0; i < 3; ++i) mesh.vertex_normals[t[i]] += n;  // |n| = 2*area
    mesh.face_normals[f] = n.normalized();
  }
  for (auto& n : mesh.vertex_normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
}

TriMesh load_mesh(const std::filesystem::path& path, LoadReport* report) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot read mesh file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh file: " + path.string());

  TriMesh mesh;
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") {
    mesh = load_obj(in);
  } else if (ext == ".stl") {
    mesh = load_binary_stl(in, size);
  } else {
    throw FormatError("unsupported mesh format: " + path.string() +
                      " (expected .obj or binary .stl)");
  }

  const std::size_t dropped = drop_degenerate_triangles(mesh);
  if (report) report->degenerate_dropped = dropped;
  if (mesh.triangles.empty()) throw FormatError("empty mesh: " + path.string());
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i)
      if (t[i] < 0 || t[i] >= static_cast<int>(mesh.vertices.size()))
        throw FormatError("triangle index out of range");
  compute_normals(mesh);
  return mesh;
}

void save_stl(const TriMesh& mesh, const std::filesystem::path& path,
              const std::string& header_note) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write STL file: " + path.string());
  std::array<char, 80> header{};
  std::string text = std::string(kToolName) + " " + kVersion + " units=mm";
  if (!header_note.empty()) text += " " + header_note;
  std::memcpy(header.data(), text.data(), std::min<std::size_t>(text.size(), 80));
  out.write(header.data(), 80);
  const std::uint32_t count = static_cast<std::uint32_t>(mesh.triangles.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    const Vec3 n = mesh.face_normals.size() == mesh.triangles.size()
                       ? mesh.face_normals[f]
                       : (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                             .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                             .normalized();
    float rec[12] = {static_cast<float>(n.x()), static_cast<float>(n.y()),
                     static_cast<float>(n.z())};
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = mesh.vertices[t[i]] * 1000.0;  // meters -> millimeters
      rec[3 + 3 * i] = static_cast<float>(v.x());
      rec[4 + 3 * i] = static_cast<float>(v.y());
      rec[5 + 3 * i] = static_cast<float>(v.z());
    }
    out.write(reinterpret_cast<const char*>(rec), 48);
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_ply(const TriMesh& mesh, const std::filesystem::path& path,
              const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PLY file: " + path.string());
  out << "ply\nformat ascii 1.0\n";
  out << "comment " << kToolName << " " << kVersion << " units=m\n";
  for (const auto& c : comments) out << "comment " << c << "\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  char buf[96];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles)
    area += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  return area;
}

double signed_volume(const TriMesh& mesh) {
  double vol = 0.0;
  for (const auto& t : mesh.triangles)
    vol += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  return vol / 6.0;
}

namespace {
using EdgeKey = std::pair<int, int>;
std::map<EdgeKey, std::array<int, 2>> edge_use_counts(const TriMesh& mesh) {
  // value = {count, directed balance}
  std::map<EdgeKey, std::array<int, 2>> edges;
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      auto& e = edges[{std::min(a, b), std::max(a, b)}];
      e[0] += 1;
      e[1] += a < b ? 1 : -1;
    }
  }
  return edges;
}
}  // namespace

bool is_watertight(const TriMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  for (const auto& [k, e] : edge_use_counts(mesh))
    if (e[0] != 2) return false;
  return true;
}

bool has_consistent_winding(const TriMesh& mesh) {
  for (const auto& [k, e] : edge_use_counts(mesh))
    if (e[0] == 2 && e[1] != 0) return false;
  return true;
}

Eigen::AlignedBox3d bounding_box(const TriMesh& mesh) {
  Eigen::AlignedBox3d box;
  for (const auto& v : mesh.vertices) box.extend(v);
  return box;
}

double mean_edge_length(const TriMesh& mesh) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : mesh.triangles) {
    sum += (mesh.vertices[t[0]] - mesh.vertices[t[1]]).norm() +
           (mesh.vertices[t[1]] - mesh.vertices[t[2]]).norm() +
           (mesh.vertices[t[2]] - mesh.vertices[t[0]]).norm();
    n += 3;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace tofskin
