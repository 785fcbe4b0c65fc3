#include "dmgplan/surface.hpp"
#include "dmgplan/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace dmgplan {

// ---------------------------------------------------------------------------
// SpatialGrid

SpatialGrid::SpatialGrid(const std::vector<Vec3>& points, double cell_size)
    : points_(&points), cell_(cell_size > 0 ? cell_size : 1.0) {
  if (points.empty()) return;
  origin_ = points.front();
  for (const Vec3& p : points) origin_ = origin_.cwiseMin(p);
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    int ix, iy, iz;
    cell_of(points[i], ix, iy, iz);
    cells_[key(ix, iy, iz)].push_back(i);
  }
}

std::uint64_t SpatialGrid::key(int ix, int iy, int iz) const {
  auto u = [](int v) { return static_cast<std::uint64_t>(static_cast<std::uint32_t>(v + (1 << 20))); };
  return (u(ix) << 42) | (u(iy) << 21) | u(iz);
}

void SpatialGrid::cell_of(const Vec3& p, int& ix, int& iy, int& iz) const {
  ix = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
  iy = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
  iz = static_cast<int>(std::floor((p.z() - origin_.z()) / cell_));
}

std::vector<std::uint32_t> SpatialGrid::radius_query(const Vec3& p,
                                                     double radius) const {
  std::vector<std::uint32_t> out;
  if (!points_ || radius < 0) return out;
  int cx, cy, cz;
  cell_of(p, cx, cy, cz);
  const int reach = static_cast<int>(std::ceil(radius / cell_));
  const double r2 = radius * radius;
  for (int ix = cx - reach; ix <= cx + reach; ++ix)
    for (int iy = cy - reach; iy <= cy + reach; ++iy)
      for (int iz = cz - reach; iz <= cz + reach; ++iz) {
        auto it = cells_.find(key(ix, iy, iz));
        if (it == cells_.end()) continue;
        for (std::uint32_t idx : it->second) {
          if (((*points_)[idx] - p).squaredNorm() <= r2) out.push_back(idx);
        }
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> SpatialGrid::knn(
    const Vec3& p, std::size_t k, std::optional<std::uint32_t> exclude) const {
  std::vector<std::uint32_t> best;
  if (!points_ || k == 0) return best;
  const std::size_t available = points_->size() - (exclude ? 1 : 0);
  int cx, cy, cz;
  cell_of(p, cx, cy, cz);
  std::vector<std::pair<double, std::uint32_t>> cand;
  // Grow shells of cells outward. Any point in a shell beyond `reach` lies
  // at distance of at least reach*cell from p, so once the k-th best found
  // so far is within that bound the result is exact.
  for (int reach = 0;; ++reach) {
    for (int ix = cx - reach; ix <= cx + reach; ++ix)
      for (int iy = cy - reach; iy <= cy + reach; ++iy)
        for (int iz = cz - reach; iz <= cz + reach; ++iz) {
          if (std::max({std::abs(ix - cx), std::abs(iy - cy), std::abs(iz - cz)}) != reach)
            continue;  // only the new shell
          auto it = cells_.find(key(ix, iy, iz));
          if (it == cells_.end()) continue;
          for (std::uint32_t idx : it->second) {
            if (exclude && idx == *exclude) continue;
            cand.emplace_back(((*points_)[idx] - p).squaredNorm(), idx);
          }
        }
    if (cand.size() >= std::min(k, available)) {
      std::sort(cand.begin(), cand.end());
      const double safe = static_cast<double>(reach) * cell_;
      if (cand.size() >= available) break;
      if (cand.size() >= k && cand[k - 1].first <= safe * safe) break;
    }
    if (reach > 1 << 12) break;  // unreachable for sane grids
  }
  std::sort(cand.begin(), cand.end());
  best.reserve(std::min(k, cand.size()));
  for (std::size_t i = 0; i < cand.size() && best.size() < k; ++i)
    best.push_back(cand[i].second);
  return best;
}

std::uint32_t SpatialGrid::nearest(const Vec3& p) const {
  auto v = knn(p, 1);
  return v.empty() ? 0 : v[0];
}

// ---------------------------------------------------------------------------
// OrientedSurface

OrientedSurface OrientedSurface::create(std::vector<Vec3> points,
                                        std::vector<Vec3> normals) {
  if (points.size() < 4) {
    throw Error(Errc::TooFewPoints,
                "need at least 4 points, got " + std::to_string(points.size()));
  }
  if (points.size() != normals.size()) {
    throw Error(Errc::InvalidArgument, "points and normals differ in length");
  }

  Aabb box;
  for (const Vec3& p : points) box.expand(p);
  // Degenerate when the points span at most a line.
  Vec3 ext = box.extent();
  std::array<double, 3> e{ext.x(), ext.y(), ext.z()};
  std::sort(e.begin(), e.end());
  if (e[1] <= 1e-12) {
    throw Error(Errc::DegenerateGeometry, "points are collinear or coincident");
  }

  for (Vec3& n : normals) {
    const double len = n.norm();
    if (len < 1e-9) {
      throw Error(Errc::DegenerateGeometry, "zero-length normal");
    }
    n /= len;
  }

  OrientedSurface s;
  s.points_ = std::move(points);
  s.normals_ = std::move(normals);
  s.bbox_ = box;
  const std::size_t n = s.points_.size();
  s.xs_.resize(n);
  s.ys_.resize(n);
  s.zs_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.xs_[i] = s.points_[i].x();
    s.ys_[i] = s.points_[i].y();
    s.zs_[i] = s.points_[i].z();
  }
  // Cell size targeting a handful of points per cell.
  const double vol_guess = std::max(box.diameter(), 1e-6);
  const double cell = std::max(vol_guess / std::cbrt(static_cast<double>(n)) , 1e-9) * 1.5;
  s.grid_ = SpatialGrid(s.points_, cell);
  return s;
}

// ---------------------------------------------------------------------------
// Normal estimation

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, int k) {
  const std::size_t n = points.size();
  std::vector<Vec3> normals(n);
  Aabb box;
  for (const Vec3& p : points) box.expand(p);
  const double cell = std::max(box.diameter() / std::cbrt(static_cast<double>(n)), 1e-9) * 1.5;
  SpatialGrid grid(points, cell);

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(n);

  const std::size_t kk = std::max<std::size_t>(3, static_cast<std::size_t>(k));
  std::vector<std::vector<std::uint32_t>> neighbor_lists(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto nb = grid.knn(points[i], kk, i);
    Vec3 mean = points[i];
    for (auto j : nb) mean += points[j];
    mean /= static_cast<double>(nb.size() + 1);
    Mat3 cov = Mat3::Zero();
    {
      Vec3 d = points[i] - mean;
      cov += d * d.transpose();
    }
    for (auto j : nb) {
      Vec3 d = points[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 nrm = eig.eigenvectors().col(0);  // smallest eigenvalue
    // Initial orientation: away from the whole-cloud centroid.
    if (nrm.dot(points[i] - centroid) < 0) nrm = -nrm;
    normals[i] = nrm.normalized();
    neighbor_lists[i] = std::move(nb);
  }

  // Consistency propagation over the k-NN graph for non-star-shaped clouds:
  // breadth-first from the point farthest from the centroid (most reliable
  // outward guess), flipping to agree with the visiting neighbor.
  std::uint32_t seed = 0;
  double best = -1;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double d = (points[i] - centroid).squaredNorm();
    if (d > best) {
      best = d;
      seed = i;
    }
  }
  std::vector<char> visited(n, 0);
  std::deque<std::uint32_t> queue{seed};
  visited[seed] = 1;
  while (!queue.empty()) {
    const std::uint32_t i = queue.front();
    queue.pop_front();
    for (std::uint32_t j : neighbor_lists[i]) {
      if (visited[j]) continue;
      visited[j] = 1;
      if (normals[j].dot(normals[i]) < 0) normals[j] = -normals[j];
      queue.push_back(j);
    }
  }
  // Unvisited islands keep their centroid-based orientation.

  double outward = 0;
  for (std::uint32_t i = 0; i < n; ++i) outward += normals[i].dot(points[i] - centroid);
  if (outward < 0) {
    for (Vec3& nv : normals) nv = -nv;
  }
  return normals;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct ParsedCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty when the file has none
};

ParsedCloud parse_xyz(std::istream& in) {
  ParsedCloud out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) continue;
    double nx, ny, nz;
    if (ls >> nx >> ny >> nz) {
      out.normals.emplace_back(nx, ny, nz);
    }
    out.points.emplace_back(x, y, z);
  }
  if (out.normals.size() != out.points.size()) out.normals.clear();
  return out;
}

ParsedCloud parse_obj(std::istream& in) {
  ParsedCloud out;
  std::vector<Vec3> vn;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (ls >> x >> y >> z) out.points.emplace_back(x, y, z);
    } else if (tag == "vn") {
      double x, y, z;
      if (ls >> x >> y >> z) vn.emplace_back(x, y, z);
    }
    // faces and everything else ignored; vertices are used as a cloud
  }
  if (vn.size() == out.points.size()) out.normals = std::move(vn);
  return out;
}

ParsedCloud parse_ply(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || lower(line).substr(0, 3) != "ply") {
    throw Error(Errc::UnreadableFile, path.string() + ": missing ply magic");
  }
  bool binary = false;
  std::size_t vertex_count = 0;
  struct Prop { std::string name; std::string type; };
  std::vector<Prop> props;
  bool in_vertex_element = false;
  std::size_t trailing_elements = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt != "ascii")
        throw Error(Errc::UnreadableFile, path.string() + ": unsupported ply format " + fmt);
    } else if (tag == "element") {
      std::string name;
      std::size_t count;
      ls >> name >> count;
      if (name == "vertex") {
        vertex_count = count;
        in_vertex_element = true;
      } else {
        in_vertex_element = false;
        if (vertex_count > 0) trailing_elements += count;
      }
    } else if (tag == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type;
      if (type == "list") {
        throw Error(Errc::UnreadableFile, path.string() + ": list property on vertex");
      }
      ls >> name;
      props.push_back({lower(name), lower(type)});
    } else if (tag == "end_header") {
      break;
    }
  }
  (void)trailing_elements;
  if (vertex_count == 0) {
    throw Error(Errc::TooFewPoints, path.string() + ": no vertices");
  }

  int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
  for (int i = 0; i < static_cast<int>(props.size()); ++i) {
    const std::string& nm = props[i].name;
    if (nm == "x") ix = i;
    else if (nm == "y") iy = i;
    else if (nm == "z") iz = i;
    else if (nm == "nx") inx = i;
    else if (nm == "ny") iny = i;
    else if (nm == "nz") inz = i;
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw Error(Errc::UnreadableFile, path.string() + ": ply lacks x/y/z");
  }
  const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;

  ParsedCloud out;
  out.points.reserve(vertex_count);

  auto type_size = [&](const std::string& t) -> std::size_t {
    if (t == "float" || t == "float32" || t == "int" || t == "int32" || t == "uint" || t == "uint32") return 4;
    if (t == "double" || t == "float64") return 8;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    throw Error(Errc::UnreadableFile, path.string() + ": unsupported ply type " + t);
  };

  if (binary) {
    std::size_t stride = 0;
    std::vector<std::size_t> offsets(props.size());
    for (std::size_t i = 0; i < props.size(); ++i) {
      offsets[i] = stride;
      stride += type_size(props[i].type);
    }
    std::vector<char> row(stride);
    auto read_val = [&](int prop_idx) -> double {
      const char* base = row.data() + offsets[prop_idx];
      const std::string& t = props[prop_idx].type;
      if (t == "float" || t == "float32") {
        float f;
        std::memcpy(&f, base, 4);
        return f;
      }
      if (t == "double" || t == "float64") {
        double d;
        std::memcpy(&d, base, 8);
        return d;
      }
      throw Error(Errc::UnreadableFile, path.string() + ": non-float coordinate");
    };
    for (std::size_t v = 0; v < vertex_count; ++v) {
      in.read(row.data(), static_cast<std::streamsize>(stride));
      if (!in) throw Error(Errc::UnreadableFile, path.string() + ": truncated ply body");
      out.points.emplace_back(read_val(ix), read_val(iy), read_val(iz));
      if (has_normals) out.normals.emplace_back(read_val(inx), read_val(iny), read_val(inz));
    }
  } else {
    for (std::size_t v = 0; v < vertex_count; ++v) {
      if (!std::getline(in, line)) {
        throw Error(Errc::UnreadableFile, path.string() + ": truncated ply body");
      }
      std::istringstream ls(line);
      std::vector<double> vals(props.size());
      for (double& d : vals) {
        if (!(ls >> d)) throw Error(Errc::UnreadableFile, path.string() + ": bad vertex line");
      }
      out.points.emplace_back(vals[ix], vals[iy], vals[iz]);
      if (has_normals) out.normals.emplace_back(vals[inx], vals[iny], vals[inz]);
    }
  }
  return out;
}

}  // namespace

OrientedSurface load_surface(const std::filesystem::path& path, int normal_k,
                             double input_scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::UnreadableFile, path.string());
  }
  ParsedCloud cloud;
  const std::string ext = lower(path.extension().string());
  if (ext == ".ply") {
    cloud = parse_ply(in, path);
  } else if (ext == ".obj") {
    cloud = parse_obj(in);
  } else {
    cloud = parse_xyz(in);
  }
  if (cloud.points.size() < 4) {
    throw Error(Errc::TooFewPoints, path.string() + ": " +
                                        std::to_string(cloud.points.size()) + " points");
  }
  if (input_scale != 1.0) {
    for (Vec3& p : cloud.points) p *= input_scale;
  }
  if (cloud.normals.empty()) {
    cloud.normals = estimate_normals(cloud.points, normal_k);
  }
  return OrientedSurface::create(std::move(cloud.points), std::move(cloud.normals));
}

// ---------------------------------------------------------------------------
// Segmentation

std::vector<std::vector<std::uint32_t>> SurfacePatchGraph::adjacency_lists() const {
  std::vector<std::vector<std::uint32_t>> lists(patches.size());
  for (auto [a, b] : adjacency) {
    lists[a].push_back(b);
    lists[b].push_back(a);
  }
  for (auto& l : lists) std::sort(l.begin(), l.end());
  return lists;
}

SurfacePatchGraph segment(const OrientedSurface& surface,
                          const SegmentationParams& params) {
  const double res = params.resolution;
  if (!(res > 0.0)) {
    throw Error(Errc::InvalidArgument, "resolution must be positive");
  }
  if (params.connectivity != 6 && params.connectivity != 18 && params.connectivity != 26) {
    throw Error(Errc::InvalidArgument, "connectivity must be 6, 18 or 26");
  }

  const std::size_t n = surface.size();
  const Vec3 anchor = surface.bbox().min;

  auto voxel_of = [&](const Vec3& p) {
    return std::array<int, 3>{
        static_cast<int>(std::floor((p.x() - anchor.x()) / res)),
        static_cast<int>(std::floor((p.y() - anchor.y()) / res)),
        static_cast<int>(std::floor((p.z() - anchor.z()) / res))};
  };

  // Voxel-grid seeding: members of each occupied voxel are clustered by
  // normal (chord cap below, so sharp creases split inside a voxel) and each
  // cluster contributes one seed, the member nearest the voxel center
  // (lowest index on ties).
  constexpr double kSeedNormalChord = 0.5;  // ~29 degrees
  std::map<std::array<int, 3>, std::vector<std::uint32_t>> voxels;
  for (std::uint32_t i = 0; i < n; ++i) voxels[voxel_of(surface.point(i))].push_back(i);

  struct Seed {
    std::array<int, 3> voxel;
    std::uint32_t point;
  };
  std::vector<Seed> seeds;
  seeds.reserve(voxels.size());
  std::map<std::array<int, 3>, std::vector<std::uint32_t>> seeds_of_voxel;
  for (const auto& [vox, members] : voxels) {
    const Vec3 center = anchor + res * Vec3(vox[0] + 0.5, vox[1] + 0.5, vox[2] + 0.5);
    std::vector<std::uint32_t> reps;
    std::vector<std::vector<std::uint32_t>> clusters;
    for (std::uint32_t idx : members) {
      bool placed = false;
      for (std::size_t c = 0; c < reps.size() && !placed; ++c) {
        if ((surface.normal(idx) - surface.normal(reps[c])).norm() <=
            kSeedNormalChord) {
          clusters[c].push_back(idx);
          placed = true;
        }
      }
      if (!placed) {
        reps.push_back(idx);
        clusters.push_back({idx});
      }
    }
    for (const auto& cluster : clusters) {
      std::uint32_t best = cluster.front();
      double best_d = (surface.point(best) - center).squaredNorm();
      for (std::uint32_t idx : cluster) {
        const double d = (surface.point(idx) - center).squaredNorm();
        if (d < best_d - 1e-18 || (std::abs(d - best_d) <= 1e-18 && idx < best)) {
          best = idx;
          best_d = d;
        }
      }
      seeds_of_voxel[vox].push_back(static_cast<std::uint32_t>(seeds.size()));
      seeds.push_back({vox, best});
    }
  }

  // Region growing: each point joins the nearest seed among the 3^3
  // neighborhood of its voxel, by weighted position+normal distance, and
  // never crosses a crease sharper than the seeding chord. The rare point
  // with no seed inside the cap falls back to the unconstrained nearest.
  std::vector<std::uint32_t> label(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto vox = voxel_of(surface.point(i));
    std::uint32_t best_seed = 0;
    double best_d = std::numeric_limits<double>::max();
    bool found = false;
    for (int pass = 0; pass < 2 && !found; ++pass) {
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            auto it = seeds_of_voxel.find({vox[0] + dx, vox[1] + dy, vox[2] + dz});
            if (it == seeds_of_voxel.end()) continue;
            for (std::uint32_t si : it->second) {
              const Seed& s = seeds[si];
              const double nrm =
                  (surface.normal(i) - surface.normal(s.point)).squaredNorm();
              if (pass == 0 && nrm > kSeedNormalChord * kSeedNormalChord) continue;
              const double spatial =
                  (surface.point(i) - surface.point(s.point)).squaredNorm() /
                  (res * res);
              const double d = spatial + params.normal_weight * nrm;
              if (!found || d < best_d - 1e-15 ||
                  (std::abs(d - best_d) <= 1e-15 && si < best_seed)) {
                best_seed = si;
                best_d = d;
                found = true;
              }
            }
          }
    }
    label[i] = best_seed;
  }

  // Patches (seeds that attracted no point cannot occur: a seed is its own
  // nearest at distance zero).
  SurfacePatchGraph graph;
  graph.resolution = res;
  std::vector<std::vector<std::uint32_t>> members(seeds.size());
  for (std::uint32_t i = 0; i < n; ++i) members[label[i]].push_back(i);

  std::vector<std::int32_t> patch_of_seed(seeds.size(), -1);
  for (std::uint32_t s = 0; s < seeds.size(); ++s) {
    if (members[s].empty()) continue;
    SurfacePatch patch;
    Vec3 mean = Vec3::Zero();
    Vec3 nsum = Vec3::Zero();
    for (std::uint32_t idx : members[s]) {
      mean += surface.point(idx);
      nsum += surface.normal(idx);
    }
    mean /= static_cast<double>(members[s].size());
    // centroid = member mean projected to the nearest member point
    std::uint32_t best = members[s].front();
    double best_d = (surface.point(best) - mean).squaredNorm();
    for (std::uint32_t idx : members[s]) {
      const double d = (surface.point(idx) - mean).squaredNorm();
      if (d < best_d) {
        best = idx;
        best_d = d;
      }
    }
    patch.centroid = surface.point(best);
    patch.normal = nsum.norm() > 1e-12 ? Vec3(nsum.normalized())
                                       : surface.normal(seeds[s].point);
    patch.member_indices = std::move(members[s]);
    patch_of_seed[s] = static_cast<std::int32_t>(graph.patches.size());
    graph.patches.push_back(std::move(patch));
  }

  // Adjacency: patches owning points within `resolution` of each other,
  // restricted to voxel pairs allowed by the connectivity setting.
  auto connected_voxels = [&](const std::array<int, 3>& a, const std::array<int, 3>& b) {
    const int dx = std::abs(a[0] - b[0]);
    const int dy = std::abs(a[1] - b[1]);
    const int dz = std::abs(a[2] - b[2]);
    const int cheb = std::max({dx, dy, dz});
    const int sum = dx + dy + dz;
    if (params.connectivity == 26) return cheb <= 1;
    if (params.connectivity == 18) return cheb <= 1 && sum <= 2;
    return sum <= 1;  // 6-connected
  };

  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j : surface.grid().radius_query(surface.point(i), res)) {
      if (j <= i) continue;
      const std::uint32_t la = label[i], lb = label[j];
      if (la == lb) continue;
      if (!connected_voxels(voxel_of(surface.point(i)), voxel_of(surface.point(j)))) continue;
      const std::uint32_t pa = static_cast<std::uint32_t>(patch_of_seed[la]);
      const std::uint32_t pb = static_cast<std::uint32_t>(patch_of_seed[lb]);
      edges.insert({std::min(pa, pb), std::max(pa, pb)});
    }
  }
  graph.adjacency.assign(edges.begin(), edges.end());

  for (const SurfacePatch& p : graph.patches) {
    if (p.member_indices.size() * 10 > n * 9) {
      const std::string msg =
          "a single patch covers more than 90% of the points; resolution " +
          std::to_string(res) + " is likely too coarse";
      if (params.fail_on_coarse) throw Error(Errc::ResolutionTooCoarse, msg);
      graph.warnings.push_back(msg);
    }
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Ray casting

std::vector<RayHit> ray_intersect(const OrientedSurface& surface,
                                  const Vec3& origin, const Vec3& direction,
                                  double skip_radius, double disc_radius,
                                  double min_transversality) {
  if (std::abs(direction.norm() - 1.0) > 1e-6) {
    throw Error(Errc::InvalidArgument, "ray direction must be unit length");
  }
  if (skip_radius < 0 || disc_radius <= 0) {
    throw Error(Errc::InvalidArgument, "skip_radius >= 0 and disc_radius > 0 required");
  }

  const double o[3] = {origin.x(), origin.y(), origin.z()};
  const double d[3] = {direction.x(), direction.y(), direction.z()};
  std::vector<kernels::RayCandidate> cand;
  kernels::active().ray_scan(surface.xs(), surface.ys(), surface.zs(),
                             surface.size(), o, d, disc_radius * disc_radius,
                             cand);

  // Tangential samples are not crossing evidence.
  std::vector<std::pair<double, std::uint32_t>> pts;
  pts.reserve(cand.size());
  for (const auto& c : cand) {
    const double a = surface.normal(c.index).dot(direction);
    if (std::abs(a) >= min_transversality) pts.emplace_back(c.t, c.index);
  }
  std::sort(pts.begin(), pts.end());

  std::vector<RayHit> hits;
  std::size_t begin = 0;
  while (begin < pts.size()) {
    std::size_t end = begin + 1;
    const double side0 = surface.normal(pts[begin].second).dot(direction);
    while (end < pts.size()) {
      const double gap = pts[end].first - pts[end - 1].first;
      const double side = surface.normal(pts[end].second).dot(direction);
      if (gap > 2.0 * disc_radius || side * side0 < 0) break;
      ++end;
    }
    double t_sum = 0;
    Vec3 nrm = Vec3::Zero();
    for (std::size_t i = begin; i < end; ++i) {
      t_sum += pts[i].first;
      nrm += surface.normal(pts[i].second);
    }
    const double t_mean = t_sum / static_cast<double>(end - begin);
    if (t_mean > skip_radius && nrm.norm() > 1e-12) {
      RayHit hit;
      hit.distance = t_mean;
      hit.position = origin + t_mean * direction;
      hit.normal = nrm.normalized();
      hit.alignment = hit.normal.dot(direction);
      hit.support = static_cast<int>(end - begin);
      hits.push_back(hit);
    }
    begin = end;
  }
  return hits;
}

}  // namespace dmgplan
