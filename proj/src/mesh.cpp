#include "fvlab/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <tuple>

#include <nlohmann/json.hpp>

namespace fvlab {

int Mesh::find_patch(const std::string& label) const {
  for (const Patch& p : patches)
    if (p.label == label) return p.patch_id;
  return -1;
}

namespace {

const char* kSideName[6] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};

struct RawBoundaryFace {
  int owner;        // kept-cell index
  int axis;         // 0,1,2
  int sign;         // -1: normal points toward -axis
  int plane;        // face plane index along axis (multiples of h)
  int t1, t2;       // transverse grid indices (t2 = 0 in 2D)
  bool cut;         // neighbor masked (vs outside the grid)
  Eigen::Vector3d centroid;
};

}  // namespace

Mesh build_masked_grid(int nx, int ny, int nz, double h, int dim, const std::vector<char>& keep,
                       bool merge_cut_patches, std::string geometry_json,
                       const std::string& cut_label) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dim must be 1, 2 or 3");
  const std::size_t total = static_cast<std::size_t>(nx) * ny * nz;
  if (keep.size() != total) throw InvalidArgument("mask size does not match grid");

  auto flat = [&](int ix, int iy, int iz) {
    return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
  };

  std::vector<int> cell_id(total, -1);
  int n_cells = 0;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix)
        if (keep[flat(ix, iy, iz)]) cell_id[flat(ix, iy, iz)] = n_cells++;
  if (n_cells == 0) throw EmptyDomain("no cell survives masking");

  Mesh m;
  m.dim = dim;
  m.h = h;
  m.geometry_json = std::move(geometry_json);
  m.cell_centroids.setZero(n_cells, 3);
  m.cell_volumes.resize(n_cells);
  const double vol = std::pow(h, dim);
  const double face_area = std::pow(h, dim - 1);

  std::vector<std::array<int, 3>> grid_coord(n_cells);
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const int id = cell_id[flat(ix, iy, iz)];
        if (id < 0) continue;
        m.cell_centroids(id, 0) = (ix + 0.5) * h;
        if (dim >= 2) m.cell_centroids(id, 1) = (iy + 0.5) * h;
        if (dim >= 3) m.cell_centroids(id, 2) = (iz + 0.5) * h;
        m.cell_volumes(id) = vol;
        grid_coord[id] = {ix, iy, iz};
      }

  const int dims[3] = {nx, ny, nz};
  std::vector<RawBoundaryFace> raw;
  for (int id = 0; id < n_cells; ++id) {
    const auto [ix, iy, iz] = grid_coord[id];
    const int coord[3] = {ix, iy, iz};
    for (int axis = 0; axis < dim; ++axis) {
      for (int sign : {-1, +1}) {
        int nb[3] = {ix, iy, iz};
        nb[axis] += sign;
        const bool outside = nb[axis] < 0 || nb[axis] >= dims[axis];
        const int nb_id = outside ? -1 : cell_id[flat(nb[0], nb[1], nb[2])];
        if (nb_id >= 0) {
          if (sign > 0) {  // record each interior face once, owner = lower index
            InteriorFace f;
            f.owner = std::min(id, nb_id);
            f.neighbor = std::max(id, nb_id);
            f.area = face_area;
            f.normal_distance = h;
            m.interior_faces.push_back(f);
          }
          continue;
        }
        RawBoundaryFace f;
        f.owner = id;
        f.axis = axis;
        f.sign = sign;
        f.plane = coord[axis] + (sign > 0 ? 1 : 0);
        const int taxes[2] = {axis == 0 ? 1 : 0, axis == 2 ? 1 : 2};
        f.t1 = coord[taxes[0]];
        f.t2 = dim == 3 ? coord[taxes[1]] : 0;
        f.cut = !outside;
        f.centroid = m.cell_centroids.row(id).transpose();
        f.centroid[axis] += 0.5 * sign * h;
        raw.push_back(f);
      }
    }
  }

  // Connectivity: pure-Neumann pinning downstream assumes one component.
  {
    std::vector<std::vector<int>> adj(n_cells);
    for (const InteriorFace& f : m.interior_faces) {
      adj[f.owner].push_back(f.neighbor);
      adj[f.neighbor].push_back(f.owner);
    }
    std::vector<char> seen(n_cells, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int visited = 1;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (int nb : adj[c])
        if (!seen[nb]) {
          seen[nb] = 1;
          ++visited;
          stack.push_back(nb);
        }
    }
    if (visited != n_cells)
      throw DisconnectedDomain("kept cells form more than one component");
  }

  // Patch grouping. Key: (cut, axis, sign, plane); 2D groups are split into
  // contiguous runs along the transverse index, one patch per run. With
  // merge_cut_patches all cut faces collapse into a single patch (3D staircase
  // surface of the cylindrical hole).
  std::map<std::tuple<int, int, int, int>, std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(raw.size()); ++i) {
    const RawBoundaryFace& f = raw[i];
    if (f.cut && merge_cut_patches)
      groups[{2, 0, 0, 0}].push_back(i);
    else
      groups[{f.cut ? 1 : 0, f.axis, f.sign, f.plane}].push_back(i);
  }

  m.boundary_faces.resize(raw.size());
  int next_patch = 0;
  int cut_counter = 0;
  auto emit_patch = [&](const std::string& label, const std::vector<int>& members) {
    m.patches.push_back({next_patch, label});
    for (int i : members) {
      BoundaryFace bf;
      bf.owner = raw[i].owner;
      bf.centroid = raw[i].centroid;
      bf.area = face_area;
      bf.normal_distance = 0.5 * h;
      bf.patch_id = next_patch;
      m.boundary_faces[i] = bf;
    }
    ++next_patch;
  };

  for (auto& [key, members] : groups) {
    const auto [kind, axis, sign, plane] = key;
    if (kind == 2) {
      emit_patch(cut_label, members);
      continue;
    }
    if (dim == 3 || dim == 1) {
      // Outer cube sides are single connected patches here (subtracted shapes
      // stay strictly interior); 1D has one face per side.
      const std::string base = kind == 1 ? cut_label + std::to_string(cut_counter++)
                                         : kSideName[2 * axis + (sign > 0 ? 1 : 0)];
      emit_patch(base, members);
      continue;
    }
    // 2D: order by transverse index and split on gaps.
    std::sort(members.begin(), members.end(),
              [&](int a, int b) { return raw[a].t1 < raw[b].t1; });
    std::vector<std::vector<int>> runs;
    for (int i : members) {
      if (runs.empty() || raw[i].t1 != raw[runs.back().back()].t1 + 1) runs.emplace_back();
      runs.back().push_back(i);
    }
    for (std::size_t r = 0; r < runs.size(); ++r) {
      std::string label;
      if (kind == 1)
        label = cut_label + std::to_string(cut_counter++);
      else {
        label = kSideName[2 * axis + (sign > 0 ? 1 : 0)];
        if (runs.size() > 1) label += "_" + std::to_string(r);
      }
      emit_patch(label, runs[r]);
    }
  }

  return m;
}

Mesh build_mesh(const GeometrySpec& spec) {
  validate(spec);
  const int dim = spec.dim();
  const int n = spec.base_resolution;
  const double h = spec.domain_length / n;
  const int nz = dim == 3 ? n : 1;

  std::vector<char> keep(static_cast<std::size_t>(n) * n * nz, 0);
  std::size_t idx = 0;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix, ++idx) {
        Eigen::Vector3d c((ix + 0.5) * h, (iy + 0.5) * h, dim == 3 ? (iz + 0.5) * h : 0.0);
        keep[idx] = contains(spec, c) ? 1 : 0;
      }

  const std::string cut_label =
      spec.family == GeometryFamily::CubeWithCylindricalHole ? "cylinder" : "cut";
  return build_masked_grid(n, n, nz, h, dim, keep,
                           /*merge_cut_patches=*/dim == 3,
                           geometry_to_json(spec).dump(), cut_label);
}

Mesh make_interval_mesh(int n_cells, double length) {
  if (n_cells < 1) throw InvalidArgument("need at least one cell");
  std::vector<char> keep(n_cells, 1);
  return build_masked_grid(n_cells, 1, 1, length / n_cells, 1, keep, false);
}

std::vector<std::vector<int>> patch_segments(const Mesh& mesh) {
  std::vector<std::vector<int>> seg(mesh.num_patches());
  for (int i = 0; i < static_cast<int>(mesh.boundary_faces.size()); ++i)
    seg[mesh.boundary_faces[i].patch_id].push_back(i);
  return seg;
}

Mesh split_boundary_patch(const Mesh& mesh, int patch_id, int parts) {
  if (patch_id < 0 || patch_id >= mesh.num_patches()) throw InvalidArgument("bad patch id");
  if (parts < 1) throw InvalidArgument("parts must be >= 1");

  std::vector<int> faces = patch_segments(mesh)[patch_id];
  if (static_cast<int>(faces.size()) < parts)
    throw InvalidArgument("patch has fewer faces than requested parts");

  // Order along the segment. Boundary faces of one 2D patch are collinear, so
  // sorting by the varying coordinate orders them geometrically.
  std::sort(faces.begin(), faces.end(), [&](int a, int b) {
    const auto& ca = mesh.boundary_faces[a].centroid;
    const auto& cb = mesh.boundary_faces[b].centroid;
    return std::lexicographical_compare(ca.data(), ca.data() + 3, cb.data(), cb.data() + 3);
  });

  Mesh out = mesh;
  const std::string base = mesh.patches[patch_id].label;
  const int count = static_cast<int>(faces.size());
  const int base_size = count / parts;
  const int remainder = count % parts;

  std::vector<int> part_ids(parts);
  part_ids[0] = patch_id;
  out.patches[patch_id].label = base + "_s0";
  for (int p = 1; p < parts; ++p) {
    part_ids[p] = out.num_patches();
    out.patches.push_back({part_ids[p], base + "_s" + std::to_string(p)});
  }

  int pos = 0;
  for (int p = 0; p < parts; ++p) {
    const int sz = base_size + (p < remainder ? 1 : 0);
    for (int k = 0; k < sz; ++k) out.boundary_faces[faces[pos++]].patch_id = part_ids[p];
  }
  return out;
}

nlohmann::json mesh_to_json(const Mesh& m) {
  nlohmann::json j;
  j["dim"] = m.dim;
  j["h"] = m.h;
  const int n = m.num_cells();
  std::vector<double> centroids;
  centroids.reserve(static_cast<std::size_t>(n) * m.dim);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m.dim; ++a) centroids.push_back(m.cell_centroids(i, a));
  j["centroids"] = centroids;
  j["volumes"] = std::vector<double>(m.cell_volumes.data(), m.cell_volumes.data() + n);

  std::vector<int> io, in;
  std::vector<double> ia, id;
  for (const InteriorFace& f : m.interior_faces) {
    io.push_back(f.owner);
    in.push_back(f.neighbor);
    ia.push_back(f.area);
    id.push_back(f.normal_distance);
  }
  j["iface_owner"] = io;
  j["iface_neighbor"] = in;
  j["iface_area"] = ia;
  j["iface_dist"] = id;

  std::vector<int> bo, bp;
  std::vector<double> bc, ba, bd;
  for (const BoundaryFace& f : m.boundary_faces) {
    bo.push_back(f.owner);
    bp.push_back(f.patch_id);
    for (int a = 0; a < m.dim; ++a) bc.push_back(f.centroid[a]);
    ba.push_back(f.area);
    bd.push_back(f.normal_distance);
  }
  j["bface_owner"] = bo;
  j["bface_centroid"] = bc;
  j["bface_area"] = ba;
  j["bface_dist"] = bd;
  j["bface_patch"] = bp;

  nlohmann::json patches = nlohmann::json::array();
  for (const Patch& p : m.patches) patches.push_back({{"id", p.patch_id}, {"label", p.label}});
  j["patches"] = patches;

  if (!m.geometry_json.empty()) j["geometry"] = nlohmann::json::parse(m.geometry_json);
  return j;
}

Mesh mesh_from_json(const nlohmann::json& j) {
  Mesh m;
  m.dim = j.at("dim").get<int>();
  m.h = j.at("h").get<double>();
  const auto centroids = j.at("centroids").get<std::vector<double>>();
  const auto volumes = j.at("volumes").get<std::vector<double>>();
  const int n = static_cast<int>(volumes.size());
  m.cell_centroids.setZero(n, 3);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m.dim; ++a)
      m.cell_centroids(i, a) = centroids[static_cast<std::size_t>(i) * m.dim + a];
  m.cell_volumes = Eigen::Map<const Eigen::VectorXd>(volumes.data(), n);

  const auto io = j.at("iface_owner").get<std::vector<int>>();
  const auto in = j.at("iface_neighbor").get<std::vector<int>>();
  const auto ia = j.at("iface_area").get<std::vector<double>>();
  const auto id = j.at("iface_dist").get<std::vector<double>>();
  for (std::size_t i = 0; i < io.size(); ++i)
    m.interior_faces.push_back({io[i], in[i], ia[i], id[i]});

  const auto bo = j.at("bface_owner").get<std::vector<int>>();
  const auto bc = j.at("bface_centroid").get<std::vector<double>>();
  const auto ba = j.at("bface_area").get<std::vector<double>>();
  const auto bd = j.at("bface_dist").get<std::vector<double>>();
  const auto bp = j.at("bface_patch").get<std::vector<int>>();
  for (std::size_t i = 0; i < bo.size(); ++i) {
    BoundaryFace f;
    f.owner = bo[i];
    for (int a = 0; a < m.dim; ++a) f.centroid[a] = bc[i * m.dim + a];
    f.area = ba[i];
    f.normal_distance = bd[i];
    f.patch_id = bp[i];
    m.boundary_faces.push_back(f);
  }

  for (const auto& p : j.at("patches"))
    m.patches.push_back({p.at("id").get<int>(), p.at("label").get<std::string>()});

  if (j.contains("geometry")) m.geometry_json = j.at("geometry").dump();
  return m;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << mesh_to_json(mesh).dump() << "\n";
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return mesh_from_json(j);
}

namespace {

constexpr char kMeshMagic[8] = {'F', 'V', 'L', 'M', 'E', 'S', 'H', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated mesh binary");
  return v;
}

}  // namespace

void save_mesh_binary(const Mesh& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMeshMagic, 8);
  write_pod<std::int32_t>(out, m.dim);
  write_pod<double>(out, m.h);
  write_pod<std::int64_t>(out, m.num_cells());
  write_pod<std::int64_t>(out, static_cast<std::int64_t>(m.interior_faces.size()));
  write_pod<std::int64_t>(out, static_cast<std::int64_t>(m.boundary_faces.size()));
  write_pod<std::int64_t>(out, static_cast<std::int64_t>(m.patches.size()));
  for (int i = 0; i < m.num_cells(); ++i)
    for (int a = 0; a < 3; ++a) write_pod<double>(out, m.cell_centroids(i, a));
  out.write(reinterpret_cast<const char*>(m.cell_volumes.data()),
            static_cast<std::streamsize>(sizeof(double)) * m.num_cells());
  for (const InteriorFace& f : m.interior_faces) {
    write_pod<std::int32_t>(out, f.owner);
    write_pod<std::int32_t>(out, f.neighbor);
    write_pod<double>(out, f.area);
    write_pod<double>(out, f.normal_distance);
  }
  for (const BoundaryFace& f : m.boundary_faces) {
    write_pod<std::int32_t>(out, f.owner);
    for (int a = 0; a < 3; ++a) write_pod<double>(out, f.centroid[a]);
    write_pod<double>(out, f.area);
    write_pod<double>(out, f.normal_distance);
    write_pod<std::int32_t>(out, f.patch_id);
  }
  for (const Patch& p : m.patches) {
    write_pod<std::int32_t>(out, p.patch_id);
    write_pod<std::int64_t>(out, static_cast<std::int64_t>(p.label.size()));
    out.write(p.label.data(), static_cast<std::streamsize>(p.label.size()));
  }
  write_pod<std::int64_t>(out, static_cast<std::int64_t>(m.geometry_json.size()));
  out.write(m.geometry_json.data(), static_cast<std::streamsize>(m.geometry_json.size()));
}

Mesh load_mesh_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMeshMagic, 8) != 0) throw IoError("not a mesh binary");
  Mesh m;
  m.dim = read_pod<std::int32_t>(in);
  m.h = read_pod<double>(in);
  const auto n = read_pod<std::int64_t>(in);
  const auto ni = read_pod<std::int64_t>(in);
  const auto nb = read_pod<std::int64_t>(in);
  const auto np = read_pod<std::int64_t>(in);
  m.cell_centroids.setZero(n, 3);
  for (std::int64_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) m.cell_centroids(i, a) = read_pod<double>(in);
  m.cell_volumes.resize(n);
  in.read(reinterpret_cast<char*>(m.cell_volumes.data()),
          static_cast<std::streamsize>(sizeof(double)) * n);
  for (std::int64_t i = 0; i < ni; ++i) {
    InteriorFace f;
    f.owner = read_pod<std::int32_t>(in);
    f.neighbor = read_pod<std::int32_t>(in);
    f.area = read_pod<double>(in);
    f.normal_distance = read_pod<double>(in);
    m.interior_faces.push_back(f);
  }
  for (std::int64_t i = 0; i < nb; ++i) {
    BoundaryFace f;
    f.owner = read_pod<std::int32_t>(in);
    for (int a = 0; a < 3; ++a) f.centroid[a] = read_pod<double>(in);
    f.area = read_pod<double>(in);
    f.normal_distance = read_pod<double>(in);
    f.patch_id = read_pod<std::int32_t>(in);
    m.boundary_faces.push_back(f);
  }
  for (std::int64_t i = 0; i < np; ++i) {
    Patch p;
    p.patch_id = read_pod<std::int32_t>(in);
    const auto len = read_pod<std::int64_t>(in);
    p.label.resize(static_cast<std::size_t>(len));
    in.read(p.label.data(), len);
    m.patches.push_back(p);
  }
  const auto glen = read_pod<std::int64_t>(in);
  m.geometry_json.resize(static_cast<std::size_t>(glen));
  in.read(m.geometry_json.data(), glen);
  return m;
}

}  // namespace fvlab
