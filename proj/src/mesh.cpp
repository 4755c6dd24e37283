/**
 * @file mesh.cpp
 * @brief Boundary-layer lofting, Cartesian grids, node merging, shape functions and VTK output.
 */
#include "blayer/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace blayer {

std::string to_string(ElementTech t) {
    switch (t) {
        case ElementTech::Quad4: return "quad4";
        case ElementTech::Quad8: return "quad8";
        case ElementTech::Tri3: return "tri3";
        case ElementTech::Nurbs9: return "nurbs9";
    }
    return "unknown";
}

ElementTech element_tech_from_string(const std::string& s) {
    if (s == "quad4") return ElementTech::Quad4;
    if (s == "quad8") return ElementTech::Quad8;
    if (s == "tri3") return ElementTech::Tri3;
    if (s == "nurbs9") return ElementTech::Nurbs9;
    throw std::invalid_argument("unknown element technology '" + s + "'");
}

int nodes_per_element(ElementTech t) {
    switch (t) {
        case ElementTech::Quad4: return 4;
        case ElementTech::Quad8: return 8;
        case ElementTech::Tri3: return 3;
        case ElementTech::Nurbs9: return 9;
    }
    return 0;
}

double Mesh::bounding_diagonal() const {
    if (nodes.empty()) return 0.0;
    Vec2 lo = nodes[0], hi = nodes[0];
    for (const auto& x : nodes) {
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
    }
    return (hi - lo).norm();
}

std::vector<int> element_corners(const Element& e) {
    switch (e.tech) {
        case ElementTech::Tri3: return {e.nodes[0], e.nodes[1], e.nodes[2]};
        case ElementTech::Quad4:
        case ElementTech::Quad8: return {e.nodes[0], e.nodes[1], e.nodes[2], e.nodes[3]};
        case ElementTech::Nurbs9: return {e.nodes[0], e.nodes[2], e.nodes[8], e.nodes[6]};
    }
    return {};
}

std::vector<int> edge_nodes(const Element& e, int k) {
    const auto& n = e.nodes;
    switch (e.tech) {
        case ElementTech::Tri3: return {n[k], n[(k + 1) % 3]};
        case ElementTech::Quad4: return {n[k], n[(k + 1) % 4]};
        case ElementTech::Quad8: return {n[k], n[4 + k], n[(k + 1) % 4]};
        case ElementTech::Nurbs9: {
            static const int idx[4][3] = {{0, 1, 2}, {2, 5, 8}, {8, 7, 6}, {6, 3, 0}};
            return {n[idx[k][0]], n[idx[k][1]], n[idx[k][2]]};
        }
    }
    return {};
}

// ----------------------------------------------------------------------------
// Curves
// ----------------------------------------------------------------------------

BoundingBox curves_bounding_box(const std::vector<NurbsPatch>& curves) {
    if (curves.empty()) throw GeometryError("bounding box of an empty curve set");
    BoundingBox box;
    box.lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    box.hi = -box.lo;
    for (const auto& c : curves) {
        const auto bp = c.knots(0).breakpoints();
        for (std::size_t e = 0; e + 1 < bp.size(); ++e)
            for (int k = 0; k <= 200; ++k) {
                const Vec2 x = curve_point(c, bp[e] + (bp[e + 1] - bp[e]) * k / 200.0);
                box.lo = box.lo.cwiseMin(x);
                box.hi = box.hi.cwiseMax(x);
            }
    }
    return box;
}

NurbsPatch reverse_curve(const NurbsPatch& curve) {
    const auto& kv = curve.knots(0);
    const double a = kv.front(), b = kv.back();
    std::vector<double> k(kv.size());
    for (std::size_t i = 0; i < kv.size(); ++i) k[i] = a + b - kv[kv.size() - 1 - i];
    const int n = curve.num_cp();
    Eigen::MatrixXd P(n, curve.spatial_dim());
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        P.row(i) = curve.points().row(n - 1 - i);
        w[i] = curve.weights()[n - 1 - i];
    }
    return NurbsPatch(KnotVector(std::move(k), kv.degree()), std::move(P), std::move(w));
}

NurbsPatch straight_curve(const Vec2& a, const Vec2& b, int degree, int spans) {
    KnotVector kv = KnotVector::open_uniform(degree, spans);
    const auto g = greville_abscissae(kv);
    Eigen::MatrixXd P(g.size(), 2);
    for (std::size_t i = 0; i < g.size(); ++i) P.row(i) = ((1.0 - g[i]) * a + g[i] * b).transpose();
    return NurbsPatch(std::move(kv), std::move(P), std::vector<double>(g.size(), 1.0));
}

// ----------------------------------------------------------------------------
// Boundary layer
// ----------------------------------------------------------------------------

BoundaryLayer build_boundary_layer(const std::vector<NurbsPatch>& base,
                                   const std::vector<NurbsPatch>& offsets,
                                   const LayerOptions& options) {
    if (base.size() != offsets.size() || base.empty())
        throw GeometryError("boundary layer: need one offset per base curve");
    if (options.elements_through_thickness < 1)
        throw GeometryError("boundary layer: at least one element through the thickness");

    BoundaryLayer out;
    Mesh& mesh = out.mesh;
    mesh.tech = ElementTech::Nurbs9;
    const KnotVector kt = KnotVector::open_uniform(2, options.elements_through_thickness);
    const auto gt = greville_abscissae(kt);

    for (std::size_t k = 0; k < base.size(); ++k) {
        if (base[k].param_dim() != 1 || base[k].spatial_dim() != 2)
            throw GeometryError("boundary layer: base must be planar curves");
        if (base[k].knots(0).degree() != 2)
            throw GeometryError("boundary layer: base curves must be quadratic");
        const NurbsPatch B = reverse_curve(base[k]);
        const NurbsPatch O = reverse_curve(offsets[k]);
        if (O.num_cp() != B.num_cp() || O.knots(0).knots() != B.knots(0).knots() ||
            O.weights() != B.weights())
            throw GeometryError("boundary layer: offset does not share the base structure");

        MeshPatch mp;
        mp.u = B.knots(0);
        mp.v = kt;
        mp.nu = B.num_cp();
        mp.nv = kt.num_basis();
        const int patch_id = static_cast<int>(mesh.patches.size());
        for (int j = 0; j < mp.nv; ++j)
            for (int i = 0; i < mp.nu; ++i) {
                const Vec2 x = (1.0 - gt[j]) * Vec2(B.points().row(i)) + gt[j] * Vec2(O.points().row(i));
                mp.node.push_back(mesh.num_nodes());
                mesh.nodes.push_back(x);
                mesh.weights.push_back(B.weights()[i]);
            }

        const auto bu = mp.u.breakpoints();
        const auto bv = mp.v.breakpoints();
        const int neu = static_cast<int>(bu.size()) - 1, nev = static_cast<int>(bv.size()) - 1;
        const std::string tag = std::to_string(k);
        for (int ev = 0; ev < nev; ++ev)
            for (int eu = 0; eu < neu; ++eu) {
                Element e;
                e.tech = ElementTech::Nurbs9;
                e.patch = patch_id;
                e.span = {mp.u.find_span(0.5 * (bu[eu] + bu[eu + 1])),
                          mp.v.find_span(0.5 * (bv[ev] + bv[ev + 1]))};
                e.box = {bu[eu], bu[eu + 1], bv[ev], bv[ev + 1]};
                for (int b = 0; b < 3; ++b)
                    for (int a = 0; a < 3; ++a)
                        e.nodes.push_back(mp.node[(e.span[0] - 2 + a) + mp.nu * (e.span[1] - 2 + b)]);
                const int id = mesh.num_elements();
                mesh.elements.push_back(std::move(e));
                if (ev == 0) mesh.edge_sets["base"].push_back({id, 0});
                if (ev == nev - 1) mesh.edge_sets["interface"].push_back({id, 2});
                if (eu == 0) mesh.edge_sets["start:" + tag].push_back({id, 3});
                if (eu == neu - 1) mesh.edge_sets["end:" + tag].push_back({id, 1});
                if (ev == 0) mesh.edge_sets["base:" + tag].push_back({id, 0});
                if (ev == nev - 1) mesh.edge_sets["interface:" + tag].push_back({id, 2});
            }
        std::vector<int> bn, in;
        for (int i = 0; i < mp.nu; ++i) {
            bn.push_back(mp.node[i]);
            in.push_back(mp.node[i + mp.nu * (mp.nv - 1)]);
        }
        out.base_nodes.push_back(bn);
        out.interface_nodes.push_back(in);
        out.base_curves.push_back(B);
        out.interface_curves.push_back(O);
        mesh.patches.push_back(std::move(mp));
    }

    const auto map = merge_conforming_nodes(mesh);
    for (auto* lists : {&out.base_nodes, &out.interface_nodes})
        for (auto& l : *lists)
            for (int& n : l) n = map[n];

    std::set<int> base_set, iface_set;
    for (const auto& l : out.base_nodes) base_set.insert(l.begin(), l.end());
    for (const auto& l : out.interface_nodes) iface_set.insert(l.begin(), l.end());
    mesh.node_sets["base"] = std::vector<int>(base_set.begin(), base_set.end());
    mesh.node_sets["interface"] = std::vector<int>(iface_set.begin(), iface_set.end());
    return out;
}

// ----------------------------------------------------------------------------
// Cartesian mesh
// ----------------------------------------------------------------------------

Mesh build_cartesian_mesh(const BoundingBox& box_in, double h, ElementTech tech, double padding) {
    if (!(h > 0.0)) throw GeometryError("cartesian mesh: element size must be positive");
    if (tech != ElementTech::Quad4 && tech != ElementTech::Quad8)
        throw GeometryError("cartesian mesh: technology must be quad4 or quad8");
    BoundingBox box = box_in;
    box.lo.array() -= padding;
    box.hi.array() += padding;
    const Vec2 ext = box.extent();
    if (!(ext.x() > 0.0) || !(ext.y() > 0.0)) throw GeometryError("cartesian mesh: degenerate bounding box");
    const int nx = std::max(1, static_cast<int>(std::ceil(ext.x() / h - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(ext.y() / h - 1e-9)));
    const double dx = ext.x() / nx, dy = ext.y() / ny;

    Mesh m;
    m.tech = tech;
    auto X = [&](int i) { return i == nx ? box.hi.x() : box.lo.x() + i * dx; };
    auto Y = [&](int j) { return j == ny ? box.hi.y() : box.lo.y() + j * dy; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) m.nodes.emplace_back(X(i), Y(j));
    const int corner = (nx + 1) * (ny + 1);
    const int hmid = nx * (ny + 1);
    if (tech == ElementTech::Quad8) {
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i) m.nodes.emplace_back(0.5 * (X(i) + X(i + 1)), Y(j));
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i <= nx; ++i) m.nodes.emplace_back(X(i), 0.5 * (Y(j) + Y(j + 1)));
    }
    m.weights.assign(m.nodes.size(), 1.0);
    auto c = [&](int i, int j) { return i + (nx + 1) * j; };
    auto hm = [&](int i, int j) { return corner + i + nx * j; };
    auto vm = [&](int i, int j) { return corner + hmid + i + (nx + 1) * j; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Element e;
            e.tech = tech;
            e.nodes = {c(i, j), c(i + 1, j), c(i + 1, j + 1), c(i, j + 1)};
            if (tech == ElementTech::Quad8)
                e.nodes.insert(e.nodes.end(), {hm(i, j), vm(i + 1, j), hm(i, j + 1), vm(i, j)});
            const int id = m.num_elements();
            m.elements.push_back(std::move(e));
            if (j == 0) m.edge_sets["bottom"].push_back({id, 0});
            if (i == nx - 1) m.edge_sets["right"].push_back({id, 1});
            if (j == ny - 1) m.edge_sets["top"].push_back({id, 2});
            if (i == 0) m.edge_sets["left"].push_back({id, 3});
        }
    for (const auto& [name, edges] : m.edge_sets) {
        std::set<int> s;
        for (const auto& er : edges)
            for (int n : edge_nodes(m.elements[er.element], er.local_edge)) s.insert(n);
        m.node_sets[name] = std::vector<int>(s.begin(), s.end());
    }
    return m;
}

// ----------------------------------------------------------------------------
// Node merging
// ----------------------------------------------------------------------------

std::vector<EdgeRef> boundary_edges_where(const Mesh& mesh, const std::function<bool(const Vec2&)>& on_edge) {
    const auto nedges = [](ElementTech t) { return t == ElementTech::Tri3 ? 3 : 4; };
    std::map<std::pair<int, int>, int> uses;
    for (const auto& e : mesh.elements)
        for (int k = 0; k < nedges(e.tech); ++k) {
            const auto n = edge_nodes(e, k);
            ++uses[std::minmax(n.front(), n.back())];
        }
    std::vector<EdgeRef> out;
    for (int id = 0; id < mesh.num_elements(); ++id) {
        const Element& e = mesh.elements[id];
        for (int k = 0; k < nedges(e.tech); ++k) {
            const auto n = edge_nodes(e, k);
            if (uses[std::minmax(n.front(), n.back())] != 1) continue;
            if (std::all_of(n.begin(), n.end(), [&](int a) { return on_edge(mesh.nodes[a]); })) out.push_back({id, k});
        }
    }
    return out;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file " + path);
    Mesh mesh;
    std::string key;
    bool have_tech = false;
    while (in >> key) {
        if (!key.empty() && key[0] == '#') {
            std::getline(in, key);
            continue;
        }
        if (key == "nodes") {
            int n = 0;
            in >> n;
            mesh.nodes.resize(n);
            for (auto& x : mesh.nodes) in >> x.x() >> x.y();
        } else if (key == "elements") {
            int m = 0;
            in >> m;
            for (int i = 0; i < m; ++i) {
                std::string tag;
                in >> tag;
                Element e;
                e.tech = element_tech_from_string(tag);
                if (e.tech == ElementTech::Nurbs9) throw GeometryError("mesh file: NURBS elements are not supported");
                e.nodes.resize(nodes_per_element(e.tech));
                for (auto& a : e.nodes) {
                    in >> a;
                    if (a < 0 || a >= mesh.num_nodes()) throw GeometryError("mesh file: node index out of range");
                }
                if (!have_tech || e.tech == ElementTech::Quad8) mesh.tech = e.tech;
                have_tech = true;
                mesh.elements.push_back(std::move(e));
            }
        } else if (key == "nodeset") {
            std::string name;
            int k = 0;
            in >> name >> k;
            auto& set = mesh.node_sets[name];
            set.resize(k);
            for (auto& a : set) in >> a;
        } else {
            throw GeometryError("mesh file: unknown section '" + key + "'");
        }
        if (!in) throw GeometryError("mesh file: truncated input in " + path);
    }
    return mesh;
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "nodes %d\n", mesh.num_nodes());
    for (const auto& x : mesh.nodes) std::fprintf(f, "%.17g %.17g\n", x.x(), x.y());
    std::fprintf(f, "elements %d\n", mesh.num_elements());
    for (const auto& e : mesh.elements) {
        std::fprintf(f, "%s", to_string(e.tech).c_str());
        for (int a : e.nodes) std::fprintf(f, " %d", a);
        std::fprintf(f, "\n");
    }
    for (const auto& [name, set] : mesh.node_sets) {
        std::fprintf(f, "nodeset %s %zu\n", name.c_str(), set.size());
        for (int a : set) std::fprintf(f, "%d\n", a);
    }
    std::fclose(f);
}

std::vector<int> merge_conforming_nodes(Mesh& mesh, double tol) {
    if (tol < 0.0) tol = 1e-9 * mesh.bounding_diagonal();
    const int n = mesh.num_nodes();
    std::vector<int> map(n);
    std::vector<int> keep;
    struct KeyHash {
        std::size_t operator()(const std::pair<long long, long long>& k) const {
            return std::hash<long long>()(k.first * 1000003LL) ^ std::hash<long long>()(k.second);
        }
    };
    std::unordered_map<std::pair<long long, long long>, std::vector<int>, KeyHash> grid;
    const double cell = tol > 0.0 ? tol : 1.0;
    for (int i = 0; i < n; ++i) {
        const Vec2& x = mesh.nodes[i];
        const long long kx = static_cast<long long>(std::floor(x.x() / cell));
        const long long ky = static_cast<long long>(std::floor(x.y() / cell));
        int found = -1;
        for (long long dx = -1; dx <= 1 && found < 0; ++dx)
            for (long long dy = -1; dy <= 1 && found < 0; ++dy) {
                auto it = grid.find({kx + dx, ky + dy});
                if (it == grid.end()) continue;
                for (int k : it->second) {
                    const double d = (mesh.nodes[keep[k]] - x).norm();
                    if ((tol > 0.0 && d <= tol) || d == 0.0) {
                        found = k;
                        break;
                    }
                }
            }
        if (found < 0) {
            found = static_cast<int>(keep.size());
            keep.push_back(i);
            grid[{kx, ky}].push_back(found);
        }
        map[i] = found;
    }

    std::vector<Vec2> nodes;
    std::vector<double> weights;
    for (int k : keep) {
        nodes.push_back(mesh.nodes[k]);
        weights.push_back(k < static_cast<int>(mesh.weights.size()) ? mesh.weights[k] : 1.0);
    }
    mesh.nodes = std::move(nodes);
    mesh.weights = std::move(weights);
    for (auto& e : mesh.elements) {
        for (int& a : e.nodes) a = map[a];
        if (e.tech != ElementTech::Nurbs9) {
            std::set<int> u(e.nodes.begin(), e.nodes.end());
            if (u.size() != e.nodes.size()) throw GeometryError("node merge collapsed an element");
        }
    }
    for (auto& p : mesh.patches)
        for (int& a : p.node) a = map[a];
    for (auto& [name, set] : mesh.node_sets) {
        std::set<int> s;
        for (int a : set) s.insert(map[a]);
        set.assign(s.begin(), s.end());
    }
    return map;
}

// ----------------------------------------------------------------------------
// Shape functions
// ----------------------------------------------------------------------------

Vec2 element_center_local(ElementTech t) {
    return t == ElementTech::Tri3 ? Vec2(1.0 / 3.0, 1.0 / 3.0) : Vec2(0.0, 0.0);
}

bool inside_parent(ElementTech t, const Vec2& x, double tol) {
    if (t == ElementTech::Tri3) return x.x() >= -tol && x.y() >= -tol && x.x() + x.y() <= 1.0 + tol;
    return std::abs(x.x()) <= 1.0 + tol && std::abs(x.y()) <= 1.0 + tol;
}

ShapeValues shape_functions(const Mesh& mesh, const Element& e, const Vec2& loc) {
    ShapeValues sv;
    const double r = loc.x(), s = loc.y();
    switch (e.tech) {
        case ElementTech::Tri3:
            sv.n = 3;
            sv.N = {1.0 - r - s, r, s};
            sv.dN[0] = {-1.0, -1.0};
            sv.dN[1] = {1.0, 0.0};
            sv.dN[2] = {0.0, 1.0};
            break;
        case ElementTech::Quad4: {
            static const double rr[4] = {-1, 1, 1, -1}, ss[4] = {-1, -1, 1, 1};
            sv.n = 4;
            for (int a = 0; a < 4; ++a) {
                sv.N[a] = 0.25 * (1 + r * rr[a]) * (1 + s * ss[a]);
                sv.dN[a] = {0.25 * rr[a] * (1 + s * ss[a]), 0.25 * ss[a] * (1 + r * rr[a])};
            }
            break;
        }
        case ElementTech::Quad8: {
            static const double rr[8] = {-1, 1, 1, -1, 0, 1, 0, -1}, ss[8] = {-1, -1, 1, 1, -1, 0, 1, 0};
            sv.n = 8;
            for (int a = 0; a < 4; ++a) {
                const double ri = rr[a], si = ss[a];
                sv.N[a] = 0.25 * (1 + r * ri) * (1 + s * si) * (r * ri + s * si - 1);
                sv.dN[a] = {0.25 * ri * (1 + s * si) * (2 * r * ri + s * si),
                            0.25 * si * (1 + r * ri) * (r * ri + 2 * s * si)};
            }
            for (int a = 4; a < 8; ++a) {
                const double ri = rr[a], si = ss[a];
                if (ri == 0.0) {
                    sv.N[a] = 0.5 * (1 - r * r) * (1 + s * si);
                    sv.dN[a] = {-r * (1 + s * si), 0.5 * si * (1 - r * r)};
                } else {
                    sv.N[a] = 0.5 * (1 + r * ri) * (1 - s * s);
                    sv.dN[a] = {0.5 * ri * (1 - s * s), -s * (1 + r * ri)};
                }
            }
            break;
        }
        case ElementTech::Nurbs9: {
            const MeshPatch& p = mesh.patches.at(e.patch);
            const double hu = 0.5 * (e.box[1] - e.box[0]), hv = 0.5 * (e.box[3] - e.box[2]);
            const double u = e.box[0] + (r + 1.0) * hu, v = e.box[2] + (s + 1.0) * hv;
            const BasisValues bu = eval_bspline_basis_on_span(p.u, e.span[0], u, 1);
            const BasisValues bv = eval_bspline_basis_on_span(p.v, e.span[1], v, 1);
            double W = 0.0, Wu = 0.0, Wv = 0.0;
            std::array<double, 9> Nw{}, Nwu{}, Nwv{};
            for (int b = 0; b < 3; ++b)
                for (int a = 0; a < 3; ++a) {
                    const int k = a + 3 * b;
                    const double w = mesh.weights[e.nodes[k]];
                    Nw[k] = bu.ders[0][a] * bv.ders[0][b] * w;
                    Nwu[k] = bu.ders[1][a] * bv.ders[0][b] * w;
                    Nwv[k] = bu.ders[0][a] * bv.ders[1][b] * w;
                    W += Nw[k];
                    Wu += Nwu[k];
                    Wv += Nwv[k];
                }
            sv.n = 9;
            for (int k = 0; k < 9; ++k) {
                sv.N[k] = Nw[k] / W;
                sv.dN[k] = {(Nwu[k] - sv.N[k] * Wu) / W * hu, (Nwv[k] - sv.N[k] * Wv) / W * hv};
            }
            break;
        }
    }
    return sv;
}

Vec2 element_point(const Mesh& mesh, int element, const Vec2& local) {
    const Element& e = mesh.elements[element];
    const ShapeValues sv = shape_functions(mesh, e, local);
    Vec2 x = Vec2::Zero();
    for (int a = 0; a < sv.n; ++a) x += sv.N[a] * mesh.nodes[e.nodes[a]];
    return x;
}

double element_jacobian(const Mesh& mesh, int element, const Vec2& local) {
    const Element& e = mesh.elements[element];
    const ShapeValues sv = shape_functions(mesh, e, local);
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    for (int a = 0; a < sv.n; ++a) {
        const Vec2& x = mesh.nodes[e.nodes[a]];
        J(0, 0) += x.x() * sv.dN[a][0];
        J(0, 1) += x.x() * sv.dN[a][1];
        J(1, 0) += x.y() * sv.dN[a][0];
        J(1, 1) += x.y() * sv.dN[a][1];
    }
    return J.determinant();
}

double element_area(const Mesh& mesh, int element) {
    const Element& e = mesh.elements[element];
    if (e.tech == ElementTech::Tri3) return 0.5 * std::abs(element_jacobian(mesh, element, Vec2(0, 0)));
    const GaussRule& g = gauss_legendre(4);
    double a = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i)
        for (std::size_t j = 0; j < g.x.size(); ++j)
            a += g.w[i] * g.w[j] * element_jacobian(mesh, element, Vec2(g.x[i], g.x[j]));
    return a;
}

// ----------------------------------------------------------------------------
// VTK
// ----------------------------------------------------------------------------

int VtkWriter::add_cell(const std::vector<Vec2>& vertices) {
    std::vector<int> ids;
    for (const auto& v : vertices) {
        ids.push_back(static_cast<int>(points_.size()));
        points_.push_back(v);
    }
    cells_.push_back(std::move(ids));
    return static_cast<int>(cells_.size()) - 1;
}

void VtkWriter::add_point_vector(const std::string& name, const std::vector<Vec2>& values) {
    if (values.size() != points_.size()) throw std::invalid_argument("vtk: point data size mismatch");
    point_vectors_.emplace_back(name, values);
}

void VtkWriter::add_point_scalar(const std::string& name, const std::vector<double>& values) {
    if (values.size() != points_.size()) throw std::invalid_argument("vtk: point data size mismatch");
    point_scalars_.emplace_back(name, values);
}

void VtkWriter::add_cell_scalar(const std::string& name, const std::vector<double>& values) {
    if (values.size() != cells_.size()) throw std::invalid_argument("vtk: cell data size mismatch");
    cell_scalars_.emplace_back(name, values);
}

void VtkWriter::write(const std::string& path, const std::string& title) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "# vtk DataFile Version 3.0\n%s\nASCII\nDATASET UNSTRUCTURED_GRID\n", title.c_str());
    std::fprintf(f, "POINTS %zu double\n", points_.size());
    for (const auto& p : points_) std::fprintf(f, "%.17g %.17g 0\n", p.x(), p.y());
    std::size_t total = 0;
    for (const auto& c : cells_) total += c.size() + 1;
    std::fprintf(f, "CELLS %zu %zu\n", cells_.size(), total);
    for (const auto& c : cells_) {
        std::fprintf(f, "%zu", c.size());
        for (int i : c) std::fprintf(f, " %d", i);
        std::fprintf(f, "\n");
    }
    std::fprintf(f, "CELL_TYPES %zu\n", cells_.size());
    for (const auto& c : cells_) std::fprintf(f, "%d\n", c.size() == 3 ? 5 : (c.size() == 4 ? 9 : 7));
    if (!point_vectors_.empty() || !point_scalars_.empty()) {
        std::fprintf(f, "POINT_DATA %zu\n", points_.size());
        for (const auto& [name, v] : point_vectors_) {
            std::fprintf(f, "VECTORS %s double\n", name.c_str());
            for (const auto& x : v) std::fprintf(f, "%.17g %.17g 0\n", x.x(), x.y());
        }
        for (const auto& [name, v] : point_scalars_) {
            std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name.c_str());
            for (double x : v) std::fprintf(f, "%.17g\n", x);
        }
    }
    if (!cell_scalars_.empty()) {
        std::fprintf(f, "CELL_DATA %zu\n", cells_.size());
        for (const auto& [name, v] : cell_scalars_) {
            std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name.c_str());
            for (double x : v) std::fprintf(f, "%.17g\n", x);
        }
    }
    std::fclose(f);
}

void write_mesh_vtk(const std::string& path, const Mesh& mesh, const std::vector<Vec2>* displacement,
                    const std::map<std::string, std::vector<double>>& cell_data) {
    VtkWriter w;
    std::vector<Vec2> disp;
    std::vector<int> owner;
    for (int id = 0; id < mesh.num_elements(); ++id) {
        const Element& e = mesh.elements[id];
        std::vector<std::vector<Vec2>> cells;
        if (e.tech == ElementTech::Tri3) {
            cells.push_back({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
        } else {
            const int sub = e.tech == ElementTech::Quad4 ? 1 : 2;
            for (int j = 0; j < sub; ++j)
                for (int i = 0; i < sub; ++i) {
                    const double r0 = -1.0 + 2.0 * i / sub, r1 = -1.0 + 2.0 * (i + 1) / sub;
                    const double s0 = -1.0 + 2.0 * j / sub, s1 = -1.0 + 2.0 * (j + 1) / sub;
                    cells.push_back({Vec2(r0, s0), Vec2(r1, s0), Vec2(r1, s1), Vec2(r0, s1)});
                }
        }
        for (const auto& locals : cells) {
            std::vector<Vec2> verts;
            for (const auto& l : locals) {
                const ShapeValues sv = shape_functions(mesh, e, l);
                Vec2 x = Vec2::Zero(), u = Vec2::Zero();
                for (int a = 0; a < sv.n; ++a) {
                    x += sv.N[a] * mesh.nodes[e.nodes[a]];
                    if (displacement) u += sv.N[a] * (*displacement)[e.nodes[a]];
                }
                verts.push_back(x);
                disp.push_back(u);
            }
            w.add_cell(verts);
            owner.push_back(id);
        }
    }
    if (displacement) w.add_point_vector("displacement", disp);
    for (const auto& [name, values] : cell_data) {
        std::vector<double> v;
        for (int id : owner) v.push_back(values.at(id));
        w.add_cell_scalar(name, v);
    }
    w.write(path);
}

}  // namespace blayer
