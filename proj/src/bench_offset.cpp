/**
 * @file bench_offset.cpp
 * @brief Offset validation: curve and surface error tables and exactness on circular arcs.
 */
#include "bench_internal.hpp"

#include "blayer/offset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace blayer::detail {

namespace fs = std::filesystem;

namespace {

NurbsPatch table_curve() {
    Eigen::MatrixXd P(4, 2);
    P << 0.0, 0.0, 0.2, 1.0, 1.0, 1.3, 1.8, 0.8;
    const double w = 1.0 / std::sqrt(2.0);
    return NurbsPatch(KnotVector({0, 0, 0, 0.5, 1, 1, 1}, 2), P, {1.0, w, 1.0, w});
}

NurbsPatch table_surface() {
    static const double z[6][6] = {{-10, -8, -5, -3, -8, -10}, {-5, -4, -3, -2, -4, -5}, {0, -4, -8, -8, -4, 2},
                                   {0, -4, -8, -8, -4, 2},     {-5, -4, -3, -2, -4, -5}, {-10, -8, -5, -3, -8, -10}};
    Eigen::MatrixXd P(36, 3);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) P.row(j + 6 * i) << -25.0 + 10.0 * j, -25.0 + 10.0 * i, z[i][j];
    const KnotVector kv({0, 0, 0, 0, 1.0 / 3.0, 2.0 / 3.0, 1, 1, 1, 1}, 3);
    return NurbsPatch(kv, kv, P, std::vector<double>(36, 1.0));
}

NurbsPatch quarter_arc() {
    Eigen::MatrixXd P(3, 2);
    P << 0.0, 1.0, 1.0, 1.0, 1.0, 0.0;
    return NurbsPatch(KnotVector::open_uniform(2, 1), P, {1.0, 1.0 / std::sqrt(2.0), 1.0});
}

struct Row {
    std::string shape, method;
    double distance, e_inf, e_L2;
    int iterations;
};

}  // namespace

void run_offset_validate(const Config& c, const RunOptions&, const std::string& dir, BenchOutput& out) {
    const int sps = c.get_int("offset.samples_per_span");
    OptimizerSettings opt;
    opt.max_iterations = c.get_int("offset.max_iterations");
    opt.gradient_tolerance = c.get_double("offset.gradient_tolerance");
    const std::string cases = c.get_string("geometry.cases");
    auto wants = [&](const std::string& k) { return cases.find(k) != std::string::npos; };
    const OffsetMethod methods[3] = {OffsetMethod::PolygonTranslation, OffsetMethod::Interpolation,
                                     OffsetMethod::Optimization};
    std::vector<Row> rows;
    auto run = [&](const std::string& shape, const NurbsPatch& base, double ell, double sign, int samples) {
        std::map<OffsetMethod, OffsetErrors> res;
        for (OffsetMethod m : methods) {
            OffsetRequest rq;
            rq.base = base;
            rq.distance = ell;
            rq.method = m;
            rq.optimizer = opt;
            rq.optimizer.samples = samples;
            rq.surface_normal_sign = sign;
            const OffsetResult r = compute_offset(rq);
            const OffsetErrors e = offset_error_metrics(base, r.patch, ell, sps, sign);
            rows.push_back({shape, to_string(m), ell, e.e_inf, e.e_L2, r.iterations});
            res[m] = e;
        }
        return res;
    };

    if (wants("surface")) {
        const double ell = c.get_double("surface.distance");
        auto r = run("surface", table_surface(), ell, c.get_double("surface.normal_sign"),
                     c.get_int("offset.surface_optimizer_samples"));
        auto rel = [](double v, double ref) { return std::abs(v - ref) / ref; };
        const auto& pt = r[OffsetMethod::PolygonTranslation];
        const auto& in = r[OffsetMethod::Interpolation];
        add_criterion(out, "surface_polygon_e_inf", "relative deviation from 0.7403", rel(pt.e_inf, 0.7403), 0.10);
        add_criterion(out, "surface_polygon_e_L2", "relative deviation from 0.2491", rel(pt.e_L2, 0.2491), 0.10);
        add_criterion(out, "surface_interpolation_e_inf", "relative deviation from 0.2082", rel(in.e_inf, 0.2082), 0.10);
        add_criterion(out, "surface_interpolation_e_L2", "relative deviation from 0.04993", rel(in.e_L2, 0.04993), 0.10);
        add_criterion(out, "surface_optimization_e_inf", "optimization e_inf", r[OffsetMethod::Optimization].e_inf, 0.21);
    }
    if (wants("curve")) {
        double worst_order = -1e300, worst_metric = -1e300;
        for (double ell : c.get_list("curve.distances")) {
            auto r = run("curve", table_curve(), ell, 1.0, c.get_int("offset.curve_optimizer_samples"));
            const double o = r[OffsetMethod::Optimization].e_L2, i = r[OffsetMethod::Interpolation].e_L2,
                         p = r[OffsetMethod::PolygonTranslation].e_L2;
            worst_order = std::max({worst_order, o - i, i - p});
            for (const auto& [m, e] : r) worst_metric = std::max(worst_metric, e.e_L2 - e.e_inf);
        }
        add_criterion(out, "curve_ordering", "max of e_L2(opt)-e_L2(interp), e_L2(interp)-e_L2(polygon)", worst_order, 0.0);
        add_criterion(out, "curve_metric_order", "max of e_L2 - e_inf", worst_metric, 0.0);
    }
    if (wants("arc")) {
        auto r = run("arc", quarter_arc(), c.get_double("arc.distance"), 1.0, c.get_int("offset.curve_optimizer_samples"));
        add_criterion(out, "arc_polygon_exact", "polygon translation e_inf on a circular arc",
                      r[OffsetMethod::PolygonTranslation].e_inf, 1e-10);
        add_criterion(out, "arc_interpolation_exact", "interpolation e_inf on a circular arc",
                      r[OffsetMethod::Interpolation].e_inf, 1e-10);
    }
    if (wants("file")) {
        const NurbsPatch base = read_patch_file(data_path(c.get_string("geometry.patch_file")));
        run("file", base, c.get_double("geometry.distance"), c.has("surface.normal_sign") ? c.get_double("surface.normal_sign") : 1.0,
            c.get_int("offset.curve_optimizer_samples"));
    }

    std::ofstream f(fs::path(dir) / "offset_errors.csv");
    f << "shape,method,distance,e_inf,e_L2,iterations\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%d\n", r.shape.c_str(), r.method.c_str(), r.distance,
                      r.e_inf, r.e_L2, r.iterations);
        f << buf;
        out.data["rows"].push_back({{"shape", r.shape},
                                    {"method", r.method},
                                    {"distance", r.distance},
                                    {"e_inf", r.e_inf},
                                    {"e_L2", r.e_L2},
                                    {"iterations", r.iterations}});
    }
}

}  // namespace blayer::detail
