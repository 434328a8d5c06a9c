#include "hyctrl/io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace hyctrl {

namespace {

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(what + " must be a nonempty nested array");
    const auto rows = j.size();
    const auto cols = j.at(0).is_array() ? j.at(0).size() : std::size_t{1};
    Eigen::MatrixXd M(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j.at(r);
        if (row.is_array()) {
            if (row.size() != cols) throw std::invalid_argument(what + " rows have uneven length");
            for (std::size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r),
                                                     static_cast<Eigen::Index>(c)) =
                row.at(c).get<double>();
        } else {
            M(static_cast<Eigen::Index>(r), 0) = row.get<double>();
        }
    }
    return M;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

PiecewiseConstantFn pcw_from_json(const json& j, double lo, double hi) {
    if (j.is_number()) return PiecewiseConstantFn::constant(lo, hi, j.get<double>());
    if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
        throw std::invalid_argument("piecewise function needs breakpoints and values");
    return PiecewiseConstantFn(j.at("breakpoints").get<std::vector<double>>(),
                               j.at("values").get<std::vector<double>>());
}

json pcw_to_json(const PiecewiseConstantFn& f) {
    return json{{"breakpoints", f.breakpoints()}, {"values", f.values()}};
}

HyperbolicSystem hyperbolic_from_json(const json& j) {
    HyperbolicSystem sys;
    const int n = j.at("n").get<int>();
    sys.n_plus = j.at("n_plus").get<int>();
    sys.q = j.value("q", 2.0);
    const json& speeds = j.at("speeds");
    const json& dampings = j.at("dampings");
    if (static_cast<int>(speeds.size()) != n || static_cast<int>(dampings.size()) != n)
        throw std::invalid_argument("speed/damping profile count must equal n");
    for (int i = 0; i < n; ++i) {
        sys.speeds.push_back(pcw_from_json(speeds.at(static_cast<std::size_t>(i))));
        sys.dampings.push_back(pcw_from_json(dampings.at(static_cast<std::size_t>(i))));
    }
    sys.boundary_matrix = matrix_from_json(j.at("M"), "M");
    sys.control_matrix = matrix_from_json(j.at("B"), "B");
    sys.validate();
    return sys;
}

json hyperbolic_to_json(const HyperbolicSystem& sys) {
    json speeds = json::array(), dampings = json::array();
    for (const auto& f : sys.speeds) speeds.push_back(pcw_to_json(f));
    for (const auto& f : sys.dampings) dampings.push_back(pcw_to_json(f));
    return json{{"n", sys.n()},
                {"n_plus", sys.n_plus},
                {"q", sys.q},
                {"speeds", speeds},
                {"dampings", dampings},
                {"M", matrix_to_json(sys.boundary_matrix)},
                {"B", matrix_to_json(sys.control_matrix)}};
}

BoundaryState state_from_json(const json& j) {
    BoundaryState s;
    for (const json& c : j.at("components")) s.components.push_back(pcw_from_json(c));
    return s;
}

json state_to_json(const BoundaryState& s) {
    json comps = json::array();
    for (const auto& c : s.components) comps.push_back(pcw_to_json(c));
    return json{{"components", comps}};
}

ControlSignal control_from_json(const json& j) {
    ControlSignal u;
    u.horizon = j.at("horizon").get<double>();
    for (const json& c : j.at("channels")) u.channels.push_back(pcw_from_json(c, 0.0, u.horizon));
    u.validate();
    return u;
}

json control_to_json(const ControlSignal& u) {
    json chans = json::array();
    for (const auto& c : u.channels) chans.push_back(pcw_to_json(c));
    return json{{"horizon", u.horizon}, {"channels", chans}};
}

FlowGraph graph_from_json(const json& j) {
    FlowGraph g;
    g.vertex_count = j.at("vertices").get<int>();
    for (const json& e : j.at("edges")) {
        FlowEdge edge{e.at("tail").get<int>(), e.at("head").get<int>(),
                      pcw_from_json(e.at("speed")),
                      e.contains("damping") ? pcw_from_json(e.at("damping"))
                                            : PiecewiseConstantFn::constant(0.0, 1.0, 0.0)};
        g.edges.push_back(std::move(edge));
    }
    if (j.contains("weights")) {
        g.weights = Eigen::MatrixXd::Zero(g.k(), g.n());
        for (const json& t : j.at("weights"))
            g.weights(t.at(0).get<int>(), t.at(1).get<int>()) = t.at(2).get<double>();
    } else {
        // uniform split over each vertex's outgoing edges
        g.weights = Eigen::MatrixXd::Zero(g.k(), g.n());
        std::vector<int> out_deg(static_cast<std::size_t>(g.k()), 0);
        for (const auto& e : g.edges) ++out_deg[static_cast<std::size_t>(e.tail)];
        for (int jj = 0; jj < g.n(); ++jj) {
            const int tail = g.edges[static_cast<std::size_t>(jj)].tail;
            g.weights(tail, jj) = 1.0 / out_deg[static_cast<std::size_t>(tail)];
        }
    }
    g.gamma = j.contains("gamma") ? matrix_from_json(j.at("gamma"), "gamma")
                                  : Eigen::MatrixXd::Zero(g.k(), 0);
    return g;
}

json graph_to_json(const FlowGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edges)
        edges.push_back(json{{"tail", e.tail},
                             {"head", e.head},
                             {"speed", pcw_to_json(e.speed)},
                             {"damping", pcw_to_json(e.damping)}});
    json weights = json::array();
    for (int i = 0; i < g.k(); ++i)
        for (int jj = 0; jj < g.n(); ++jj)
            if (g.weights(i, jj) != 0.0) weights.push_back(json::array({i, jj, g.weights(i, jj)}));
    return json{{"vertices", g.vertex_count},
                {"edges", edges},
                {"weights", weights},
                {"gamma", matrix_to_json(g.gamma)}};
}

json report_to_json(const ControllabilityReport& rep) {
    json out{{"verdict", verdict_name(rep.verdict)},
             {"kind", rep.kind},
             {"rank_kb", rep.rank_kb},
             {"min_criterion", rep.min_criterion},
             {"argmin", json::array({rep.argmin.real(), rep.argmin.imag()})},
             {"strip",
              {{"sigma_min", rep.search_box.sigma_min},
               {"sigma_max", rep.search_box.sigma_max},
               {"im_max", rep.search_box.im_max},
               {"sigma_grid", rep.search_box.sigma_grid},
               {"im_grid", rep.search_box.im_grid}}},
             {"detail", rep.detail},
             {"notes", rep.notes},
             {"elapsed_seconds", rep.elapsed_seconds}};
    if (rep.alpha_estimate) out["alpha_estimate"] = *rep.alpha_estimate;
    return out;
}

json network_report_to_json(const NetworkReport& rep) {
    json out{{"verdict", verdict_name(rep.base.verdict)},
             {"kind", rep.base.kind},
             {"rank_kb", rep.base.rank_kb},
             {"min_margin", rep.base.min_criterion},
             {"argmin", json::array({rep.base.argmin.real(), rep.base.argmin.imag()})},
             {"detail", rep.base.detail},
             {"notes", rep.base.notes},
             {"cycle_sizes", rep.cycle_sizes},
             {"test_points", rep.test_points},
             {"elapsed_seconds", rep.base.elapsed_seconds}};
    if (rep.base.alpha_estimate) out["alpha_estimate"] = *rep.base.alpha_estimate;
    if (rep.obstruction)
        out["obstruction"] = json{{"vertex", rep.obstruction->vertex},
                                  {"edge_a", rep.obstruction->edge_a},
                                  {"edge_b", rep.obstruction->edge_b},
                                  {"column_angle", rep.obstruction->column_angle}};
    json margins = json::array();
    for (const auto& m : rep.margins)
        margins.push_back(json{{"cycle", m.cycle},
                               {"min_margin", m.min_margin},
                               {"at", json::array({m.at.real(), m.at.imag()})},
                               {"exhaustive", m.exhaustive}});
    out["cycle_margins"] = margins;
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int resolution) {
    if (resolution < 1) throw std::invalid_argument("resolution must be positive");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "component,t,value\n" << std::setprecision(17);
    for (int i = 0; i < traj.system().n(); ++i)
        for (int s = 0; s <= resolution; ++s) {
            const double t = traj.horizon() * double(s) / resolution;
            out << i << "," << t << "," << traj.value(i, t) << "\n";
        }
}

void write_state_csv(const std::string& path, const BoundaryState& s, int resolution) {
    if (resolution < 1) throw std::invalid_argument("resolution must be positive");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "component,s,value\n" << std::setprecision(17);
    for (int i = 0; i < s.n(); ++i) {
        const auto& c = s.components[static_cast<std::size_t>(i)];
        for (int r = 0; r <= resolution; ++r) {
            const double x = c.domain_lo() + c.domain_span() * double(r) / resolution;
            out << i << "," << x << "," << c.value(x) << "\n";
        }
    }
}

void write_profile_csv(const std::string& path, const PdeProfile& profile, int resolution,
                       double t) {
    if (resolution < 1) throw std::invalid_argument("resolution must be positive");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "component,t,x,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < profile.size(); ++i)
        for (int r = 0; r <= resolution; ++r) {
            const double x = double(r) / resolution;
            out << i << "," << t << "," << x << "," << profile[i].value(x) << "\n";
        }
}

}  // namespace hyctrl
