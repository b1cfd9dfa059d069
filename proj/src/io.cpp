#include "tracelab/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace tracelab {

namespace {

Json real(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

VertexSet index_list(const Json& j, const char* key) {
    VertexSet out;
    if (!j.contains(key)) return out;
    for (const auto& v : j.at(key)) out.push_back(v.get<Index>());
    return out;
}

}  // namespace

Json graph_to_json(const DomainGraph& g) {
    Json j;
    Json coords = Json::array();
    for (const auto& c : g.coords()) coords.push_back({c.x(), c.y()});
    j["coords"] = std::move(coords);
    Json edges = Json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v, e.conductance});
    j["edges"] = std::move(edges);
    j["measure"] = std::vector<double>(g.measure().data(), g.measure().data() + g.measure().size());
    j["interior"] = g.interior();
    j["boundary"] = g.boundary();
    j["absorbing"] = g.absorbing();
    j["mesh"] = g.mesh();
    j["family"] = std::string(to_string(g.family()));
    if (g.slit()) j["slit"] = {{"tip", {g.slit()->tip.x(), g.slit()->tip.y()}}, {"side", g.slit()->side}};
    return j;
}

DomainGraph graph_from_json(const Json& j) {
    try {
        std::vector<Eigen::Vector2d> coords;
        for (const auto& c : j.at("coords")) coords.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
        const Index n = static_cast<Index>(coords.size());
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) edges.push_back({e.at(0).get<Index>(), e.at(1).get<Index>(), e.at(2).get<double>()});
        Eigen::VectorXd measure = Eigen::VectorXd::Ones(n);
        if (j.contains("measure")) {
            const auto m = j.at("measure").get<std::vector<double>>();
            if (static_cast<Index>(m.size()) != n) throw InvalidArgument("graph: measure has the wrong length");
            measure = Eigen::Map<const Eigen::VectorXd>(m.data(), n);
        }
        std::vector<VertexKind> kinds(static_cast<size_t>(n), VertexKind::interior);
        std::vector<char> seen(static_cast<size_t>(n), 0);
        auto mark = [&](const VertexSet& set, VertexKind k) {
            for (Index v : set) {
                if (v < 0 || v >= n) throw InvalidArgument("graph: vertex index out of range");
                if (seen[static_cast<size_t>(v)]++) throw InvalidArgument("graph: vertex listed in two classes");
                kinds[static_cast<size_t>(v)] = k;
            }
        };
        mark(index_list(j, "interior"), VertexKind::interior);
        mark(index_list(j, "boundary"), VertexKind::boundary);
        mark(index_list(j, "absorbing"), VertexKind::absorbing);
        if (j.contains("interior"))
            for (Index v = 0; v < n; ++v)
                if (!seen[static_cast<size_t>(v)]) throw InvalidArgument("graph: vertex " + std::to_string(v) + " is unclassified");
        std::optional<SlitGeometry> slit;
        if (j.contains("slit")) {
            const auto& s = j.at("slit");
            slit = SlitGeometry{{s.at("tip").at(0).get<double>(), s.at("tip").at(1).get<double>()},
                                s.at("side").get<std::vector<int>>()};
        }
        const Family family = j.contains("family") ? family_from_string(j.at("family").get<std::string>()) : Family::custom;
        return DomainGraph(std::move(coords), std::move(edges), std::move(measure), std::move(kinds),
                           j.value("mesh", 1.0), std::move(slit), family);
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("graph JSON: ") + e.what());
    }
}

DomainSpec spec_from_json(const Json& j) {
    try {
        DomainSpec s;
        s.family = family_from_string(j.at("family").get<std::string>());
        s.side = j.value("side", s.side);
        s.alpha = j.value("alpha", s.alpha);
        if (j.contains("truncation_radius")) s.truncation_radius = j.at("truncation_radius").get<double>();
        if (j.contains("base_point"))
            s.base_point = Eigen::Vector2d(j.at("base_point").at(0).get<double>(), j.at("base_point").at(1).get<double>());
        if (j.contains("scale")) s.scale = j.at("scale").get<double>();
        return s;
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("domain JSON: ") + e.what());
    }
}

Json spec_to_json(const DomainSpec& spec) {
    Json j;
    j["family"] = std::string(to_string(spec.family));
    j["side"] = spec.side;
    j["alpha"] = spec.alpha;
    if (spec.truncation_radius) j["truncation_radius"] = *spec.truncation_radius;
    if (spec.base_point) j["base_point"] = {spec.base_point->x(), spec.base_point->y()};
    if (spec.scale) j["scale"] = *spec.scale;
    return j;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string report_csv(const EstimateReport& report) {
    std::ostringstream out;
    write_csv(out, report);
    return out.str();
}

Json report_summary(const EstimateReport& report) {
    Json j;
    j["pass"] = report.pass;
    j["min_ratio"] = real(report.min_ratio);
    j["max_ratio"] = real(report.max_ratio);
    j["predicate"] = report.predicate;
    j["rows"] = report.rows.size();
    Json metrics = Json::object();
    for (const auto& [k, v] : report.metrics) metrics[k] = real(v);
    j["metrics"] = std::move(metrics);
    j["warnings"] = report.warnings.size();
    return j;
}

}  // namespace tracelab
