#include "hodge/report.hpp"

#include <cmath>
#include <cstdio>

namespace hodge {

namespace {

void emit(const nlohmann::json& v, int indent, std::string& out)
{
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (v.type()) {
    case nlohmann::json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, item] : v.items()) { // std::map storage: sorted keys
            if (!first) out += ",\n";
            first = false;
            out += pad + nlohmann::json(key).dump() + ": ";
            emit(item, indent + 2, out);
        }
        out += "\n" + close + "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            emit(v[i], indent + 2, out);
        }
        out += "\n" + close + "]";
        return;
    }
    case nlohmann::json::value_t::number_float: {
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            out += "null";
            return;
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out += buf;
        return;
    }
    default:
        out += v.dump();
    }
}

nlohmann::json matrix_json(const Matrix& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json ids(const std::vector<Index>& local, const SupportSet& support)
{
    nlohmann::json out = nlohmann::json::array();
    for (Index i : local) out.push_back(support.cells[i]);
    return out;
}

} // namespace

std::string json_text(const nlohmann::json& value)
{
    std::string out;
    emit(value, 0, out);
    out += "\n";
    return out;
}

nlohmann::json decomposition_json(const Decomposition& d, const OperatorSet& ops)
{
    nlohmann::json j;
    j["mode"] = d.mode;
    nlohmann::json betti = nlohmann::json::array();
    for (int k = 0; k <= d.betti.dim; ++k) betti.push_back(d.betti[k]);
    j["betti"] = betti;
    nlohmann::json norms;
    for (int c = 0; c < 5; ++c) norms[component_names[c]] = std::sqrt(std::max(0.0, d.gram(c, c)));
    j["norms"] = norms;
    const Vector& S = ops.St[1];
    j["input_norm"] = std::sqrt(d.input.dot(S.cwiseProduct(d.input)));
    j["gram"] = matrix_json(d.gram);
    j["component_order"] = std::vector<std::string>(component_names.begin(), component_names.end());
    j["reconstruction_residual"] = d.reconstruction_residual;
    j["gauge_pins"] = ids(d.pins, ops.tangential[0]); // global vertex ids pinned to 0
    j["augmented_faces"] = ids(d.augmented, ops.tangential[2]);
    nlohmann::json supports;
    for (int k = 0; k <= ops.dim; ++k) {
        supports["normal"].push_back(ops.normal[k].size());
        supports["tangential"].push_back(ops.tangential[k].size());
    }
    supports["extended0"] = ops.extended0.size();
    j["supports"] = supports;
    nlohmann::json reports = nlohmann::json::array();
    nlohmann::json solve_seconds;
    for (const auto& r : d.reports) {
        nlohmann::json e;
        e["label"] = r.label;
        e["method"] = r.method;
        e["iterations"] = r.iterations;
        e["relative_residual"] = r.relative_residual;
        e["regularization"] = r.regularization.mode;
        nlohmann::json reg = nlohmann::json::array();
        for (Index i : r.regularization.indices) reg.push_back(i);
        e["regularized_indices"] = reg;
        reports.push_back(e);
        solve_seconds[r.label] = r.seconds;
    }
    j["solver_reports"] = reports;
    nlohmann::json steps;
    for (const auto& [name, seconds] : d.timing) steps[name] = seconds;
    j["timing"] = {{"steps", steps}, {"solves", solve_seconds}};
    return j;
}

} // namespace hodge
